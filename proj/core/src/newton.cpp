#include "odescm/newton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "odescm/errors.hpp"
#include "odescm/parallel.hpp"

namespace odescm {

namespace {

constexpr double kArmijo = 1e-4;
constexpr double kMinDamping = 1e-10;

double max_norm(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

double squared(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

bool all_finite(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

// Residual evaluation that turns evaluation failures into a missing value.
bool try_residual(const ResidualFn& f, std::span<const double> x, std::span<double> out) {
  try {
    f(x, out);
  } catch (const Error&) {
    return false;
  }
  return all_finite(out);
}

}  // namespace

std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::unique: return "unique-w.r.t.-probes";
    case SolveStatus::multiple: return "multiple";
    case SolveStatus::none_found: return "none-found";
  }
  return "unknown";
}

NewtonRun damped_newton(const ResidualFn& residual, const JacobianFn& jacobian, std::vector<double> x0,
                        const NewtonOptions& options) {
  NewtonRun run;
  const std::size_t n = x0.size();
  run.x = std::move(x0);
  std::vector<double> r(n), trial(n), r_trial(n);
  if (!try_residual(residual, run.x, r)) {
    run.failure = "residual undefined at start";
    return run;
  }
  run.residual = max_norm(r);
  if (n == 0) {
    run.converged = true;
    return run;
  }
  for (;;) {
    if (run.residual < options.residual_tol) {
      run.converged = true;
      return run;
    }
    if (run.iterations >= options.max_iterations) {
      run.failure = "iteration limit reached";
      return run;
    }
    ++run.iterations;

    Matrix j;
    try {
      j = jacobian(run.x);
    } catch (const Error& e) {
      run.failure = std::string("jacobian undefined: ") + e.what();
      return run;
    }
    Eigen::MatrixXd a(n, n);
    Eigen::VectorXd b(n);
    for (std::size_t p = 0; p < n; ++p) {
      b(p) = -r[p];
      for (std::size_t q = 0; q < n; ++q) a(p, q) = j(p, q);
    }
    if (!a.allFinite()) {
      run.failure = "jacobian not finite";
      return run;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible()) {
      run.failure = "singular jacobian";
      return run;
    }
    const Eigen::VectorXd dx = lu.solve(b);

    const double phi = 0.5 * squared(r);
    double alpha = 1.0;
    bool accepted = false;
    while (alpha >= kMinDamping) {
      for (std::size_t p = 0; p < n; ++p) trial[p] = run.x[p] + alpha * dx(p);
      if (try_residual(residual, trial, r_trial) && 0.5 * squared(r_trial) <= (1.0 - 2.0 * kArmijo * alpha) * phi) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      run.failure = "line search failed";
      return run;
    }
    run.x.swap(trial);
    r.swap(r_trial);
    run.residual = max_norm(r);
  }
}

Matrix finite_difference_jacobian(const ResidualFn& residual, std::span<const double> x, std::size_t rows) {
  const std::size_t n = x.size();
  Matrix j(rows, n);
  std::vector<double> xp(x.begin(), x.end()), fp(rows), fm(rows);
  for (std::size_t c = 0; c < n; ++c) {
    const double h = 1e-7 * (1.0 + std::abs(x[c]));
    xp[c] = x[c] + h;
    residual(xp, fp);
    xp[c] = x[c] - h;
    residual(xp, fm);
    xp[c] = x[c];
    for (std::size_t r = 0; r < rows; ++r) j(r, c) = (fp[r] - fm[r]) / (2 * h);
  }
  return j;
}

SolveResult multistart_newton(const ResidualFn& residual, const JacobianFn& jacobian,
                              const std::vector<std::vector<double>>& starts, const NewtonOptions& options,
                              const std::function<bool(std::span<const double>)>& admissible) {
  std::vector<NewtonRun> runs(starts.size());
  parallel_for(
      starts.size(), [&](std::size_t k) { runs[k] = damped_newton(residual, jacobian, starts[k], options); },
      options.threads);

  SolveResult result;
  result.starts = starts.size();
  struct Cluster {
    std::vector<double> x;
    double residual;
    std::size_t members;
  };
  std::vector<Cluster> clusters;
  for (const auto& run : runs) {
    result.iterations += run.iterations;
    if (!run.converged) continue;
    if (admissible && !admissible(run.x)) continue;
    ++result.converged_starts;
    auto near = std::find_if(clusters.begin(), clusters.end(), [&](const Cluster& c) {
      double d = 0.0;
      for (std::size_t i = 0; i < c.x.size(); ++i) d = std::max(d, std::abs(c.x[i] - run.x[i]));
      return d <= options.cluster_tol;
    });
    if (near == clusters.end()) {
      clusters.push_back({run.x, run.residual, 1});
    } else {
      ++near->members;
      if (run.residual < near->residual) {
        near->x = run.x;
        near->residual = run.residual;
      }
    }
  }
  std::sort(clusters.begin(), clusters.end(), [](const Cluster& a, const Cluster& b) { return a.x < b.x; });
  for (const auto& c : clusters) result.solutions.push_back(c.x);

  if (clusters.size() > 1) {
    result.status = SolveStatus::multiple;
  } else if (clusters.size() == 1 && 2 * clusters[0].members >= starts.size()) {
    result.status = SolveStatus::unique;
    result.solution = clusters[0].x;
  } else {
    result.status = SolveStatus::none_found;
  }
  result.residual = clusters.empty() ? std::numeric_limits<double>::infinity() : clusters.front().residual;
  for (const auto& c : clusters) result.residual = std::max(result.residual, c.residual);
  return result;
}

}  // namespace odescm
