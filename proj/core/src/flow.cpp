#include "odescm/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "odescm/errors.hpp"

namespace odescm {

namespace {

constexpr double kTolCap = 0.01;
constexpr double kTolFloor = 1e-14;
constexpr double kNoiseMargin = 100.0;

double max_norm(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

bool all_finite(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

std::string_view to_string(FlowStatus s) {
  switch (s) {
    case FlowStatus::converged: return "converged";
    case FlowStatus::oscillating: return "oscillating";
    case FlowStatus::diverged: return "diverged";
    case FlowStatus::timeout: return "timeout";
  }
  return "unknown";
}

EquilibriumOutcome find_equilibrium_by_flow(const OdeSystem& sys, std::span<const double> x0,
                                            const FlowOptions& options) {
  if (!(options.eq_tol > 0)) throw InvalidArgument("eq_tol must be positive");
  if (!(options.t_max > 0)) throw InvalidArgument("t_max must be positive");

  EquilibriumOutcome out;
  auto finish = [&](FlowStatus status, std::span<const double> x, double t) {
    out.status = status;
    out.state.assign(x.begin(), x.end());
    out.time = t;
    try {
      out.residual = all_finite(x) ? max_norm(sys.drift(x)) : std::numeric_limits<double>::infinity();
    } catch (const EvalError& e) {
      out.residual = std::numeric_limits<double>::infinity();
      out.diagnostics.emplace_back(e.what());
    }
    if (status == FlowStatus::converged && !(out.residual < options.eq_tol)) {
      out.status = FlowStatus::timeout;
      out.diagnostics.emplace_back("residual check at the converged state failed");
    }
    return out;
  };

  if (sys.dimension() == 0) return finish(FlowStatus::converged, x0, 0.0);
  // Stiff components sit within the local error of their quasi-equilibrium,
  // which the drift amplifies by the Jacobian scale.
  double stiffness = 1.0;
  try {
    const Matrix j = sys.jacobian(x0);
    for (std::size_t r = 0; r < j.rows; ++r) {
      double row = 0.0;
      for (std::size_t c = 0; c < j.cols; ++c) row += std::abs(j(r, c));
      if (std::isfinite(row)) stiffness = std::max(stiffness, row);
    }
  } catch (const EvalError&) {
  }
  const double cap = std::max(kTolFloor, kTolCap * options.eq_tol / stiffness);
  IntegratorOptions integrator = options.integrator;
  integrator.abs_tol = std::min(integrator.abs_tol, cap);
  integrator.rel_tol = std::min(integrator.rel_tol, cap);
  DormandPrince dp(sys, x0, 0.0, integrator);
  if (max_norm(dp.derivative()) == 0.0) return finish(FlowStatus::converged, x0, 0.0);

  const double t_max = options.t_max;
  const double half = 0.5 * t_max;
  const double three_quarters = 0.75 * t_max;
  double run_start = -1.0;
  std::size_t run_steps = 0;
  double max_q3 = 0.0, max_q4 = 0.0;
  std::size_t sign_changes = 0;
  std::vector<int> last_sign(sys.dimension(), 0);

  while (dp.time() < t_max) {
    const double t_before = dp.time();
    const auto status = dp.step(t_max);
    if (status == DormandPrince::Status::underflow) {
      out.diagnostics.emplace_back("step size underflow (stiffness suspected)");
      return finish(FlowStatus::timeout, dp.state(), dp.time());
    }
    if (status == DormandPrince::Status::non_finite || !all_finite(dp.state()) ||
        max_norm(dp.state()) > options.integrator.divergence_norm) {
      out.diagnostics.emplace_back("state left every bounded region");
      return finish(FlowStatus::diverged, dp.state(), dp.time());
    }
    if (dp.accepted_steps() >= options.integrator.max_steps) {
      out.diagnostics.emplace_back("step budget exhausted");
      return finish(FlowStatus::timeout, dp.state(), dp.time());
    }

    const double t = dp.time();
    const auto f = dp.derivative();
    const double r = max_norm(f);
    if (r < options.eq_tol) {
      if (run_steps == 0) run_start = t_before;
      ++run_steps;
      if (run_steps >= options.window_min_steps && t - run_start >= options.window_fraction * t) {
        return finish(FlowStatus::converged, dp.state(), t);
      }
    } else {
      run_steps = 0;
    }

    if (t > half) {
      double& quarter_max = t > three_quarters ? max_q4 : max_q3;
      quarter_max = std::max(quarter_max, r);
      for (std::size_t i = 0; i < f.size(); ++i) {
        const int s = (f[i] > 0) - (f[i] < 0);
        if (s != 0 && last_sign[i] != 0 && s != last_sign[i]) ++sign_changes;
        if (s != 0) last_sign[i] = s;
      }
    }
  }

  const bool no_decay = max_q4 >= 0.5 * max_q3 && max_q4 > kNoiseMargin * options.eq_tol;
  if (no_decay && sign_changes >= 4) return finish(FlowStatus::oscillating, dp.state(), dp.time());
  out.diagnostics.emplace_back("no convergence within t_max");
  return finish(FlowStatus::timeout, dp.state(), dp.time());
}

}  // namespace odescm
