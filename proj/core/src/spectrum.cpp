#include "odescm/spectrum.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "odescm/errors.hpp"

namespace odescm {

namespace {

constexpr std::size_t kMaxDimension = 64;

// Parlett-Reinsch balancing with power-of-two scalings, which leaves the
// eigenvalues unchanged and the rounding errors of the QR iteration smaller.
void balance(Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  constexpr double radix = 2.0;
  bool done = false;
  while (!done) {
    done = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double c = 0.0, r = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(a(j, i));
        r += std::abs(a(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix;
      double f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= radix * radix;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= radix * radix;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        a.row(i) /= f;
        a.col(i) *= f;
      }
    }
  }
}

}  // namespace

Matrix jacobian_at(const OdeSystem& sys, std::span<const double> x) {
  if (!std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); })) {
    throw InvalidArgument("jacobian point must be finite");
  }
  return sys.jacobian(x);
}

std::string_view to_string(LocalStability s) {
  switch (s) {
    case LocalStability::asymptotically_stable: return "asymptotically-stable";
    case LocalStability::unstable: return "unstable";
    case LocalStability::marginal: return "marginal";
  }
  return "unknown";
}

std::vector<std::complex<double>> eigenvalues(const Matrix& j) {
  if (j.rows != j.cols) throw InvalidArgument("eigenvalues need a square matrix");
  if (j.rows > kMaxDimension) throw InvalidArgument("matrix too large for the dense eigensolver");
  const auto n = static_cast<Eigen::Index>(j.rows);
  if (n == 0) return {};
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) a(r, c) = j(r, c);
  }
  if (!a.allFinite()) throw InvalidArgument("matrix has non-finite entries");
  balance(a);
  Eigen::EigenSolver<Eigen::MatrixXd> solver(a, false);
  if (solver.info() != Eigen::Success) throw Error("eigenvalue iteration did not converge");
  std::vector<std::complex<double>> out(solver.eigenvalues().begin(), solver.eigenvalues().end());
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
  });
  return out;
}

Classification classify_equilibrium(const Matrix& j, double tol) {
  Classification c;
  c.eigenvalues = eigenvalues(j);
  const bool all_negative =
      std::all_of(c.eigenvalues.begin(), c.eigenvalues.end(), [tol](const auto& z) { return z.real() < -tol; });
  const bool any_positive =
      std::any_of(c.eigenvalues.begin(), c.eigenvalues.end(), [tol](const auto& z) { return z.real() > tol; });
  c.kind = any_positive ? LocalStability::unstable
           : all_negative ? LocalStability::asymptotically_stable
                          : LocalStability::marginal;
  return c;
}

}  // namespace odescm
