#pragma once

#include <complex>
#include <span>
#include <string_view>
#include <vector>

#include "odescm/matrix.hpp"
#include "odescm/ode_system.hpp"

namespace odescm {

/// Symbolic Jacobian of the drift at x. Throws DivisionByZero at singular points.
Matrix jacobian_at(const OdeSystem& sys, std::span<const double> x);

enum class LocalStability { asymptotically_stable, unstable, marginal };

std::string_view to_string(LocalStability s);

struct Classification {
  LocalStability kind = LocalStability::marginal;
  /// Sorted by real part, then imaginary part.
  std::vector<std::complex<double>> eigenvalues;
};

/// Eigenvalues of a balanced copy of `j` and the resulting linear
/// stability class: all real parts below -tol, some above tol, or neither.
/// Throws Error if the eigenvalue iteration fails to converge.
Classification classify_equilibrium(const Matrix& j, double tol = 1e-9);

/// Eigenvalues alone, sorted as in Classification.
std::vector<std::complex<double>> eigenvalues(const Matrix& j);

}  // namespace odescm
