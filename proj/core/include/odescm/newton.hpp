#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "odescm/matrix.hpp"

namespace odescm {

struct NewtonOptions {
  double residual_tol = 1e-10;
  std::size_t max_iterations = 200;
  /// Number of starts including the reference start.
  std::size_t starts = 32;
  double cluster_tol = 1e-6;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

/// r(x) into `out`; may throw EvalError or DegenerateMechanism, which fails the start.
using ResidualFn = std::function<void(std::span<const double> x, std::span<double> out)>;
using JacobianFn = std::function<Matrix(std::span<const double> x)>;

struct NewtonRun {
  bool converged = false;
  std::vector<double> x;
  double residual = 0.0;
  std::size_t iterations = 0;
  std::string failure;
};

/// Damped Newton with Armijo backtracking on 0.5 * |r|^2. Converged when
/// the max-norm residual drops below options.residual_tol.
NewtonRun damped_newton(const ResidualFn& residual, const JacobianFn& jacobian, std::vector<double> x0,
                        const NewtonOptions& options);

/// Central-difference Jacobian with step 1e-7 * (1 + |x_j|).
Matrix finite_difference_jacobian(const ResidualFn& residual, std::span<const double> x, std::size_t rows);

enum class SolveStatus { unique, multiple, none_found };

/// `unique-w.r.t.-probes`, `multiple` or `none-found`.
std::string_view to_string(SolveStatus s);

struct SolveResult {
  SolveStatus status = SolveStatus::none_found;
  /// The solution when status is unique.
  std::optional<std::vector<double>> solution;
  double residual = 0.0;
  /// One representative per cluster of converged starts, sorted lexicographically.
  std::vector<std::vector<double>> solutions;
  std::size_t starts = 0;
  std::size_t converged_starts = 0;
  std::size_t iterations = 0;
};

/// Runs damped_newton from every start, keeps converged roots accepted by
/// `admissible`, and clusters them (max-norm distance cluster_tol). The
/// status is unique iff there is exactly one cluster and at least half of
/// the starts converged into it.
SolveResult multistart_newton(const ResidualFn& residual, const JacobianFn& jacobian,
                              const std::vector<std::vector<double>>& starts, const NewtonOptions& options,
                              const std::function<bool(std::span<const double>)>& admissible = {});

}  // namespace odescm
