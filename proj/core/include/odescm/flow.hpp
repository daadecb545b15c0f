#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "odescm/integrator.hpp"
#include "odescm/ode_system.hpp"

namespace odescm {

enum class FlowStatus { converged, oscillating, diverged, timeout };

std::string_view to_string(FlowStatus s);

struct FlowOptions {
  double eq_tol = 1e-8;
  double t_max = 1e3;
  /// Trailing window over which the residual must stay below eq_tol, as a
  /// fraction of elapsed time and a minimum number of accepted steps.
  double window_fraction = 0.01;
  std::size_t window_min_steps = 10;
  IntegratorOptions integrator{};
};

/// Long-time behaviour of one trajectory. `state` is the equilibrium
/// estimate when converged and the last integrated state otherwise.
struct EquilibriumOutcome {
  FlowStatus status = FlowStatus::timeout;
  std::vector<double> state;
  double residual = 0.0;  // max-norm of the drift at `state`
  double time = 0.0;      // convergence time, or time reached
  std::vector<std::string> diagnostics;
};

/// Integrates until the drift stays below eq_tol over the trailing window.
/// The integrator tolerances are capped at eq_tol / (100 * max(1, |J(x0)|))
/// (infinity norm, floor 1e-14) so that step noise near the equilibrium
/// stays below the threshold, stiff components included.
///
/// A run that reaches t_max bounded is `oscillating` when the residual has
/// not decayed over the last half (max over the final quarter is at least
/// half the max over the quarter before) and the drift changed sign at
/// least four times in that half, with a final-quarter residual above
/// 100 * eq_tol; otherwise it is a `timeout`. States above
/// the divergence norm, or non-finite ones, give `diverged`.
EquilibriumOutcome find_equilibrium_by_flow(const OdeSystem& sys, std::span<const double> x0,
                                            const FlowOptions& options = {});

}  // namespace odescm
