#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "odescm/model_spec.hpp"
#include "odescm/ode_system.hpp"

namespace odescm {

enum class Termination { reached_end, converged, diverged, left_domain, step_underflow };

std::string_view to_string(Termination t);

struct IntegratorOptions {
  double abs_tol = 1e-9;
  double rel_tol = 1e-9;
  double initial_step = 0.0;  // 0 picks one from the drift at x0
  double max_step = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 50'000'000;
  /// Disables step control; every step has this length (last one clipped).
  std::optional<double> fixed_step;
  /// Sample times for the trajectory, increasing, within [0, t_end]. Empty
  /// records every accepted step.
  std::vector<double> sample_times;
  /// State norm beyond which the solution counts as diverged.
  double divergence_norm = 1e8;
  bool stop_on_domain_exit = false;
};

/// Sampled solution of an initial value problem. The first row is the
/// initial state; times are strictly increasing.
struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  Termination reason = Termination::reached_end;
  std::vector<std::string> diagnostics;
};

/// Explicit embedded Runge-Kutta 5(4) stepper (Dormand-Prince coefficients)
/// with first-same-as-last stages and a fourth-order continuous extension.
class DormandPrince {
 public:
  enum class Status { ok, underflow, non_finite };

  DormandPrince(const OdeSystem& sys, std::span<const double> x0, double t0, IntegratorOptions options);

  /// Takes one accepted step that does not pass `t_limit`.
  Status step(double t_limit);

  double time() const noexcept { return t_; }
  std::span<const double> state() const noexcept { return x_; }
  /// Drift at the current state (the last stage of the previous step).
  std::span<const double> derivative() const noexcept { return k_[6]; }
  double last_step() const noexcept { return h_last_; }
  std::size_t accepted_steps() const noexcept { return accepted_; }

  /// Dense output inside the last accepted step [time() - last_step(), time()].
  std::vector<double> interpolate(double t) const;

 private:
  void stages(double h);
  double error_norm() const;

  const OdeSystem& sys_;
  IntegratorOptions opt_;
  std::size_t n_;
  double t_;
  double h_ = 0.0;
  double h_last_ = 0.0;
  std::size_t accepted_ = 0;
  std::vector<double> x_, x_prev_, x_new_, tmp_, err_;
  std::vector<double> k_[7];
  std::vector<double> dense_[5];
};

/// Integrates sys from x0 over [0, t_end]. Non-finite states or norms above
/// options.divergence_norm end the run as `diverged`, too-small steps as
/// `step_underflow`. Leaving a declared domain is recorded as a diagnostic.
Trajectory integrate(const OdeSystem& sys, std::span<const double> x0, double t_end,
                     const IntegratorOptions& options = {});

/// `t,<coord>,...` header, one `%.17g` row per sample and a trailing
/// `# terminated: <reason>` line.
std::string trajectory_csv(const Trajectory& traj, const Layout& layout);

}  // namespace odescm
