#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "odescm/flow.hpp"
#include "odescm/intervention.hpp"
#include "odescm/ode_system.hpp"
#include "odescm/rng.hpp"

namespace odescm {

enum class Verdict { stable, refuted, inconclusive };

/// `stable-w.r.t.-probes`, `refuted` or `inconclusive`.
std::string_view to_string(Verdict v);

using InitSampler = std::function<std::vector<double>(Rng& rng)>;

struct ProbeOptions {
  std::size_t trials = 20;
  std::uint64_t seed = 0;
  double match_tol = 1e-5;
  FlowOptions flow{};
  unsigned threads = 0;
};

struct Trial {
  std::vector<double> init;
  EquilibriumOutcome outcome;
};

/// Evidence against stability: a start whose flow did not converge, or two
/// starts that converged to different limits.
struct Witness {
  enum class Kind { non_converging, multiple_limits };
  Kind kind = Kind::non_converging;
  std::size_t first = 0;
  std::size_t second = 0;
  std::string description;
};

struct StabilityReport {
  Verdict verdict = Verdict::inconclusive;
  std::vector<Trial> trials;
  /// Largest distance (max-norm) between two converged limits.
  double max_distance = 0.0;
  std::optional<Witness> witness;
};

/// Default starting states: uniform over the initial-state box inflated 3x
/// and intersected with the domains, with clamped blocks pinned to their
/// clamp values.
InitSampler default_init_sampler(const OdeSystem& sys);

/// Finite probe of stability. Trial k draws its start from the stream
/// (seed, k), so reports do not depend on the thread count. The verdict is
/// `stable` iff every trial converged and all limits lie within match_tol
/// of each other, `refuted` on a diverging or oscillating trial or on two
/// distinct limits, and `inconclusive` otherwise.
StabilityReport probe_stability(const OdeSystem& sys, const ProbeOptions& options = {},
                                const InitSampler& sampler = {});

struct InterventionalStability {
  Verdict verdict = Verdict::inconclusive;
  std::vector<std::pair<Intervention, StabilityReport>> draws;
};

/// For every target set, probes the hard-intervened system at `draws`
/// sampled clamp values. Starts are drawn with the targeted blocks pinned
/// to their clamp values. The per-set verdict is `refuted` if any draw is,
/// `stable` if all are, else `inconclusive`.
std::map<std::vector<std::size_t>, InterventionalStability> probe_interventional_stability(
    const OdeSystem& sys, const std::vector<std::vector<std::size_t>>& family, const InterventionSampler& sampler,
    std::size_t draws = 5, const ProbeOptions& options = {});

}  // namespace odescm
