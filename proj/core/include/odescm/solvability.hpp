#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "odescm/intervention.hpp"
#include "odescm/lee.hpp"

namespace odescm {

struct SolvabilityOptions {
  /// Sampled clamp values per target set.
  std::size_t draws = 5;
  LeeSolveOptions solve{};
  /// Seeds the clamp-value draws.
  std::uint64_t seed = 0;
  /// Base points and grid size of the degenerate-value scan.
  std::size_t scan_points = 3;
  std::size_t scan_grid = 64;
};

struct SolvabilitySummary {
  bool solvable = false;  // every draw unique
  std::vector<std::pair<Intervention, SolveResult>> draws;
};

/// solve_lee on intervene_lee(lee, I, xi) for every I in the family and
/// every sampled xi.
std::map<std::vector<std::size_t>, SolvabilitySummary> check_solvability(
    const Lee& lee, const std::vector<std::vector<std::size_t>>& family, const InterventionSampler& sampler,
    const SolvabilityOptions& options = {});

enum class StructuralVerdict { solvable, generic_only, refuted };

/// `solvable-w.r.t.-probes`, `generic only` or `refuted`.
std::string_view to_string(StructuralVerdict v);

struct LabelSolvability {
  std::vector<std::size_t> targets;  // I_i = pa_E(i) \ {i}
  StructuralVerdict verdict = StructuralVerdict::refuted;
  SolvabilitySummary sampled;
  /// Clamp value at which the own-block Jacobian of g_i is singular and the
  /// intervened equations are not uniquely solvable.
  std::optional<Intervention> degenerate;
  std::optional<SolveResult> degenerate_result;
};

struct StructuralSolvabilityReport {
  StructuralVerdict verdict = StructuralVerdict::solvable;
  std::vector<LabelSolvability> labels;  // one per block
};

/// For each label i, probes solvability w.r.t. the minimal I_i = pa_E(i)\{i}
/// at sampled clamp values, then scans for parent values where the
/// Jacobian of g_i in its own block is singular. A label whose sampled
/// solves are all unique but which fails at such a value is `generic only`.
/// Clamp labels are trivially solvable.
StructuralSolvabilityReport check_structural_solvability(const Lee& lee, const InterventionSampler& sampler,
                                                         const SolvabilityOptions& options = {});

/// Sampler drawing from the reference box of the Lee.
InterventionSampler default_xi_sampler(const Lee& lee);

}  // namespace odescm
