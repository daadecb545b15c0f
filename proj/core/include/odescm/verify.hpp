#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "odescm/flow.hpp"
#include "odescm/intervention.hpp"
#include "odescm/lee.hpp"
#include "odescm/ode_system.hpp"
#include "odescm/scm.hpp"
#include "odescm/solvability.hpp"
#include "odescm/stability.hpp"

namespace odescm {

enum class CheckOutcome { pass, fail, precondition_unmet };

/// `pass`, `fail` or `precondition-unmet`.
std::string_view to_string(CheckOutcome c);

struct VerifyOptions {
  /// Single tolerance for every numeric path agreement.
  double tol = 1e-6;
  FlowOptions flow{1e-10, 1e4};
  /// Stability probes used for hypotheses (fewer trials than a full probe).
  ProbeOptions probe{4, 0, 1e-5, {1e-8, 1e4}};
  std::size_t stability_draws = 2;
  LeeSolveOptions solve{};
  SolvabilityOptions solvability{3};
  /// Clamp values for hypothesis probes; defaults to the box around the
  /// initial state.
  InterventionSampler sampler{};
};

struct Theorem1Report {
  CheckOutcome outcome = CheckOutcome::fail;
  bool structural_equal = false;
  std::string intervened_lee;  // intervene_lee(lee_from_ode(sys), iv)
  std::string lee_of_intervened;  // lee_from_ode(intervene_hard(sys, iv))
  Verdict stability = Verdict::inconclusive;
  std::optional<EquilibriumOutcome> flow;
  std::optional<SolveResult> solve;
  std::optional<double> discrepancy;
  std::vector<std::string> notes;
};

/// (i) exact equality of the two equilibrium-equation sets; (ii) when the
/// intervened system probes as stable, its flow equilibrium must match the
/// unique solve within tol.
Theorem1Report check_theorem1(const OdeSystem& sys, const Intervention& iv, const VerifyOptions& options = {});

struct Lemma1Report {
  CheckOutcome outcome = CheckOutcome::fail;
  bool structural_equal = false;
  std::string intervened_scm;  // intervene_scm(M_E, iv)
  std::string scm_of_intervened;  // M_{E_do}
  std::optional<std::vector<double>> lee_solution;
  std::optional<std::vector<double>> scm_solution;
  std::optional<std::vector<double>> derived_solution;
  std::optional<double> discrepancy;
  std::vector<std::string> notes;
};

/// Requires both the Lee and the intervened Lee to be structurally
/// solvable (else precondition-unmet). (i) exact SCM equality; (ii) the
/// intervened Lee and both SCMs agree within tol when the Lee solve is unique.
Lemma1Report check_lemma1(const Lee& lee, const Intervention& iv, const VerifyOptions& options = {});

struct StructuralStabilityReport {
  Verdict verdict = Verdict::stable;
  /// Probed target set I_i = pa(i)\{i} for each block.
  std::vector<std::vector<std::size_t>> targets;
  std::map<std::vector<std::size_t>, InterventionalStability> probes;
};

/// For every block i, stability w.r.t. {pa(i)\{i}} at sampled clamp values.
StructuralStabilityReport probe_structural_stability(const OdeSystem& sys, const InterventionSampler& sampler,
                                                     const VerifyOptions& options = {});

struct PathResult {
  std::string status;
  std::optional<std::vector<double>> state;
};

struct CommutationReport {
  std::string model;
  std::string intervention;
  CheckOutcome outcome = CheckOutcome::fail;
  /// (a) flow of the intervened ODE, (b) solve of the intervened Lee,
  /// (c) solve of the intervened SCM, (d) solve of the SCM of the intervened Lee.
  PathResult a, b, c, d;
  /// Max-norm distances "ab", "ac", ... between paths that produced a state.
  std::vector<std::pair<std::string, double>> discrepancies;
  double max_discrepancy = 0.0;
  bool theorem1_equal = false;
  bool lemma1_equal = false;
  /// Whether the intervened ODE probed stable, making path (a) mandatory.
  bool flow_required = false;
  std::vector<std::string> notes;
};

/// Requires structural stability of the system and of the intervened
/// system (else precondition-unmet). Passes when paths (b), (c), (d) are
/// unique and agree within tol, path (a) too when the intervened system
/// probes stable, and both structural equalities hold.
CommutationReport check_commutative_diagram(const OdeSystem& sys, const Intervention& iv,
                                            const VerifyOptions& options = {}, std::string model_id = "model");

}  // namespace odescm
