#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "odescm/intervention.hpp"
#include "odescm/ode_system.hpp"
#include "odescm/verify.hpp"

namespace odescm {

/// A model entered into the verification suite.
struct SuiteModel {
  std::string id;
  OdeSystem system;
  /// Candidate target sets; each random intervention picks one.
  std::vector<std::vector<std::size_t>> target_sets;
  /// Clamp values for the interventions and the hypothesis probes.
  InterventionSampler sampler;
};

struct SuiteRecord {
  std::string model;
  std::string check;  // theorem1, lemma1, diagram
  std::string intervention;
  CheckOutcome outcome = CheckOutcome::fail;
  std::optional<double> discrepancy;
  std::string note;
};

struct SuiteReport {
  std::vector<SuiteRecord> records;
  std::size_t count(CheckOutcome c) const;
  /// True iff no record failed (precondition-unmet is not a failure).
  bool passed() const { return count(CheckOutcome::fail) == 0; }
};

/// Mass-spring chains with D = 2, 3, 4 (unit parameters, interventions on
/// any non-empty set of position blocks with zero momentum) and
/// Lotka-Volterra with do(X2 = xi), xi in (1.5, 4), where the intervened
/// system has the stable equilibrium (0, xi).
std::vector<SuiteModel> default_suite();

/// Runs theorem1, lemma1 and diagram checks on n random interventions per
/// model. Intervention k of model m draws from the stream (seed, m, k), so
/// the report is a pure function of the inputs.
SuiteReport run_verification_suite(const std::vector<SuiteModel>& models, std::size_t interventions,
                                   std::uint64_t seed, VerifyOptions options = {});

/// One `check ...` line per record followed by a `summary ...` line.
/// Numbers use %.3e.
std::string to_text(const SuiteReport& report);

}  // namespace odescm
