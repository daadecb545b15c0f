#include "odescm/verify.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "odescm/errors.hpp"

namespace odescm {

namespace {

double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

InterventionSampler sampler_or_default(const OdeSystem& sys, const VerifyOptions& options) {
  if (options.sampler) return options.sampler;
  return box_sampler(sys.layout(), Box::around(sys.layout(), sys.initial_state()));
}

PathResult path_from(const SolveResult& r) {
  PathResult p{std::string(to_string(r.status)), r.solution};
  return p;
}

}  // namespace

std::string_view to_string(CheckOutcome c) {
  switch (c) {
    case CheckOutcome::pass: return "pass";
    case CheckOutcome::fail: return "fail";
    case CheckOutcome::precondition_unmet: return "precondition-unmet";
  }
  return "unknown";
}

Theorem1Report check_theorem1(const OdeSystem& sys, const Intervention& iv, const VerifyOptions& options) {
  Theorem1Report report;
  const OdeSystem intervened = intervene_hard(sys, iv);
  const Lee a = intervene_lee(lee_from_ode(sys), iv);
  const Lee b = lee_from_ode(intervened);
  report.intervened_lee = render(a);
  report.lee_of_intervened = render(b);
  report.structural_equal = a == b && report.intervened_lee == report.lee_of_intervened;

  const StabilityReport stability = probe_stability(intervened, options.probe);
  report.stability = stability.verdict;
  if (stability.verdict != Verdict::stable) {
    report.notes.push_back("equilibrium agreement skipped: intervened system is " +
                           std::string(to_string(stability.verdict)));
    report.outcome = report.structural_equal ? CheckOutcome::pass : CheckOutcome::fail;
    return report;
  }
  report.flow = find_equilibrium_by_flow(intervened, intervened.initial_state(), options.flow);
  report.solve = solve_lee(b, options.solve);
  bool agree = false;
  if (report.flow->status != FlowStatus::converged) {
    report.notes.push_back("flow from the initial state did not converge");
  } else if (report.solve->status != SolveStatus::unique) {
    report.notes.push_back("equilibrium equations are not uniquely solvable");
  } else {
    report.discrepancy = distance(report.flow->state, *report.solve->solution);
    agree = *report.discrepancy < options.tol;
  }
  report.outcome = report.structural_equal && agree ? CheckOutcome::pass : CheckOutcome::fail;
  return report;
}

Lemma1Report check_lemma1(const Lee& lee, const Intervention& iv, const VerifyOptions& options) {
  Lemma1Report report;
  const Lee intervened = intervene_lee(lee, iv);
  const InterventionSampler sampler = options.sampler ? options.sampler : default_xi_sampler(lee);
  const auto before = check_structural_solvability(lee, sampler, options.solvability);
  const auto after = check_structural_solvability(intervened, sampler, options.solvability);
  if (before.verdict != StructuralVerdict::solvable || after.verdict != StructuralVerdict::solvable) {
    report.outcome = CheckOutcome::precondition_unmet;
    report.notes.push_back("structural solvability: " + std::string(to_string(before.verdict)) + " before, " +
                           std::string(to_string(after.verdict)) + " after the intervention");
    return report;
  }

  const Scm scm_a = intervene_scm(build_scm(lee), iv);
  const Scm scm_b = build_scm(intervened);
  report.intervened_scm = render(scm_a);
  report.scm_of_intervened = render(scm_b);
  report.structural_equal = scm_a == scm_b && report.intervened_scm == report.scm_of_intervened;

  const SolveResult lee_solve = solve_lee(intervened, options.solve);
  bool agree = true;
  if (lee_solve.status == SolveStatus::unique) {
    const SolveResult sa = solve_scm(scm_a, options.solve);
    const SolveResult sb = solve_scm(scm_b, options.solve);
    report.lee_solution = lee_solve.solution;
    report.scm_solution = sa.solution;
    report.derived_solution = sb.solution;
    if (sa.status != SolveStatus::unique || sb.status != SolveStatus::unique) {
      agree = false;
      report.notes.push_back("SCM solve is not unique although the equilibrium equations are");
    } else {
      report.discrepancy = std::max({distance(*sa.solution, *lee_solve.solution),
                                     distance(*sb.solution, *lee_solve.solution),
                                     distance(*sa.solution, *sb.solution)});
      agree = *report.discrepancy < options.tol;
    }
  } else {
    report.notes.push_back("solution agreement skipped: intervened equations are " +
                           std::string(to_string(lee_solve.status)));
  }
  report.outcome = report.structural_equal && agree ? CheckOutcome::pass : CheckOutcome::fail;
  return report;
}

StructuralStabilityReport probe_structural_stability(const OdeSystem& sys, const InterventionSampler& sampler,
                                                     const VerifyOptions& options) {
  StructuralStabilityReport report;
  std::set<std::vector<std::size_t>> distinct;
  for (std::size_t b = 0; b < sys.block_count(); ++b) {
    std::vector<std::size_t> targets;
    for (std::size_t p : sys.parents(b)) {
      if (p != b) targets.push_back(p);
    }
    distinct.insert(targets);
    report.targets.push_back(std::move(targets));
  }
  const std::vector<std::vector<std::size_t>> family(distinct.begin(), distinct.end());
  report.probes = probe_interventional_stability(sys, family, sampler, options.stability_draws, options.probe);
  bool any_inconclusive = false;
  for (const auto& [targets, entry] : report.probes) {
    if (entry.verdict == Verdict::refuted) report.verdict = Verdict::refuted;
    if (entry.verdict == Verdict::inconclusive) any_inconclusive = true;
  }
  if (report.verdict != Verdict::refuted && any_inconclusive) report.verdict = Verdict::inconclusive;
  return report;
}

CommutationReport check_commutative_diagram(const OdeSystem& sys, const Intervention& iv,
                                            const VerifyOptions& options, std::string model_id) {
  CommutationReport report;
  report.model = std::move(model_id);
  report.intervention = iv.describe(sys.layout());
  const OdeSystem intervened = intervene_hard(sys, iv);

  const InterventionSampler sampler = sampler_or_default(sys, options);
  const auto before = probe_structural_stability(sys, sampler, options);
  if (before.verdict != Verdict::stable) {
    report.outcome = CheckOutcome::precondition_unmet;
    report.notes.push_back("system is not structurally stable w.r.t. probes (" +
                           std::string(to_string(before.verdict)) + ")");
    return report;
  }
  const auto after = probe_structural_stability(intervened, sampler, options);
  if (after.verdict != Verdict::stable) {
    report.outcome = CheckOutcome::precondition_unmet;
    report.notes.push_back("intervened system is not structurally stable w.r.t. probes (" +
                           std::string(to_string(after.verdict)) + ")");
    return report;
  }

  const Lee lee = lee_from_ode(sys);
  const Lee lee_b = intervene_lee(lee, iv);
  const Lee lee_d = lee_from_ode(intervened);
  report.theorem1_equal = lee_b == lee_d && render(lee_b) == render(lee_d);
  const Scm scm_c = intervene_scm(build_scm(lee), iv);
  const Scm scm_d = build_scm(lee_d);
  report.lemma1_equal = scm_c == scm_d && render(scm_c) == render(scm_d);

  report.flow_required = probe_stability(intervened, options.probe).verdict == Verdict::stable;
  const EquilibriumOutcome flow = find_equilibrium_by_flow(intervened, intervened.initial_state(), options.flow);
  report.a.status = std::string(to_string(flow.status));
  if (flow.status == FlowStatus::converged) report.a.state = flow.state;
  report.b = path_from(solve_lee(lee_b, options.solve));
  report.c = path_from(solve_scm(scm_c, options.solve));
  report.d = path_from(solve_scm(scm_d, options.solve));

  bool ok = report.theorem1_equal && report.lemma1_equal;
  if (!report.b.state || !report.c.state || !report.d.state) {
    ok = false;
    report.notes.push_back("an algebraic path has no unique solution");
  }
  if (report.flow_required && !report.a.state) {
    ok = false;
    report.notes.push_back("intervened system probes stable but the flow did not converge");
  }
  const std::pair<const char*, const PathResult*> paths[] = {
      {"a", &report.a}, {"b", &report.b}, {"c", &report.c}, {"d", &report.d}};
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i + 1; j < 4; ++j) {
      if (!paths[i].second->state || !paths[j].second->state) continue;
      if (i == 0 && !report.flow_required) continue;
      const double dist = distance(*paths[i].second->state, *paths[j].second->state);
      report.discrepancies.emplace_back(std::string(paths[i].first) + paths[j].first, dist);
      report.max_discrepancy = std::max(report.max_discrepancy, dist);
      if (!(dist < options.tol)) ok = false;
    }
  }
  report.outcome = ok ? CheckOutcome::pass : CheckOutcome::fail;
  return report;
}

}  // namespace odescm
