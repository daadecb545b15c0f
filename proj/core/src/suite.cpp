#include "odescm/suite.hpp"

#include <algorithm>
#include <cstdio>

#include "odescm/builtins.hpp"
#include "odescm/rng.hpp"

namespace odescm {

namespace {

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

std::string first_note(const std::vector<std::string>& notes) { return notes.empty() ? "" : notes.front(); }

}  // namespace

std::size_t SuiteReport::count(CheckOutcome c) const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [c](const SuiteRecord& r) { return r.outcome == c; }));
}

std::vector<SuiteModel> default_suite() {
  std::vector<SuiteModel> models;
  for (std::size_t d = 2; d <= 4; ++d) {
    const ModelSpec spec = builtin_mass_spring(MassSpringParams::uniform(d));
    std::vector<std::vector<std::size_t>> sets;
    for (std::size_t mask = 1; mask < (std::size_t{1} << d); ++mask) {
      std::vector<std::size_t> s;
      for (std::size_t b = 0; b < d; ++b) {
        if (mask & (std::size_t{1} << b)) s.push_back(b);
      }
      sets.push_back(std::move(s));
    }
    InterventionSampler sampler = box_sampler(spec.layout, mass_spring_intervention_box(spec));
    models.push_back({"mass-spring-D" + std::to_string(d), OdeSystem(spec), std::move(sets), std::move(sampler)});
  }
  const ModelSpec lv = builtin_lotka_volterra();
  Box xi_box = Box::around(lv.layout, lv.initial);
  xi_box.lower[1] = 1.5;
  xi_box.upper[1] = 4.0;
  models.push_back({"lotka-volterra", OdeSystem(lv), {{1}}, box_sampler(lv.layout, xi_box)});
  return models;
}

SuiteReport run_verification_suite(const std::vector<SuiteModel>& models, std::size_t interventions,
                                   std::uint64_t seed, VerifyOptions options) {
  SuiteReport report;
  for (std::size_t m = 0; m < models.size(); ++m) {
    const SuiteModel& model = models[m];
    if (model.target_sets.empty()) continue;
    VerifyOptions per = options;
    per.sampler = model.sampler;
    per.probe.seed = seed;
    per.solve.newton.seed = seed;
    per.solvability.seed = seed;
    const Lee lee = lee_from_ode(model.system);
    for (std::size_t k = 0; k < interventions; ++k) {
      Rng rng = Rng::stream(seed, m * 1000003ULL + k);
      const auto& targets = model.target_sets[rng.next() % model.target_sets.size()];
      const Intervention iv = model.sampler(targets, rng);
      const std::string label = iv.describe(model.system.layout());

      const Theorem1Report t1 = check_theorem1(model.system, iv, per);
      report.records.push_back({model.id, "theorem1", label, t1.outcome, t1.discrepancy, first_note(t1.notes)});
      const Lemma1Report l1 = check_lemma1(lee, iv, per);
      report.records.push_back({model.id, "lemma1", label, l1.outcome, l1.discrepancy, first_note(l1.notes)});
      const CommutationReport cd = check_commutative_diagram(model.system, iv, per, model.id);
      std::optional<double> max_disc;
      if (!cd.discrepancies.empty()) max_disc = cd.max_discrepancy;
      report.records.push_back({model.id, "diagram", label, cd.outcome, max_disc, first_note(cd.notes)});
    }
  }
  return report;
}

std::string to_text(const SuiteReport& report) {
  std::string out;
  char buf[64];
  for (const auto& r : report.records) {
    out += "check model=" + r.model + " name=" + r.check + " intervention=" + quoted(r.intervention) +
           " verdict=" + std::string(to_string(r.outcome));
    if (r.discrepancy) {
      std::snprintf(buf, sizeof buf, "%.3e", *r.discrepancy);
      out += " discrepancy=";
      out += buf;
    }
    if (!r.note.empty()) out += " note=" + quoted(r.note);
    out += '\n';
  }
  out += "summary checks=" + std::to_string(report.records.size()) +
         " pass=" + std::to_string(report.count(CheckOutcome::pass)) +
         " fail=" + std::to_string(report.count(CheckOutcome::fail)) +
         " precondition-unmet=" + std::to_string(report.count(CheckOutcome::precondition_unmet)) + '\n';
  return out;
}

}  // namespace odescm
