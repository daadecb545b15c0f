#include "odescm/stability.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "odescm/box.hpp"
#include "odescm/errors.hpp"
#include "odescm/parallel.hpp"

namespace odescm {

namespace {

double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

std::string format_state(const std::vector<double>& x) {
  std::string out = "(";
  char buf[32];
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.9g", x[i]);
    if (i) out += ", ";
    out += buf;
  }
  return out + ")";
}

Box pinned_box(const OdeSystem& sys) {
  Box box = Box::around(sys.layout(), sys.initial_state());
  for (std::size_t b = 0; b < sys.block_count(); ++b) {
    if (!sys.is_clamped(b)) continue;
    const auto& coords = sys.layout().blocks[b].coordinates;
    const auto& vals = *sys.clamp(b);
    for (std::size_t k = 0; k < coords.size(); ++k) box.lower[coords[k]] = box.upper[coords[k]] = vals[k];
  }
  return box;
}

}  // namespace

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::stable: return "stable-w.r.t.-probes";
    case Verdict::refuted: return "refuted";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "unknown";
}

InitSampler default_init_sampler(const OdeSystem& sys) {
  return [box = pinned_box(sys)](Rng& rng) { return box.sample(rng); };
}

StabilityReport probe_stability(const OdeSystem& sys, const ProbeOptions& options, const InitSampler& sampler) {
  if (options.trials < 2) throw InvalidArgument("stability probing needs at least two trials");
  const InitSampler draw = sampler ? sampler : default_init_sampler(sys);

  StabilityReport report;
  report.trials.resize(options.trials);
  for (std::size_t k = 0; k < options.trials; ++k) {
    Rng rng = Rng::stream(options.seed, k);
    report.trials[k].init = draw(rng);
  }
  parallel_for(
      options.trials,
      [&](std::size_t k) {
        Trial& trial = report.trials[k];
        try {
          trial.outcome = find_equilibrium_by_flow(sys, trial.init, options.flow);
        } catch (const EvalError& e) {
          trial.outcome.status = FlowStatus::diverged;
          trial.outcome.state = trial.init;
          trial.outcome.diagnostics.emplace_back(e.what());
        }
      },
      options.threads);

  bool any_timeout = false;
  for (std::size_t k = 0; k < report.trials.size(); ++k) {
    const auto& o = report.trials[k].outcome;
    if (o.status == FlowStatus::converged) continue;
    if (o.status == FlowStatus::timeout) {
      any_timeout = true;
      continue;
    }
    if (!report.witness) {
      report.witness = Witness{Witness::Kind::non_converging, k, k,
                               "start " + format_state(report.trials[k].init) + " is " +
                                   std::string(to_string(o.status))};
    }
  }

  std::optional<Witness> split;
  for (std::size_t a = 0; a < report.trials.size(); ++a) {
    if (report.trials[a].outcome.status != FlowStatus::converged) continue;
    for (std::size_t b = a + 1; b < report.trials.size(); ++b) {
      if (report.trials[b].outcome.status != FlowStatus::converged) continue;
      const double d = distance(report.trials[a].outcome.state, report.trials[b].outcome.state);
      if (d > report.max_distance) {
        report.max_distance = d;
        if (d >= options.match_tol) {
          split = Witness{Witness::Kind::multiple_limits, a, b,
                          "starts " + format_state(report.trials[a].init) + " and " +
                              format_state(report.trials[b].init) + " converge to " +
                              format_state(report.trials[a].outcome.state) + " and " +
                              format_state(report.trials[b].outcome.state)};
        }
      }
    }
  }
  if (!report.witness && split) report.witness = split;

  if (report.witness) {
    report.verdict = Verdict::refuted;
  } else if (any_timeout) {
    report.verdict = Verdict::inconclusive;
  } else {
    report.verdict = Verdict::stable;
  }
  return report;
}

std::map<std::vector<std::size_t>, InterventionalStability> probe_interventional_stability(
    const OdeSystem& sys, const std::vector<std::vector<std::size_t>>& family, const InterventionSampler& sampler,
    std::size_t draws, const ProbeOptions& options) {
  std::map<std::vector<std::size_t>, InterventionalStability> out;
  std::uint64_t set_index = 0;
  for (const auto& targets : family) {
    InterventionalStability entry;
    bool any_inconclusive = false;
    for (std::size_t d = 0; d < draws; ++d) {
      Rng rng = Rng::stream(options.seed ^ 0x5eedf00dULL, set_index * 1000003ULL + d);
      Intervention iv = sampler(targets, rng);
      const OdeSystem intervened = intervene_hard(sys, iv);
      ProbeOptions per = options;
      per.seed = options.seed + 7919 * (set_index * 1000003ULL + d + 1);
      StabilityReport report = probe_stability(intervened, per);
      if (report.verdict == Verdict::refuted) entry.verdict = Verdict::refuted;
      if (report.verdict == Verdict::inconclusive) any_inconclusive = true;
      entry.draws.emplace_back(std::move(iv), std::move(report));
    }
    if (entry.verdict != Verdict::refuted) entry.verdict = any_inconclusive ? Verdict::inconclusive : Verdict::stable;
    out[targets] = std::move(entry);
    ++set_index;
  }
  return out;
}

}  // namespace odescm
