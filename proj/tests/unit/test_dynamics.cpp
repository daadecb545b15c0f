#include <cmath>

#include "catch.hpp"
#include "generators.hpp"
#include "odescm/builtins.hpp"
#include "odescm/flow.hpp"
#include "odescm/integrator.hpp"
#include "odescm/stability.hpp"
#include "oracles.hpp"

using namespace odescm;

namespace {

OdeSystem decay() { return OdeSystem(parse_model("var X in (-inf,inf)\ndyn X = -X\ninit X = 1\n")); }

OdeSystem lv(double a = 0.5, double b = 0.5) { return OdeSystem(builtin_lotka_volterra({1, 1, 1, 1, a, b})); }

OdeSystem chain(std::size_t d) { return OdeSystem(builtin_mass_spring(MassSpringParams::uniform(d))); }

bool same_trials(const StabilityReport& a, const StabilityReport& b) {
  if (a.verdict != b.verdict || a.trials.size() != b.trials.size()) return false;
  for (std::size_t k = 0; k < a.trials.size(); ++k) {
    if (a.trials[k].init != b.trials[k].init || a.trials[k].outcome.state != b.trials[k].outcome.state) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("linear decay matches the closed form") {
  const OdeSystem sys = decay();
  const Trajectory t = integrate(sys, sys.initial_state(), 5.0);
  CHECK(t.reason == Termination::reached_end);
  CHECK(t.times.back() == 5.0);
  CHECK(std::abs(t.states.back()[0] - std::exp(-5.0)) < 1e-7);
}

TEST_CASE("dense output at requested sample times") {
  const OdeSystem sys = decay();
  IntegratorOptions o;
  for (int i = 0; i <= 40; ++i) o.sample_times.push_back(0.125 * i);
  const Trajectory t = integrate(sys, sys.initial_state(), 5.0, o);
  REQUIRE(t.times.size() == 41);
  for (std::size_t i = 0; i < t.times.size(); ++i) {
    CHECK(t.times[i] == 0.125 * static_cast<double>(i));
    CHECK(std::abs(t.states[i][0] - std::exp(-t.times[i])) < 1e-7);
  }
}

TEST_CASE("fifth-order convergence under step halving") {
  const OdeSystem sys = decay();
  std::vector<double> log_h, log_err;
  for (double h : {0.2, 0.1, 0.05, 0.025}) {
    IntegratorOptions o;
    o.fixed_step = h;
    const Trajectory t = integrate(sys, sys.initial_state(), 1.0, o);
    log_h.push_back(std::log(h));
    log_err.push_back(std::log(std::abs(t.states.back()[0] - std::exp(-1.0))));
  }
  const double n = static_cast<double>(log_h.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < log_h.size(); ++i) {
    sx += log_h[i];
    sy += log_err[i];
    sxx += log_h[i] * log_h[i];
    sxy += log_h[i] * log_err[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double ratio = std::pow(2.0, slope);
  INFO("slope " << slope);
  CHECK(ratio >= 16.0);
  CHECK(ratio <= 64.0);
}

TEST_CASE("trajectory CSV layout") {
  const OdeSystem sys = decay();
  IntegratorOptions o;
  o.sample_times = {0.0, 1.0};
  const std::string csv = trajectory_csv(integrate(sys, sys.initial_state(), 1.0, o), sys.layout());
  CHECK(csv.rfind("t,X\n0,1\n1,0.36787944", 0) == 0);
  CHECK(csv.find("\n# terminated: reached_end\n") != std::string::npos);
}

TEST_CASE("predator-prey orbit stays bounded and does not settle") {
  const OdeSystem sys = lv();
  const Trajectory t = integrate(sys, sys.initial_state(), 50.0);
  double lo = 1e300, hi = -1e300;
  for (const auto& x : t.states) {
    lo = std::min(lo, std::min(x[0], x[1]));
    hi = std::max(hi, std::max(x[0], x[1]));
  }
  CHECK(lo > 0.1);
  CHECK(hi < 5.0);
  FlowOptions f;
  f.t_max = 50.0;
  CHECK(find_equilibrium_by_flow(sys, sys.initial_state(), f).status == FlowStatus::oscillating);
}

TEST_CASE("two masses relax to the force-balance positions") {
  const OdeSystem sys = chain(2);
  const std::vector<double> x0{0.5, 0.0, 2.5, 0.0};
  const Trajectory t = integrate(sys, x0, 200.0);
  const auto want = testing::chain_equilibrium({{1, 1, 1}, {1, 1, 1}, 3.0});
  CHECK(testing::max_distance(t.states.back(), want) < 1e-6);
}

TEST_CASE("targeted coordinates are bit-constant along trajectories") {
  Rng rng(41);
  for (int n = 0; n < 20; ++n) {
    const OdeSystem sys(testing::random_model(rng, 2));
    const Intervention iv = testing::random_intervention(sys.layout(), rng);
    const OdeSystem done = intervene_hard(sys, iv);
    IntegratorOptions o;
    o.max_steps = 20000;
    const Trajectory t = integrate(done, done.initial_state(), 2.0, o);
    for (const auto& x : t.states) {
      for (std::size_t b : iv.target_set()) {
        const auto& coords = sys.layout().blocks[b].coordinates;
        for (std::size_t i = 0; i < coords.size(); ++i) CHECK(x[coords[i]] == iv.values(b)[i]);
      }
    }
  }
}

TEST_CASE("blow-up is reported as divergence") {
  const OdeSystem sys(parse_model("var X in (-inf,inf)\ndyn X = X^2\ninit X = 1\n"));
  CHECK(integrate(sys, sys.initial_state(), 2.0).reason == Termination::diverged);
  CHECK(find_equilibrium_by_flow(sys, sys.initial_state()).status == FlowStatus::diverged);
}

TEST_CASE("clamping the predator above the prey growth rate drives the prey out") {
  const OdeSystem sys = intervene_hard(lv(1, 2), Intervention().set(1, {2.0}));
  const EquilibriumOutcome e = find_equilibrium_by_flow(sys, sys.initial_state());
  REQUIRE(e.status == FlowStatus::converged);
  CHECK(std::abs(e.state[0]) < 1e-6);
  CHECK(e.state[1] == 2.0);
}

TEST_CASE("zero dynamics converge immediately") {
  const OdeSystem sys(parse_model("var X in (-inf,inf)\ndyn X = 0\ninit X = 3\n"));
  const EquilibriumOutcome e = find_equilibrium_by_flow(sys, sys.initial_state());
  CHECK(e.status == FlowStatus::converged);
  CHECK(e.state == std::vector<double>{3.0});
  CHECK(e.time == 0.0);
}

TEST_CASE("a converged flow has a small residual when re-evaluated") {
  Rng rng(42);
  for (int n = 0; n < 20; ++n) {
    MassSpringParams p = MassSpringParams::uniform(2 + n % 3);
    for (double& m : p.masses) m = rng.uniform(0.5, 2);
    for (double& k : p.springs) k = rng.uniform(0.5, 2);
    for (double& b : p.frictions) b = rng.uniform(0.5, 2);
    const OdeSystem sys(builtin_mass_spring(p));
    FlowOptions f;
    f.t_max = 1e4;
    const EquilibriumOutcome e = find_equilibrium_by_flow(sys, sys.initial_state(), f);
    REQUIRE(e.status == FlowStatus::converged);
    double r = 0.0;
    for (double v : sys.drift(e.state)) r = std::max(r, std::abs(v));
    CHECK(r < f.eq_tol);
  }
}

TEST_CASE("predator-prey is refuted by an oscillating start") {
  const StabilityReport r = probe_stability(lv());
  CHECK(r.verdict == Verdict::refuted);
  REQUIRE(r.witness);
  CHECK(r.witness->kind == Witness::Kind::non_converging);
  CHECK(r.trials[r.witness->first].outcome.status == FlowStatus::oscillating);
}

TEST_CASE("the damped chain is stable with respect to probes") {
  const StabilityReport r = probe_stability(chain(4));
  CHECK(r.verdict == Verdict::stable);
  CHECK(r.trials.size() == 20);
  CHECK(r.max_distance < 1e-5);
}

TEST_CASE("clamping the predator at the prey growth rate leaves a family of equilibria") {
  const OdeSystem sys = intervene_hard(lv(), Intervention().set(1, {1.0}));
  const StabilityReport r = probe_stability(sys);
  CHECK(r.verdict == Verdict::refuted);
  REQUIRE(r.witness);
  CHECK(r.witness->kind == Witness::Kind::multiple_limits);
  const auto& a = r.trials[r.witness->first].outcome.state;
  const auto& b = r.trials[r.witness->second].outcome.state;
  CHECK(a[1] == 1.0);
  CHECK(b[1] == 1.0);
  CHECK(std::abs(a[0] - b[0]) > 1e-5);
}

TEST_CASE("probe reports are reproducible and independent of the thread count") {
  ProbeOptions o;
  o.trials = 8;
  o.seed = 99;
  o.threads = 1;
  const StabilityReport one = probe_stability(chain(3), o);
  const StabilityReport again = probe_stability(chain(3), o);
  o.threads = 4;
  const StabilityReport four = probe_stability(chain(3), o);
  CHECK(same_trials(one, again));
  CHECK(same_trials(one, four));
  o.seed = 100;
  CHECK(probe_stability(chain(3), o).trials[0].init != one.trials[0].init);
}

TEST_CASE("default starts pin clamped blocks") {
  const OdeSystem sys = intervene_hard(chain(3), parse_intervention(chain(3).layout(), "Q2=2.5"));
  const InitSampler sampler = default_init_sampler(sys);
  Rng rng(5);
  for (int n = 0; n < 20; ++n) {
    const auto x = sampler(rng);
    CHECK(x[2] == 2.5);
    CHECK(x[3] == 0.0);
  }
}

TEST_CASE("the chain stays stable under any set of position clamps") {
  const OdeSystem sys = chain(4);
  std::vector<std::vector<std::size_t>> family;
  for (std::size_t mask = 1; mask < 16; ++mask) {
    std::vector<std::size_t> s;
    for (std::size_t b = 0; b < 4; ++b) {
      if (mask & (1u << b)) s.push_back(b);
    }
    family.push_back(s);
  }
  ProbeOptions o;
  o.trials = 6;
  const auto result =
      probe_interventional_stability(sys, family, box_sampler(sys.layout(), mass_spring_intervention_box(sys.spec())),
                                     2, o);
  REQUIRE(result.size() == family.size());
  for (const auto& [targets, entry] : result) {
    CHECK(entry.verdict == Verdict::stable);
    CHECK(entry.draws.size() == 2);
  }
}

TEST_CASE("predator-prey is stable under generic predator clamps") {
  const OdeSystem sys = lv();
  Box box = Box::around(sys.layout(), sys.initial_state());
  box.lower[1] = 1.5;
  box.upper[1] = 4.0;
  ProbeOptions o;
  o.trials = 8;
  const auto result = probe_interventional_stability(sys, {{1}}, box_sampler(sys.layout(), box), 3, o);
  CHECK(result.at({1}).verdict == Verdict::stable);
  CHECK(probe_interventional_stability(sys, {}, box_sampler(sys.layout(), box)).empty());
}
