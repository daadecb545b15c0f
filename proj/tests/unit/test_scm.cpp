#include <cmath>

#include "catch.hpp"
#include "generators.hpp"
#include "odescm/builtins.hpp"
#include "odescm/errors.hpp"
#include "odescm/scm.hpp"
#include "oracles.hpp"

using namespace odescm;

namespace {

OdeSystem lv() { return OdeSystem(builtin_lotka_volterra()); }

OdeSystem chain(std::size_t d) { return OdeSystem(builtin_mass_spring(MassSpringParams::uniform(d))); }

Scm chain_scm(const MassSpringParams& p) { return build_scm(lee_from_ode(OdeSystem(builtin_mass_spring(p)))); }

// Scalar blocks: X relaxes towards Y through a cubic, Y follows X linearly.
const char* kCubic =
    "param a = 0.5\n"
    "var X in (-inf,inf)\n"
    "var Y in (-inf,inf)\n"
    "dyn X = Y - X^3 - X\n"
    "dyn Y = a * X - Y + 1\n"
    "init X = 0\n"
    "init Y = 0\n";

// Root of y - x^3 - x = 0 by bisection, independent of the library solver.
double cubic_root(double y) {
  double lo = -10.0, hi = 10.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (y - mid * mid * mid - mid > 0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Position of mass i (1-based) balancing its two springs with neighbours held fixed.
double balance(const MassSpringParams& p, std::size_t i, double left, double right) {
  const double kl = p.springs[i - 1], kr = p.springs[i];
  return (kr * (right - p.lengths[i]) + kl * (left + p.lengths[i - 1])) / (kr + kl);
}

MassSpringParams random_chain(Rng& rng, std::size_t d) {
  MassSpringParams p = MassSpringParams::uniform(d);
  for (double& k : p.springs) k = rng.uniform(0.5, 3.0);
  for (double& l : p.lengths) l = rng.uniform(0.5, 1.5);
  for (double& m : p.masses) m = rng.uniform(0.5, 2.0);
  double sum = 0.0;
  for (double l : p.lengths) sum += l;
  p.wall = sum;
  return p;
}

}  // namespace

TEST_CASE("two masses: the first mechanism centres between the wall and the second mass") {
  const Scm scm = build_scm(lee_from_ode(chain(2)));
  CHECK(scm.mechanism(0).kind == MechanismKind::closed_form);
  CHECK(to_string(scm.mechanism(0).kind) == "closed-form");
  CHECK(scm.mechanism(0).parents == std::vector<std::size_t>{1});
  const std::vector<double> at3{0, 0, 3, 0};
  CHECK(eval_mechanism(scm, 0, at3) == std::vector<double>{1.5, 0.0});
  const std::vector<double> at2{0, 0, 2, 0};
  CHECK(eval_mechanism(scm, 0, at2) == std::vector<double>{1.0, 0.0});
}

TEST_CASE("prey mechanism under a large predator clamp is extinction") {
  const Scm scm = build_scm(lee_from_ode(lv()));
  const std::vector<double> x{0.7, 2.0};
  const auto h = eval_mechanism(scm, 0, x);
  REQUIRE(h.size() == 1);
  CHECK(std::abs(h[0]) == 0.0);
}

TEST_CASE("prey mechanism is degenerate where the predator matches the prey growth rate") {
  const Scm scm = build_scm(lee_from_ode(lv()));
  const std::vector<double> x{0.3, 1.0};
  CHECK_THROWS_AS(eval_mechanism(scm, 0, x), DegenerateMechanism);
}

// The balance of mass i divides by the stiffness of its own two springs,
// k_{i-1} on the left and k_i on the right. A denominator of k_i + k_{i+1}
// would mix in a spring that does not touch mass i; with unequal springs
// that value no longer balances the forces.
TEST_CASE("mass-spring mechanism denominator uses the springs attached to the mass") {
  MassSpringParams p = MassSpringParams::uniform(3);
  p.springs = {1.0, 2.0, 5.0, 0.5};
  p.wall = 4.0;
  const Scm scm = chain_scm(p);
  const double left = 0.8, right = 3.1;
  const std::vector<double> x{left, 0.0, 2.0, 0.0, right, 0.0};
  const double h = eval_mechanism(scm, 1, x)[0];

  const double k1 = p.springs[1], k2 = p.springs[2];
  const double attached = (k2 * (right - p.lengths[2]) + k1 * (left + p.lengths[1])) / (k2 + k1);
  const double k3 = p.springs[3];
  const double shifted = (k2 * (right - p.lengths[2]) + k1 * (left + p.lengths[1])) / (k2 + k3);

  auto net_force = [&](double q) { return k2 * (right - q - p.lengths[2]) - k1 * (q - left - p.lengths[1]); };
  CHECK(h == Catch::Approx(attached).epsilon(1e-14));
  CHECK(std::abs(net_force(h)) < 1e-12);
  CHECK(std::abs(net_force(shifted)) > 1e-2);
}

TEST_CASE("mass-spring mechanisms match the balance formula on random chains") {
  Rng rng(61);
  for (int n = 0; n < 30; ++n) {
    const std::size_t d = 2 + n % 4;
    const MassSpringParams p = random_chain(rng, d);
    const Scm scm = chain_scm(p);
    const Layout& layout = scm.layout();
    for (int s = 0; s < 5; ++s) {
      const std::vector<double> x = testing::random_point(layout, rng, 0.0, p.wall);
      for (std::size_t i = 1; i <= d; ++i) {
        const double left = i == 1 ? 0.0 : x[2 * (i - 2)];
        const double right = i == d ? p.wall : x[2 * i];
        const auto h = eval_mechanism(scm, i - 1, x);
        CHECK(h[0] == Catch::Approx(balance(p, i, left, right)).epsilon(1e-12).margin(1e-12));
        CHECK(h[1] == 0.0);
      }
    }
  }
}

TEST_CASE("mechanisms never list their own block as a parent") {
  Rng rng(62);
  auto check = [](const Scm& scm) {
    for (std::size_t b = 0; b < scm.size(); ++b) {
      const auto& pa = scm.mechanism(b).parents;
      CHECK(std::find(pa.begin(), pa.end(), b) == pa.end());
    }
    CHECK_FALSE(scm_parent_graph(scm).any_self_loop());
    CHECK_FALSE(scm_graph(scm).any_self_loop());
  };
  check(build_scm(lee_from_ode(lv())));
  for (std::size_t d = 1; d <= 4; ++d) check(build_scm(lee_from_ode(chain(d))));
  for (int n = 0; n < 60; ++n) {
    const OdeSystem sys(testing::random_model(rng, 2));
    const Scm scm = build_scm(lee_from_ode(sys));
    check(scm);
    check(intervene_scm(scm, testing::random_intervention(sys.layout(), rng)));
  }
}

TEST_CASE("implicit mechanisms solve the block equation") {
  const OdeSystem sys(parse_model(kCubic));
  const Scm scm = build_scm(lee_from_ode(sys));
  REQUIRE(scm.mechanism(0).kind == MechanismKind::implicit);
  REQUIRE(scm.mechanism(1).kind == MechanismKind::closed_form);
  CHECK(render(scm).find("X[X] = implicit root of: ") == 0);
  Rng rng(63);
  for (int n = 0; n < 200; ++n) {
    const double y = rng.uniform(-4, 4), x = rng.uniform(-2, 2);
    const std::vector<double> state{x, y};
    const double hx = eval_mechanism(scm, 0, state)[0];
    CHECK(std::abs(y - hx * hx * hx - hx) < 1e-9);
    CHECK(std::abs(hx - cubic_root(y)) < 1e-8);
    const double hy = eval_mechanism(scm, 1, state)[0];
    CHECK(std::abs(0.5 * x - hy + 1) < 1e-9);
    CHECK(std::abs(hy - (0.5 * x + 1)) < 1e-8);
  }
}

TEST_CASE("closed-form mechanisms are roots of their labeled equations") {
  Rng rng(64);
  const OdeSystem sys = chain(4);
  const Lee lee = lee_from_ode(sys);
  const Scm scm = build_scm(lee);
  std::map<std::string, double> params;
  for (const auto& p : sys.layout().parameters) params[p.name] = p.value;
  for (int n = 0; n < 200; ++n) {
    std::vector<double> x = testing::random_point(sys.layout(), rng, 0.0, 5.0);
    const std::size_t b = rng.next() % 4;
    const auto h = eval_mechanism(scm, b, x);
    const auto& coords = sys.layout().blocks[b].coordinates;
    for (std::size_t k = 0; k < coords.size(); ++k) x[coords[k]] = h[k];
    std::map<std::string, double> vars;
    for (std::size_t i = 0; i < x.size(); ++i) vars[sys.layout().variables[i].name] = x[i];
    for (const Expr& e : lee.residual_exprs(b)) CHECK(std::abs(eval_expr(e, make_valuation(vars, params))) < 1e-9);
  }
}

TEST_CASE("intervening replaces mechanisms with parentless clamps") {
  const Scm scm = build_scm(lee_from_ode(chain(4)));
  const Scm done = intervene_scm(scm, parse_intervention(scm.layout(), "Q2=3"));
  CHECK(done.mechanism(1).kind == MechanismKind::clamp);
  CHECK(done.mechanism(1).parents.empty());
  CHECK(done.mechanism(1).values == std::vector<double>{3.0, 0.0});
  for (std::size_t b : {0u, 2u, 3u}) CHECK(done.mechanism(b) == scm.mechanism(b));
  CHECK(intervene_scm(scm, Intervention()) == scm);
  const Digraph g = scm_graph(done);
  CHECK_FALSE(g.has_edge(0, 1));
  CHECK_FALSE(g.has_edge(2, 1));
  CHECK(g.has_edge(1, 0));
  CHECK(g.has_edge(1, 2));
}

TEST_CASE("solving the two-mass SCM") {
  const Scm scm = build_scm(lee_from_ode(chain(2)));
  const SolveResult r = solve_scm(scm);
  REQUIRE(r.status == SolveStatus::unique);
  CHECK(testing::max_distance(*r.solution, {1, 0, 2, 0}) < 1e-10);
  const SolveResult c = solve_scm(intervene_scm(scm, Intervention().set(1, {3.0, 0.0})));
  REQUIRE(c.status == SolveStatus::unique);
  CHECK(*c.solution == std::vector<double>{1.5, 0.0, 3.0, 0.0});
}

TEST_CASE("the chain SCM graph links neighbours both ways") {
  const Digraph g = scm_graph(build_scm(lee_from_ode(chain(4))));
  const std::vector<std::pair<std::size_t, std::size_t>> want{{0, 1}, {1, 0}, {1, 2}, {2, 1}, {2, 3}, {3, 2}};
  auto edges = g.edges;
  std::sort(edges.begin(), edges.end());
  CHECK(edges == want);
  CHECK(g.nodes == std::vector<std::string>{"X1", "X2", "X3", "X4"});
}

TEST_CASE("predator-prey SCM has no effective edges") {
  const Scm scm = build_scm(lee_from_ode(lv()));
  CHECK(scm_graph(scm).edges.empty());
  CHECK(scm_parent_graph(scm).has_edge(1, 0));
}

TEST_CASE("a system of constants induces constant mechanisms") {
  const OdeSystem sys(parse_model("var X in (-inf,inf)\nvar Y in (-inf,inf)\ndyn X = 2 - X\ndyn Y = -Y\ninit X = 0\ninit Y = 0\n"));
  const Scm scm = build_scm(lee_from_ode(sys));
  CHECK(scm.mechanism(0).parents.empty());
  CHECK(scm.mechanism(1).parents.empty());
  CHECK(render(scm) == "X[X] = 2\nX[Y] = 0\n");
  CHECK(scm_graph(scm).edges.empty());
}

TEST_CASE("SCM of the intervened equations equals the intervened SCM") {
  Rng rng(65);
  for (int n = 0; n < 50; ++n) {
    const OdeSystem sys = n % 5 == 0 ? lv() : chain(2 + n % 3);
    const Lee lee = lee_from_ode(sys);
    const Intervention iv = box_sampler(sys.layout(), Box::around(sys.layout(), sys.initial_state()))(
        testing::random_targets(sys.block_count(), rng), rng);
    const Scm a = intervene_scm(build_scm(lee), iv);
    const Scm b = build_scm(intervene_lee(lee, iv));
    CHECK(a == b);
    CHECK(render(a) == render(b));
  }
  for (int n = 0; n < 50; ++n) {
    const OdeSystem sys(testing::random_model(rng, 2));
    const Lee lee = lee_from_ode(sys);
    const Intervention iv = testing::random_intervention(sys.layout(), rng);
    CHECK(intervene_scm(build_scm(lee), iv) == build_scm(intervene_lee(lee, iv)));
  }
}

TEST_CASE("equation and SCM solutions coincide when unique") {
  Rng rng(66);
  int compared = 0;
  for (int n = 0; n < 30; ++n) {
    const OdeSystem sys = n % 3 == 0 ? OdeSystem(parse_model(kCubic)) : chain(2 + n % 3);
    Intervention iv;
    if (n % 2 == 1) {
      const std::size_t b = rng.next() % sys.block_count();
      std::vector<double> v(sys.layout().blocks[b].coordinates.size(), 0.0);
      v[0] = rng.uniform(0.5, 2.5);
      iv.set(b, v);
    }
    const Lee lee = intervene_lee(lee_from_ode(sys), iv);
    const SolveResult e = solve_lee(lee);
    const SolveResult m = solve_scm(build_scm(lee));
    if (e.status != SolveStatus::unique || m.status != SolveStatus::unique) continue;
    CHECK(testing::max_distance(*e.solution, *m.solution) < 1e-8);
    ++compared;
  }
  CHECK(compared >= 25);
}

TEST_CASE("acyclic SCMs are solved by substitution to rounding error") {
  const Scm scm = build_scm(lee_from_ode(chain(3)));
  const Scm done = intervene_scm(scm, parse_intervention(scm.layout(), "Q2=2.5"));
  const SolveResult r = solve_scm(done);
  REQUIRE(r.status == SolveStatus::unique);
  CHECK(r.starts == 1);
  CHECK(scm_residual(done, *r.solution) < 1e-12);
  CHECK(testing::max_distance(*r.solution, testing::chain_equilibrium({{1, 1, 1, 1}, {1, 1, 1, 1}, 4.0}, {{1, 2.5}})) <
        1e-12);
}

TEST_CASE("derivation refuses systems that are not structurally solvable") {
  const Lee lee = lee_from_ode(lv());
  CHECK_THROWS_AS(derive_scm(lee), SolvabilityRefused);
  DeriveOptions o;
  o.force = true;
  const Derivation d = derive_scm(lee, o);
  CHECK_FALSE(d.warnings.empty());
  CHECK(d.scm == build_scm(lee));
  const Derivation ok = derive_scm(lee_from_ode(chain(3)));
  CHECK(ok.solvability.verdict == StructuralVerdict::solvable);
  CHECK(ok.warnings.empty());
}
