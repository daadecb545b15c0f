#include <algorithm>
#include <cmath>
#include <set>

#include "catch.hpp"
#include "generators.hpp"
#include "odescm/builtins.hpp"
#include "odescm/errors.hpp"
#include "odescm/newton.hpp"
#include "odescm/ode_system.hpp"
#include "odescm/spectrum.hpp"

using namespace odescm;

namespace {

OdeSystem lv(double th11 = 1, double th12 = 1, double th21 = 1, double th22 = 1) {
  return OdeSystem(builtin_lotka_volterra({th11, th12, th21, th22, 0.5, 0.5}));
}

OdeSystem chain(std::size_t d) { return OdeSystem(builtin_mass_spring(MassSpringParams::uniform(d))); }

std::size_t node(const Digraph& g, const std::string& name) {
  return static_cast<std::size_t>(std::find(g.nodes.begin(), g.nodes.end(), name) - g.nodes.begin());
}

// The graph of `g` with every edge into a target and every target self-loop removed.
Digraph cut_into(const Digraph& g, const std::vector<std::size_t>& targets) {
  Digraph out = g;
  auto targeted = [&](std::size_t n) { return std::find(targets.begin(), targets.end(), n) != targets.end(); };
  out.edges.clear();
  for (const auto& e : g.edges) {
    if (!targeted(e.second)) out.edges.push_back(e);
  }
  for (std::size_t t : targets) out.self_loops[t] = false;
  return out;
}

}  // namespace

TEST_CASE("predator-prey blocks are mutual parents with self-loops") {
  const OdeSystem sys = lv();
  CHECK(sys.parents(0) == std::vector<std::size_t>{0, 1});
  CHECK(sys.parents(1) == std::vector<std::size_t>{0, 1});
  const Digraph g = block_graph(sys);
  CHECK(g.has_edge(0, 1));
  CHECK(g.has_edge(1, 0));
  CHECK(g.has_self_loop(0));
  CHECK(g.has_self_loop(1));
  CHECK(to_dot(g, "ode") ==
        "digraph \"ode\" {\n  \"X1\";\n  \"X2\";\n  \"X1\" -> \"X1\";\n  \"X1\" -> \"X2\";\n  \"X2\" -> \"X1\";\n"
        "  \"X2\" -> \"X2\";\n}\n");
}

TEST_CASE("mass-spring coordinate graph couples each position to neighbouring momenta") {
  const OdeSystem sys = chain(4);
  const Digraph g = coordinate_graph(sys);
  std::set<std::pair<std::string, std::string>> want;
  for (int i = 1; i <= 4; ++i) {
    const std::string q = "Q" + std::to_string(i), p = "P" + std::to_string(i);
    want.insert({q, p});
    want.insert({p, q});
    if (i > 1) want.insert({q, "P" + std::to_string(i - 1)});
    if (i < 4) want.insert({q, "P" + std::to_string(i + 1)});
  }
  std::set<std::pair<std::string, std::string>> got;
  for (const auto& [from, to] : g.edges) got.insert({g.nodes[from], g.nodes[to]});
  CHECK(got == want);
  // friction makes every momentum its own parent; positions never are
  for (int i = 1; i <= 4; ++i) {
    CHECK(g.has_self_loop(node(g, "P" + std::to_string(i))));
    CHECK_FALSE(g.has_self_loop(node(g, "Q" + std::to_string(i))));
  }
}

TEST_CASE("mass-spring block graph is a bidirected chain") {
  const Digraph g = block_graph(chain(4));
  CHECK(g.edges == std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {1, 0}, {1, 2}, {2, 1}, {2, 3}, {3, 2}});
}

TEST_CASE("constant dynamics have no parents") {
  const OdeSystem sys(parse_model("var X in (-inf,inf)\ndyn X = 1\ninit X = 0\n"));
  CHECK(sys.parents(0).empty());
  CHECK_FALSE(block_graph(sys).has_self_loop(0));
}

TEST_CASE("drift examples") {
  CHECK(lv().drift(std::vector<double>{1, 1}) == std::vector<double>{0, 0});
  CHECK(lv().drift(std::vector<double>{0, 0}) == std::vector<double>{0, 0});
  CHECK(chain(2).drift(std::vector<double>{1, 0, 2, 0}) == std::vector<double>{0, 0, 0, 0});
}

TEST_CASE("syntactic parents that never change the dynamics are flagged") {
  const OdeSystem sys(parse_model("var X in (-inf,inf)\nvar Y in (-inf,inf)\ndyn X = Y - Y\ndyn Y = -Y\n"
                                  "init X = 0\ninit Y = 1\n"));
  CHECK(sys.parents(0) == std::vector<std::size_t>{1});
  CHECK_FALSE(sys.warnings().empty());
}

TEST_CASE("intervening on the predator keeps the prey self-loop and the predator edge") {
  const OdeSystem sys = lv();
  const OdeSystem iv = intervene_hard(sys, Intervention().set(1, {2.0}));
  const Digraph g = block_graph(iv);
  CHECK(g.has_self_loop(0));
  CHECK(g.has_edge(1, 0));
  CHECK_FALSE(g.has_edge(0, 1));
  CHECK_FALSE(g.has_self_loop(1));
  CHECK(iv.parents(1).empty());
  CHECK(iv.initial_state()[1] == 2.0);
  CHECK(iv.is_clamped(1));
  CHECK_FALSE(iv.is_clamped(0));
}

TEST_CASE("intervening on a middle mass cuts the edges into it") {
  const OdeSystem sys = chain(4);
  const Digraph g = block_graph(intervene_hard(sys, parse_intervention(sys.layout(), "Q2=3")));
  CHECK(g.edges == std::vector<std::pair<std::size_t, std::size_t>>{{1, 0}, {1, 2}, {2, 3}, {3, 2}});
  CHECK_FALSE(g.has_self_loop(1));
}

TEST_CASE("the empty intervention is the identity") {
  const OdeSystem sys = chain(3);
  CHECK(intervene_hard(sys, Intervention()) == sys);
}

TEST_CASE("hard interventions remove exactly the edges into the targets") {
  Rng rng(31);
  for (int n = 0; n < 100; ++n) {
    const OdeSystem sys(testing::random_model(rng));
    const Intervention iv = testing::random_intervention(sys.layout(), rng);
    const OdeSystem done = intervene_hard(sys, iv);
    CHECK(block_graph(done) == cut_into(block_graph(sys), iv.target_set()));
    CHECK(intervene_hard(done, iv) == done);
  }
}

TEST_CASE("sequential interventions on disjoint targets equal the joint one") {
  Rng rng(32);
  int checked = 0;
  while (checked < 100) {
    const OdeSystem sys(testing::random_model(rng));
    if (sys.block_count() < 2) continue;
    Intervention a, b;
    for (std::size_t blk = 0; blk < sys.block_count(); ++blk) {
      std::vector<double> v(sys.layout().blocks[blk].coordinates.size());
      for (double& x : v) x = rng.uniform(-2, 2);
      ((blk % 2 == 0) ? a : b).set(blk, v);
    }
    CHECK(intervene_hard(intervene_hard(sys, a), b) == intervene_hard(sys, Intervention::combine(a, b)));
    ++checked;
  }
}

TEST_CASE("hard-intervened drift vanishes on targeted coordinates everywhere") {
  Rng rng(33);
  for (int n = 0; n < 50; ++n) {
    const OdeSystem sys(testing::random_model(rng));
    const Intervention iv = testing::random_intervention(sys.layout(), rng);
    const OdeSystem done = intervene_hard(sys, iv);
    for (int k = 0; k < 10; ++k) {
      const auto f = done.drift(testing::random_point(sys.layout(), rng, -5, 5));
      for (std::size_t b : iv.target_set()) {
        for (std::size_t c : sys.layout().blocks[b].coordinates) CHECK(f[c] == 0.0);
      }
    }
  }
}

TEST_CASE("interventions are validated against the layout") {
  const OdeSystem sys = lv();
  CHECK_THROWS_AS(validate(sys.layout(), Intervention().set(5, {1.0})), InvalidArgument);
  CHECK_THROWS_AS(validate(sys.layout(), Intervention().set(0, {1.0, 2.0})), InvalidArgument);
  CHECK_THROWS_AS(validate(sys.layout(), Intervention().set(0, {-1.0})), DomainError);
  CHECK_THROWS_AS(parse_intervention(sys.layout(), "X7=1"), InvalidArgument);
  CHECK_THROWS_AS(Intervention::combine(Intervention().set(0, {1}), Intervention().set(0, {2})), InvalidArgument);
}

TEST_CASE("position sugar clamps the whole mass block") {
  const OdeSystem sys = chain(3);
  const Intervention iv = parse_intervention(sys.layout(), "Q2=3");
  CHECK(iv.values(1) == std::vector<double>{3.0, 0.0});
  CHECK(iv.describe(sys.layout()) == "do(X2=(3, 0))");
  const Intervention joint = parse_intervention(sys.layout(), "Q1=0.5,Q3=3.5");
  CHECK(joint.target_set() == std::vector<std::size_t>{0, 2});
}

TEST_CASE("soft intervention adds proportional feedback") {
  const OdeSystem sys = lv();
  const OdeSystem soft = intervene_soft(sys, Intervention().set(1, {2.0}), 10.0);
  Rng rng(34);
  for (int n = 0; n < 20; ++n) {
    const double x1 = rng.uniform(0, 3), x2 = rng.uniform(0, 3);
    const auto f = soft.drift(std::vector<double>{x1, x2});
    CHECK(f[0] == Catch::Approx(x1 * (1 - x2)));
    CHECK(f[1] == Catch::Approx(-x2 * (1 - x1) + 10 * (2 - x2)));
  }
  // X2 already depended on itself, so its parents are unchanged
  CHECK(soft.parents(1) == sys.parents(1));
  CHECK(soft.initial_state()[1] == sys.initial_state()[1]);
  CHECK_THROWS_AS(intervene_soft(sys, Intervention().set(1, {2.0}), 0.0), InvalidArgument);
}

TEST_CASE("predator-prey Jacobians at the two equilibria") {
  const OdeSystem sys = lv();
  const Matrix at_zero = jacobian_at(sys, std::vector<double>{0, 0});
  CHECK(at_zero.data == std::vector<double>{1, 0, 0, -1});
  const Matrix at_one = jacobian_at(sys, std::vector<double>{1, 1});
  CHECK(at_one.data == std::vector<double>{0, -1, 1, 0});
}

TEST_CASE("symbolic Jacobians agree with finite differences on random systems") {
  Rng rng(35);
  for (int n = 0; n < 100; ++n) {
    const OdeSystem sys(testing::random_model(rng));
    const auto x = testing::random_point(sys.layout(), rng);
    const Matrix j = sys.jacobian(x);
    const std::size_t d = sys.dimension();
    double scale = 0.0;
    for (double v : x) scale = std::max(scale, std::abs(v));
    for (std::size_t c = 0; c < d; ++c) {
      const double h = 1e-6 * (1.0 + scale);
      auto xp = x, xm = x;
      xp[c] += h;
      xm[c] -= h;
      const auto fp = sys.drift(xp), fm = sys.drift(xm);
      for (std::size_t r = 0; r < d; ++r) {
        const double fd = (fp[r] - fm[r]) / (2 * h);
        CHECK(std::abs(fd - j(r, c)) <= 1e-5 * std::max(1.0, std::abs(j(r, c))));
      }
    }
  }
}

TEST_CASE("linear stability classes") {
  const Classification at_zero = classify_equilibrium(jacobian_at(lv(), std::vector<double>{0, 0}));
  CHECK(at_zero.kind == LocalStability::unstable);
  REQUIRE(at_zero.eigenvalues.size() == 2);
  CHECK(at_zero.eigenvalues[0] == std::complex<double>(-1, 0));
  CHECK(at_zero.eigenvalues[1] == std::complex<double>(1, 0));

  const Classification at_one = classify_equilibrium(jacobian_at(lv(), std::vector<double>{1, 1}));
  CHECK(at_one.kind == LocalStability::marginal);
  CHECK(std::abs(at_one.eigenvalues[0] - std::complex<double>(0, -1)) < 1e-12);
  CHECK(std::abs(at_one.eigenvalues[1] - std::complex<double>(0, 1)) < 1e-12);

  Matrix minus_identity = Matrix::identity(3);
  for (double& v : minus_identity.data) v = -v;
  const Classification damped = classify_equilibrium(minus_identity);
  CHECK(damped.kind == LocalStability::asymptotically_stable);
  for (const auto& ev : damped.eigenvalues) CHECK(ev == std::complex<double>(-1, 0));
  CHECK(to_string(LocalStability::asymptotically_stable) == "asymptotically-stable");
}

TEST_CASE("eigenvalues of random matrices reproduce trace and determinant") {
  Rng rng(36);
  for (int n = 0; n < 50; ++n) {
    const std::size_t d = 1 + rng.next() % 6;
    Matrix m(d, d);
    for (double& v : m.data) v = rng.uniform(-3, 3);
    const auto ev = eigenvalues(m);
    std::complex<double> sum = 0, prod = 1;
    for (const auto& e : ev) {
      sum += e;
      prod *= e;
    }
    double trace = 0;
    for (std::size_t i = 0; i < d; ++i) trace += m(i, i);
    std::vector<std::vector<double>> a(d, std::vector<double>(d));
    for (std::size_t r = 0; r < d; ++r) {
      for (std::size_t c = 0; c < d; ++c) a[r][c] = m(r, c);
    }
    // determinant by elimination
    double det = 1.0;
    for (std::size_t c = 0; c < d; ++c) {
      std::size_t p = c;
      for (std::size_t r = c + 1; r < d; ++r) {
        if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
      }
      if (p != c) {
        std::swap(a[p], a[c]);
        det = -det;
      }
      det *= a[c][c];
      for (std::size_t r = c + 1; r < d; ++r) {
        const double f = a[r][c] / a[c][c];
        for (std::size_t k = c; k < d; ++k) a[r][k] -= f * a[c][k];
      }
    }
    CHECK(std::abs(sum.real() - trace) < 1e-9 * (1 + std::abs(trace)));
    CHECK(std::abs(sum.imag()) < 1e-9);
    CHECK(std::abs(prod.real() - det) < 1e-8 * (1 + std::abs(det)));
  }
}
