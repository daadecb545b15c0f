#include "catch.hpp"
#include "generators.hpp"
#include "odescm/builtins.hpp"
#include "odescm/errors.hpp"
#include "odescm/model_spec.hpp"
#include "odescm/ode_system.hpp"

using namespace odescm;

namespace {

std::vector<double> drift_at(const ModelSpec& spec, std::vector<double> x) {
  return OdeSystem(spec).drift(x);
}

}  // namespace

TEST_CASE("the predator-prey source parses into two scalar blocks and four rates") {
  const ModelSpec spec = parse_model(lotka_volterra_source({}));
  CHECK(spec.layout.block_count() == 2);
  CHECK(spec.layout.dimension() == 2);
  CHECK(spec.layout.parameters.size() == 4);
  CHECK(spec.dynamics[0].to_string() == "X1 * (th11 - th12 * X2)");
  CHECK(spec.layout.variables[0].domain == Interval::at_least(0.0));
}

TEST_CASE("a model with constant dynamics") {
  const ModelSpec spec = parse_model("var X in (-inf,inf)\ndyn X = 0\ninit X = 1\n");
  CHECK(spec.layout.block_count() == 1);
  CHECK(spec.dynamics[0].is_zero());
  CHECK(spec.initial == std::vector<double>{1.0});
}

TEST_CASE("unknown identifiers are rejected with a position") {
  try {
    parse_model("var X in (-inf,inf)\ndyn X = X + Y\ninit X = 0\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("Y") != std::string::npos);
  }
}

TEST_CASE("malformed models are rejected") {
  CHECK_THROWS_AS(parse_model("garbage\n"), ParseError);
  CHECK_THROWS_AS(parse_model("var X in (-inf,inf)\ninit X = 0\n"), ParseError);               // no dynamics
  CHECK_THROWS_AS(parse_model("var X in (-inf,inf)\ndyn X = 1\n"), ParseError);                // no init
  CHECK_THROWS_AS(parse_model("var X in [0,inf)\ndyn X = 1\ninit X = -1\n"), ParseError);     // init outside domain
  CHECK_THROWS_AS(parse_model("var X in (-inf,inf)\nvar X in (-inf,inf)\n"), ParseError);      // duplicate
  CHECK_THROWS_AS(parse_model("var X in (-inf,inf)\ndyn X = (1\ninit X = 0\n"), ParseError);   // syntax
}

TEST_CASE("printing and parsing round-trip on the builtin models") {
  const ModelSpec lv = builtin_lotka_volterra();
  CHECK(parse_model(print_model(lv)) == lv);
  for (std::size_t d = 1; d <= 5; ++d) {
    const ModelSpec ms = builtin_mass_spring(MassSpringParams::uniform(d, 1.5, 0.8, 1.1, 0.4));
    CHECK(parse_model(print_model(ms)) == ms);
  }
}

TEST_CASE("printing and parsing round-trip on random models") {
  Rng rng(21);
  for (int n = 0; n < 100; ++n) {
    const ModelSpec spec = testing::random_model(rng);
    const std::string text = print_model(spec);
    INFO(text);
    CHECK(parse_model(text) == spec);
    CHECK(print_model(parse_model(text)) == text);
  }
}

TEST_CASE("predator-prey dynamics vanish at both equilibria") {
  const ModelSpec at_one = builtin_lotka_volterra({1, 1, 1, 1, 1, 1});
  CHECK(drift_at(at_one, {1, 1}) == std::vector<double>{0, 0});
  const ModelSpec at_zero = builtin_lotka_volterra({1, 1, 1, 1, 0, 0});
  CHECK(drift_at(at_zero, at_zero.initial) == std::vector<double>{0, 0});
}

TEST_CASE("predator-prey rates must be positive") {
  CHECK_THROWS_AS(builtin_lotka_volterra({0, 1, 1, 1, 1, 1}), InvalidArgument);
  CHECK_THROWS_AS(builtin_lotka_volterra({1, 1, 1, 1, -1, 1}), InvalidArgument);
}

TEST_CASE("identical springs place two masses symmetrically") {
  MassSpringParams p = MassSpringParams::uniform(2);
  CHECK(p.wall == 3.0);
  const ModelSpec spec = builtin_mass_spring(p);
  CHECK(drift_at(spec, {1, 0, 2, 0}) == std::vector<double>{0, 0, 0, 0});
}

TEST_CASE("a single mass between two walls") {
  MassSpringParams p = MassSpringParams::uniform(1, 1.0, 1.0, 1.0, 1.0, 2.0);
  const ModelSpec spec = builtin_mass_spring(p);
  // k1 (L - Q1 - l1) = k0 (Q1 - l0) gives Q1 = 1
  CHECK(drift_at(spec, {1, 0}) == std::vector<double>{0, 0});
  CHECK(drift_at(spec, {1.5, 0})[1] == -1.0);
}

TEST_CASE("mass-spring parameters are validated") {
  MassSpringParams p = MassSpringParams::uniform(2);
  p.masses[0] = 0.0;
  CHECK_THROWS_AS(builtin_mass_spring(p), InvalidArgument);
  p = MassSpringParams::uniform(2);
  p.springs.pop_back();
  CHECK_THROWS_AS(builtin_mass_spring(p), InvalidArgument);
  CHECK_THROWS_AS(builtin_mass_spring(MassSpringParams::uniform(0)), InvalidArgument);
}

TEST_CASE("mass-spring blocks pair each position with its momentum") {
  const ModelSpec spec = builtin_mass_spring(MassSpringParams::uniform(3));
  REQUIRE(spec.layout.block_count() == 3);
  for (std::size_t b = 0; b < 3; ++b) {
    const Block& block = spec.layout.blocks[b];
    CHECK(block.name == "X" + std::to_string(b + 1));
    REQUIRE(block.coordinates.size() == 2);
    CHECK(spec.layout.variables[block.coordinates[0]].name == "Q" + std::to_string(b + 1));
    CHECK(spec.layout.variables[block.coordinates[1]].name == "P" + std::to_string(b + 1));
  }
}

TEST_CASE("intervals report membership and distance") {
  const Interval i = Interval::at_least(0.0);
  CHECK(i.contains(0.0));
  CHECK_FALSE(i.contains(-1e-12));
  CHECK(i.distance(-2.0) == 2.0);
  CHECK(Interval::real_line().contains(1e300));
  CHECK(Interval::closed(0, 1).to_string() == "[0,1]");
}
