#include "odescm/builtins.hpp"

#include <numeric>

#include "odescm/errors.hpp"

namespace odescm {

std::string lotka_volterra_source(const LotkaVolterraParams& p) {
  std::string s;
  s += "# Lotka-Volterra predator-prey model\n";
  s += "param th11 = " + format_real(p.th11) + "\n";
  s += "param th12 = " + format_real(p.th12) + "\n";
  s += "param th21 = " + format_real(p.th21) + "\n";
  s += "param th22 = " + format_real(p.th22) + "\n";
  s += "var X1 in [0,inf)\n";
  s += "var X2 in [0,inf)\n";
  s += "dyn X1 = X1 * (th11 - th12 * X2)\n";
  s += "dyn X2 = -X2 * (th22 - th21 * X1)\n";
  s += "init X1 = " + format_real(p.a) + "\n";
  s += "init X2 = " + format_real(p.b) + "\n";
  return s;
}

ModelSpec builtin_lotka_volterra(const LotkaVolterraParams& p) {
  if (!(p.th11 > 0 && p.th12 > 0 && p.th21 > 0 && p.th22 > 0)) {
    throw InvalidArgument("Lotka-Volterra rates must all be positive");
  }
  if (!(p.a >= 0 && p.b >= 0)) throw InvalidArgument("Lotka-Volterra initial abundances must be non-negative");
  return parse_model(lotka_volterra_source(p));
}

MassSpringParams MassSpringParams::uniform(std::size_t d, double mass, double spring, double length,
                                           double friction, double wall) {
  MassSpringParams p;
  p.masses_count = d;
  p.masses.assign(d, mass);
  p.springs.assign(d + 1, spring);
  p.lengths.assign(d + 1, length);
  p.frictions.assign(d, friction);
  p.wall = wall < 0 ? length * static_cast<double>(d + 1) : wall;
  return p;
}

namespace {

void check_params(const MassSpringParams& p) {
  const std::size_t d = p.masses_count;
  if (d == 0) throw InvalidArgument("mass-spring chain needs at least one mass");
  if (p.masses.size() != d || p.frictions.size() != d || p.springs.size() != d + 1 || p.lengths.size() != d + 1) {
    throw InvalidArgument("mass-spring parameter vectors have the wrong length");
  }
  for (double m : p.masses) {
    if (!(m > 0)) throw InvalidArgument("masses must be positive");
  }
  for (double k : p.springs) {
    if (!(k > 0)) throw InvalidArgument("spring constants must be positive");
  }
  for (double b : p.frictions) {
    if (!(b > 0)) throw InvalidArgument("friction coefficients must be positive");
  }
  for (double l : p.lengths) {
    if (!(l >= 0)) throw InvalidArgument("rest lengths must be non-negative");
  }
  if (!p.init_positions.empty() && p.init_positions.size() != d) {
    throw InvalidArgument("need one initial position per mass");
  }
  if (!p.init_momenta.empty() && p.init_momenta.size() != d) {
    throw InvalidArgument("need one initial momentum per mass");
  }
}

}  // namespace

std::string mass_spring_source(const MassSpringParams& p) {
  check_params(p);
  const std::size_t d = p.masses_count;
  auto idx = [](std::size_t i) { return std::to_string(i); };
  auto q = [&](std::size_t i) -> std::string {
    if (i == 0) return "0";
    if (i == d + 1) return "L";
    return "Q" + idx(i);
  };
  std::string s;
  s += "# damped mass-spring chain, D = " + idx(d) + "\n";
  s += "param L = " + format_real(p.wall) + "\n";
  for (std::size_t i = 0; i <= d; ++i) {
    s += "param k" + idx(i) + " = " + format_real(p.springs[i]) + "\n";
    s += "param l" + idx(i) + " = " + format_real(p.lengths[i]) + "\n";
  }
  for (std::size_t i = 1; i <= d; ++i) {
    s += "param m" + idx(i) + " = " + format_real(p.masses[i - 1]) + "\n";
    s += "param b" + idx(i) + " = " + format_real(p.frictions[i - 1]) + "\n";
  }
  for (std::size_t i = 1; i <= d; ++i) {
    s += "var Q" + idx(i) + " in (-inf,inf)\n";
    s += "var P" + idx(i) + " in (-inf,inf)\n";
    s += "block X" + idx(i) + " = (Q" + idx(i) + ", P" + idx(i) + ")\n";
  }
  for (std::size_t i = 1; i <= d; ++i) {
    const std::string k = "k" + idx(i), km = "k" + idx(i - 1);
    const std::string l = "l" + idx(i), lm = "l" + idx(i - 1);
    s += "dyn Q" + idx(i) + " = P" + idx(i) + " / m" + idx(i) + "\n";
    s += "dyn P" + idx(i) + " = " + k + " * (" + q(i + 1) + " - " + q(i) + " - " + l + ") - " + km + " * (" + q(i) +
         " - " + q(i - 1) + " - " + lm + ") - b" + idx(i) + " / m" + idx(i) + " * P" + idx(i) + "\n";
  }
  for (std::size_t i = 1; i <= d; ++i) {
    const double q0 = p.init_positions.empty()
                          ? p.wall * static_cast<double>(i) / static_cast<double>(d + 1)
                          : p.init_positions[i - 1];
    const double p0 = p.init_momenta.empty() ? 0.0 : p.init_momenta[i - 1];
    s += "init Q" + idx(i) + " = " + format_real(q0) + "\n";
    s += "init P" + idx(i) + " = " + format_real(p0) + "\n";
  }
  return s;
}

ModelSpec builtin_mass_spring(const MassSpringParams& p) { return parse_model(mass_spring_source(p)); }

Box mass_spring_intervention_box(const ModelSpec& spec) {
  const Layout& layout = spec.layout;
  const double wall = layout.parameter_value("L");
  Box box;
  for (const auto& var : layout.variables) {
    const bool position = !var.name.empty() && var.name[0] == 'Q';
    box.lower.push_back(0.0);
    box.upper.push_back(position ? wall : 0.0);
  }
  return box;
}

}  // namespace odescm
