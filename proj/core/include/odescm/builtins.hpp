#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "odescm/box.hpp"
#include "odescm/model_spec.hpp"

namespace odescm {

/// Predator-prey dynamics on X1 (prey) and X2 (predators), both in [0, inf):
///   dX1/dt =  X1 (th11 - th12 X2)
///   dX2/dt = -X2 (th22 - th21 X1)
struct LotkaVolterraParams {
  double th11 = 1.0;
  double th12 = 1.0;
  double th21 = 1.0;
  double th22 = 1.0;
  double a = 0.5;  // X1(0)
  double b = 0.5;  // X2(0)
};

/// Model source text for the given parameters.
std::string lotka_volterra_source(const LotkaVolterraParams& p);

/// Throws InvalidArgument for non-positive rates or negative initial values.
ModelSpec builtin_lotka_volterra(const LotkaVolterraParams& p = {});

/// Chain of D point masses between walls at 0 and L, joined by D + 1
/// springs. Mass i has position Q_i and momentum P_i, grouped as block
/// X_i = (Q_i, P_i):
///   dP_i/dt = k_i (Q_{i+1} - Q_i - l_i) - k_{i-1} (Q_i - Q_{i-1} - l_{i-1}) - (b_i / m_i) P_i
///   dQ_i/dt = P_i / m_i
/// with Q_0 = 0 and Q_{D+1} = L.
struct MassSpringParams {
  std::size_t masses_count = 1;
  std::vector<double> masses;     // m_1..m_D
  std::vector<double> springs;    // k_0..k_D
  std::vector<double> lengths;    // l_0..l_D
  std::vector<double> frictions;  // b_1..b_D
  double wall = 1.0;              // L
  std::vector<double> init_positions;   // empty: evenly spaced between the walls
  std::vector<double> init_momenta;     // empty: all zero

  /// Identical masses, springs, rest lengths and frictions. A negative wall
  /// places L at the sum of the rest lengths.
  static MassSpringParams uniform(std::size_t d, double mass = 1.0, double spring = 1.0, double length = 1.0,
                                  double friction = 1.0, double wall = -1.0);
};

std::string mass_spring_source(const MassSpringParams& p);

/// Throws InvalidArgument for D = 0, non-positive m, k, b, negative l, or
/// parameter vectors of the wrong length.
ModelSpec builtin_mass_spring(const MassSpringParams& p);

/// Physically meaningful clamp values for the mass-spring chain: positions
/// between the walls, momenta pinned at zero.
Box mass_spring_intervention_box(const ModelSpec& spec);

}  // namespace odescm
