#include "odescm/box.hpp"

#include <algorithm>
#include <cmath>

#include "odescm/errors.hpp"

namespace odescm {

Box Box::around(const Layout& layout, std::span<const double> reference, double inflation) {
  if (reference.size() != layout.dimension()) throw InvalidArgument("reference point has wrong dimension");
  Box box;
  box.lower.resize(reference.size());
  box.upper.resize(reference.size());
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double half = inflation * std::max(1.0, std::abs(reference[i]));
    const Interval& dom = layout.variables[i].domain;
    double lo = std::max(reference[i] - half, dom.lower);
    double hi = std::min(reference[i] + half, dom.upper);
    if (lo > hi) lo = hi = reference[i];
    box.lower[i] = lo;
    box.upper[i] = hi;
  }
  return box;
}

std::vector<double> Box::sample(Rng& rng) const {
  std::vector<double> x(lower.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = lower[i] == upper[i] ? lower[i] : rng.uniform(lower[i], upper[i]);
  }
  return x;
}

bool Box::contains(std::span<const double> x) const {
  if (x.size() != lower.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < lower[i] || x[i] > upper[i]) return false;
  }
  return true;
}

}  // namespace odescm
