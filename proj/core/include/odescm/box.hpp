#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "odescm/model_spec.hpp"
#include "odescm/rng.hpp"

namespace odescm {

/// Axis-aligned sampling region over the flattened state. Degenerate sides
/// (lower == upper) pin a coordinate.
struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t dimension() const noexcept { return lower.size(); }

  /// Box centred on `reference` with half-width inflation * max(1, |x|) per
  /// coordinate, intersected with the declared domains.
  static Box around(const Layout& layout, std::span<const double> reference, double inflation = 3.0);

  std::vector<double> sample(Rng& rng) const;
  bool contains(std::span<const double> x) const;

  friend bool operator==(const Box&, const Box&) = default;
};

}  // namespace odescm
