#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "odescm/box.hpp"
#include "odescm/model_spec.hpp"
#include "odescm/rng.hpp"

namespace odescm {

/// Perfect intervention do(X_I = xi_I): a set of target blocks, each with a
/// clamp value for every coordinate of the block. Interventions always act
/// on whole blocks.
class Intervention {
 public:
  Intervention() = default;

  /// Adds or replaces the clamp of `block`.
  Intervention& set(std::size_t block, std::vector<double> values);

  const std::map<std::size_t, std::vector<double>>& targets() const noexcept { return targets_; }
  bool empty() const noexcept { return targets_.empty(); }
  bool targets_block(std::size_t block) const { return targets_.count(block) > 0; }
  const std::vector<double>& values(std::size_t block) const { return targets_.at(block); }
  std::vector<std::size_t> target_set() const;

  /// Union of two interventions on disjoint target sets. Throws
  /// InvalidArgument when they overlap.
  static Intervention combine(const Intervention& a, const Intervention& b);

  /// `do(X1=0.5, X2=(3, 0))`, or `do()` for the identity.
  std::string describe(const Layout& layout) const;

  friend bool operator==(const Intervention&, const Intervention&) = default;

 private:
  std::map<std::size_t, std::vector<double>> targets_;
};

/// Throws InvalidArgument on unknown blocks or dimension mismatch, and
/// DomainError when a clamp value lies outside its coordinate's domain.
void validate(const Layout& layout, const Intervention& iv);

/// Parses `NAME=VALUE[,NAME=VALUE...]`. NAME is either a one-dimensional
/// block or a coordinate. Naming a coordinate of a larger block clamps that
/// coordinate and sets the block's other coordinates to 0 unless they are
/// given too, so `Q2=3` on a (Q2, P2) block means do(X2=(3, 0)).
Intervention parse_intervention(const Layout& layout, std::string_view text);

/// Draws clamp values for a given target set.
using InterventionSampler = std::function<Intervention(const std::vector<std::size_t>& targets, Rng& rng)>;

/// Uniform draws from `box` restricted to the targeted coordinates.
InterventionSampler box_sampler(const Layout& layout, Box box);

}  // namespace odescm
