#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "odescm/compiled_expr.hpp"
#include "odescm/digraph.hpp"
#include "odescm/intervention.hpp"
#include "odescm/matrix.hpp"
#include "odescm/model_spec.hpp"

namespace odescm {

/// Executable first-order ODE system dX_i/dt = f_i(X_pa(i)), X(0) = X_0.
///
/// Block i is a parent of block j iff some coordinate of i appears in some
/// dynamics expression of j; a block may be its own parent. Blocks fixed by
/// a hard intervention carry their clamp value so that the equilibrium
/// equations can recognise them.
class OdeSystem {
 public:
  /// Same as build_system(spec).
  explicit OdeSystem(ModelSpec spec);

  const ModelSpec& spec() const noexcept { return spec_; }
  const Layout& layout() const noexcept { return spec_.layout; }
  std::size_t dimension() const noexcept { return spec_.layout.dimension(); }
  std::size_t block_count() const noexcept { return spec_.layout.block_count(); }

  /// pa(i), sorted block indices.
  const std::vector<std::size_t>& parents(std::size_t block) const { return block_parents_.at(block); }
  const std::vector<std::vector<std::size_t>>& parent_sets() const noexcept { return block_parents_; }
  /// Coordinates appearing in the dynamics of coordinate `coord`, sorted.
  const std::vector<std::size_t>& coordinate_parents(std::size_t coord) const { return coord_parents_.at(coord); }

  std::span<const double> initial_state() const noexcept { return spec_.initial; }

  /// Clamp value if `block` was fixed by intervene_hard.
  const std::optional<std::vector<double>>& clamp(std::size_t block) const { return clamps_.at(block); }
  bool is_clamped(std::size_t block) const { return clamps_.at(block).has_value(); }

  /// Non-constancy probe findings (a claimed parent that never changed the
  /// dynamics at the probed points).
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  /// Evaluates every f_i at x. Throws DivisionByZero.
  void drift(std::span<const double> x, std::span<double> out) const;
  std::vector<double> drift(std::span<const double> x) const;

  /// Symbolic Jacobian of the drift evaluated at x.
  Matrix jacobian(std::span<const double> x) const;

  friend bool operator==(const OdeSystem& a, const OdeSystem& b) {
    return a.spec_ == b.spec_ && a.clamps_ == b.clamps_;
  }

 private:
  friend OdeSystem intervene_hard(const OdeSystem&, const Intervention&);
  friend OdeSystem intervene_soft(const OdeSystem&, const Intervention&, double);

  OdeSystem(ModelSpec spec, std::vector<std::optional<std::vector<double>>> clamps);
  void probe_non_constancy();

  struct Partial {
    std::size_t row;
    std::size_t col;
    CompiledExpr value;
  };

  ModelSpec spec_;
  std::vector<std::optional<std::vector<double>>> clamps_;
  std::vector<std::vector<std::size_t>> block_parents_;
  std::vector<std::vector<std::size_t>> coord_parents_;
  std::vector<CompiledExpr> compiled_;
  std::vector<Partial> partials_;
  std::vector<std::string> warnings_;
};

/// Validates the spec, computes parent sets and runs the non-constancy
/// probe (50 random points per claimed parent; warnings only).
OdeSystem build_system(ModelSpec spec);

/// Perfect intervention: targeted blocks get zero dynamics, start at their
/// clamp value and lose every parent, including themselves.
OdeSystem intervene_hard(const OdeSystem& sys, const Intervention& iv);

/// Feedback realisation: adds kappa * (xi_c - X_c) to each targeted
/// coordinate's dynamics. Initial state is unchanged. Throws
/// InvalidArgument unless kappa > 0.
OdeSystem intervene_soft(const OdeSystem& sys, const Intervention& iv, double kappa);

/// Block-level graph (nodes are block names).
Digraph block_graph(const OdeSystem& sys);

/// Coordinate-level graph (nodes are coordinate names).
Digraph coordinate_graph(const OdeSystem& sys);

}  // namespace odescm
