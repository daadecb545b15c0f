#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "odescm/box.hpp"
#include "odescm/digraph.hpp"
#include "odescm/intervention.hpp"
#include "odescm/model_spec.hpp"
#include "odescm/newton.hpp"
#include "odescm/ode_system.hpp"

namespace odescm {

/// One labeled equation. Either `0 = g_i(X_pa(i))` with one body expression
/// per coordinate of block i, or the clamp `0 = X_i - xi_i`.
struct LabeledEquation {
  bool clamp = false;
  std::vector<Expr> body;    // empty for clamps
  std::vector<double> xi;    // clamp values, empty otherwise
  std::vector<std::size_t> parents;  // pa_E(i), sorted block indices; {i} for clamps

  friend bool operator==(const LabeledEquation&, const LabeledEquation&) = default;
};

/// Labeled equilibrium equations: exactly one equation per block label.
///
/// The reference state (the originating initial condition) seeds numeric
/// solves and is not part of the identity of a Lee.
class Lee {
 public:
  Lee(Layout layout, std::vector<LabeledEquation> equations, std::vector<double> reference);

  const Layout& layout() const noexcept { return layout_; }
  std::size_t size() const noexcept { return equations_.size(); }
  const LabeledEquation& equation(std::size_t block) const { return equations_.at(block); }
  const std::vector<LabeledEquation>& equations() const noexcept { return equations_; }
  std::span<const double> reference() const noexcept { return reference_; }

  /// Expressions of the equation for block i, one per coordinate. Clamps
  /// give `X - xi`.
  std::vector<Expr> residual_exprs(std::size_t block) const;

  /// Max-norm of all equation residuals at the full state x.
  double residual(std::span<const double> x) const;

  friend bool operator==(const Lee& a, const Lee& b) {
    return a.layout_ == b.layout_ && a.equations_ == b.equations_;
  }

 private:
  Layout layout_;
  std::vector<LabeledEquation> equations_;
  std::vector<double> reference_;
};

/// g_i := f_i with the same parent sets; blocks clamped by intervene_hard
/// become clamp equations.
Lee lee_from_ode(const OdeSystem& sys);

/// Replaces the equations of targeted labels with clamps.
Lee intervene_lee(const Lee& lee, const Intervention& iv);

/// One line per label: `E[name]: 0 = <expr>`, with `(e1, e2)` for blocks of
/// several coordinates.
std::string render(const Lee& lee);

Digraph lee_graph(const Lee& lee);

struct LeeSolveOptions {
  NewtonOptions newton{};
  /// Region for the random starts; defaults to the reference box inflated 3x.
  std::optional<Box> box;
};

/// Multistart damped Newton with the symbolic Jacobian. Clamped blocks are
/// eliminated first; the starts are the reference state plus seeded draws
/// from the box. Roots outside the domains are discarded.
SolveResult solve_lee(const Lee& lee, const LeeSolveOptions& options = {});

}  // namespace odescm
