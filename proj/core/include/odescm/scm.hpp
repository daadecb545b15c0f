#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "odescm/digraph.hpp"
#include "odescm/intervention.hpp"
#include "odescm/lee.hpp"
#include "odescm/newton.hpp"
#include "odescm/solvability.hpp"

namespace odescm {

enum class MechanismKind { closed_form, implicit, clamp };

std::string_view to_string(MechanismKind k);

/// Structural equation X_i = h_i(X_pa(i)).
///
/// Closed forms hold one expression per block coordinate together with the
/// determinant of the affine system they solve; evaluation refuses parent
/// values where that determinant vanishes. Implicit mechanisms keep the
/// labeled equation and solve it for the block at every call, starting
/// from `hint`.
struct Mechanism {
  MechanismKind kind = MechanismKind::clamp;
  std::vector<std::size_t> parents;  // pa_M(i), sorted, never contains i
  std::vector<Expr> closed;          // closed_form
  Expr determinant;                  // closed_form
  std::vector<Expr> equation;        // implicit
  std::vector<double> values;        // clamp
  std::vector<double> hint;          // implicit start, not part of identity

  friend bool operator==(const Mechanism& a, const Mechanism& b) {
    return a.kind == b.kind && a.parents == b.parents && a.closed == b.closed && a.determinant == b.determinant &&
           a.equation == b.equation && a.values == b.values;
  }
};

/// Deterministic SCM over the blocks of a layout.
class Scm {
 public:
  Scm(Layout layout, std::vector<Mechanism> mechanisms, std::vector<double> reference);

  const Layout& layout() const noexcept { return layout_; }
  std::size_t size() const noexcept { return mechanisms_.size(); }
  const Mechanism& mechanism(std::size_t block) const { return mechanisms_.at(block); }
  const std::vector<Mechanism>& mechanisms() const noexcept { return mechanisms_; }
  std::span<const double> reference() const noexcept { return reference_; }

  friend bool operator==(const Scm& a, const Scm& b) {
    return a.layout_ == b.layout_ && a.mechanisms_ == b.mechanisms_;
  }

  /// Compiled form of a mechanism, built once at construction.
  struct Compiled {
    std::vector<CompiledExpr> closed;
    CompiledExpr determinant;
    std::vector<CompiledExpr> equation;
    std::vector<CompiledExpr> own_jacobian;  // row-major d x d
  };
  const Compiled& compiled(std::size_t block) const { return compiled_.at(block); }

 private:
  Layout layout_;
  std::vector<Mechanism> mechanisms_;
  std::vector<double> reference_;
  std::vector<Compiled> compiled_;
};

/// Builds the induced SCM without checking structural solvability:
/// pa_M(i) = pa_E(i) \ {i}, closed-form mechanisms where g_i is affine in
/// block i (Cramer's rule, blocks of up to four coordinates), implicit ones
/// elsewhere, clamps for clamp equations.
Scm build_scm(const Lee& lee);

struct DeriveOptions {
  bool force = false;
  SolvabilityOptions solvability{};
  /// Clamp-value sampler for the solvability probes; defaults to the
  /// reference box of the Lee.
  InterventionSampler sampler{};
};

struct Derivation {
  Scm scm;
  StructuralSolvabilityReport solvability;
  std::vector<std::string> warnings;
};

/// Checks structural solvability and builds the SCM. Unless forced, throws
/// SolvabilityRefused when the verdict is not `solvable`.
Derivation derive_scm(const Lee& lee, const DeriveOptions& options = {});

/// h_i evaluated with parent values read from the full state x (other
/// coordinates are ignored). Throws DegenerateMechanism or
/// MechanismSolveError.
std::vector<double> eval_mechanism(const Scm& scm, std::size_t block, std::span<const double> x);

/// Replaces the targeted mechanisms with clamps that have no parents.
Scm intervene_scm(const Scm& scm, const Intervention& iv);

/// Topological substitution when the parent graph is acyclic; otherwise
/// multistart damped Newton on X - h(X).
SolveResult solve_scm(const Scm& scm, const LeeSolveOptions& options = {});

/// Edge j -> i iff perturbing a coordinate of parent j changes h_i at one
/// of 50 sampled points by more than 1e-12.
Digraph scm_graph(const Scm& scm, std::uint64_t seed = 0);

/// Parent-set graph (syntactic parents).
Digraph scm_parent_graph(const Scm& scm);

/// `X[name] = <expr>`, `X[name] = implicit root of: <expr>` or the clamp
/// value, one line per block.
std::string render(const Scm& scm);

/// Same as render but per coordinate, leaving out coordinates whose
/// mechanism is the constant zero.
std::string render_projected(const Scm& scm);

/// Residual max-norm of X - h(X) at x.
double scm_residual(const Scm& scm, std::span<const double> x);

}  // namespace odescm
