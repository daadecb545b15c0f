#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace odescm {

enum class ExprKind { constant, variable, parameter, negate, add, subtract, multiply, divide, power };

/// Immutable expression tree over real constants, coordinate references,
/// parameter references, the four arithmetic operators and integer powers.
///
/// Nodes are shared, so copying an Expr is cheap and thread-safe. Two
/// constructor families exist: the plain factories in this class build
/// exactly the requested node (the parser uses them, so `X - X` stays
/// `X - X`), while the functions in namespace `simplify` fold constants,
/// drop neutral elements and pull signs outward (used by differentiation
/// and mechanism synthesis).
///
/// The only normalisation applied by the plain factories is that the
/// negation of a literal is stored as a negative literal; the canonical
/// printer relies on this to round-trip through the parser.
class Expr {
 public:
  Expr();  // the constant 0

  static Expr constant(double value);
  static Expr variable(std::string name);
  static Expr parameter(std::string name);
  static Expr negate(Expr operand);
  static Expr add(Expr lhs, Expr rhs);
  static Expr subtract(Expr lhs, Expr rhs);
  static Expr multiply(Expr lhs, Expr rhs);
  static Expr divide(Expr lhs, Expr rhs);
  static Expr power(Expr base, int exponent);

  ExprKind kind() const noexcept;
  double value() const noexcept;           // constant
  const std::string& name() const noexcept;  // variable, parameter
  int exponent() const noexcept;           // power
  const Expr& operand() const noexcept;    // negate, power base
  const Expr& lhs() const noexcept;        // binary
  const Expr& rhs() const noexcept;        // binary

  bool is_constant() const noexcept { return kind() == ExprKind::constant; }
  bool is_zero() const noexcept { return is_constant() && value() == 0.0; }
  bool is_one() const noexcept { return is_constant() && value() == 1.0; }

  /// Canonical text. Parsing it yields a structurally equal tree.
  std::string to_string() const;

  friend bool operator==(const Expr& a, const Expr& b);
  friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  static Expr make(ExprKind kind, double value, int exponent, std::string name, Expr lhs, Expr rhs);
  std::shared_ptr<const Node> node_;
};

/// Resolves a variable or parameter name to its value; returns nullopt when
/// the name is unbound.
using Valuation = std::function<std::optional<double>(ExprKind kind, const std::string& name)>;

/// Tree-walking evaluation. Throws DivisionByZero or UnboundName.
double eval_expr(const Expr& e, const Valuation& env);

/// Convenience valuation from two name maps.
Valuation make_valuation(const std::map<std::string, double>& variables,
                         const std::map<std::string, double>& parameters);

/// Coordinate names syntactically present in `e`.
std::set<std::string> free_coords(const Expr& e);
std::set<std::string> free_params(const Expr& e);

/// Partial derivative with respect to coordinate `coord`, with light
/// constant folding.
Expr differentiate(const Expr& e, const std::string& coord);

/// Replace every reference to coordinate `coord` by `replacement`, folding
/// constants afterwards.
Expr substitute(const Expr& e, const std::string& coord, const Expr& replacement);

/// Rebuild `e` bottom-up through the folding constructors.
Expr simplified(const Expr& e);

/// Canonical spelling of a real literal (shortest round-trip form).
std::string format_real(double value);

namespace simplify {
Expr negate(const Expr& a);
Expr add(const Expr& a, const Expr& b);
Expr subtract(const Expr& a, const Expr& b);
Expr multiply(const Expr& a, const Expr& b);
Expr divide(const Expr& a, const Expr& b);
Expr power(const Expr& base, int exponent);
}  // namespace simplify

}  // namespace odescm
