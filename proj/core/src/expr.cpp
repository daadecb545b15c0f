#include "odescm/expr.hpp"

#include <charconv>
#include <cmath>

#include "odescm/errors.hpp"

namespace odescm {

struct Expr::Node {
  ExprKind kind = ExprKind::constant;
  double value = 0.0;
  int exponent = 0;
  std::string name;
  std::optional<Expr> lhs;
  std::optional<Expr> rhs;
};

Expr Expr::make(ExprKind kind, double value, int exponent, std::string name, Expr lhs, Expr rhs) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->value = value;
  n->exponent = exponent;
  n->name = std::move(name);
  if (kind == ExprKind::negate || kind == ExprKind::power) {
    n->lhs = std::move(lhs);
  } else if (kind != ExprKind::constant && kind != ExprKind::variable &&
             kind != ExprKind::parameter) {
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
  }
  return Expr(std::move(n));
}

namespace {

std::shared_ptr<const Expr> zero_literal() {
  static const auto zero = std::make_shared<const Expr>(Expr::constant(0.0));
  return zero;
}

}  // namespace

Expr::Expr() : node_(zero_literal()->node_) {}

Expr Expr::constant(double value) {
  if (!std::isfinite(value)) throw InvalidArgument("expression constants must be finite");
  auto n = std::make_shared<Node>();
  n->value = value == 0.0 ? 0.0 : value;
  return Expr(std::move(n));
}

Expr Expr::variable(std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::variable;
  n->name = std::move(name);
  return Expr(std::move(n));
}

Expr Expr::parameter(std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::parameter;
  n->name = std::move(name);
  return Expr(std::move(n));
}

Expr Expr::negate(Expr operand) {
  if (operand.is_constant()) return constant(-operand.value());
  return make(ExprKind::negate, 0.0, 0, {}, std::move(operand), {});
}

Expr Expr::add(Expr lhs, Expr rhs) {
  return make(ExprKind::add, 0.0, 0, {}, std::move(lhs), std::move(rhs));
}

Expr Expr::subtract(Expr lhs, Expr rhs) {
  return make(ExprKind::subtract, 0.0, 0, {}, std::move(lhs), std::move(rhs));
}

Expr Expr::multiply(Expr lhs, Expr rhs) {
  return make(ExprKind::multiply, 0.0, 0, {}, std::move(lhs), std::move(rhs));
}

Expr Expr::divide(Expr lhs, Expr rhs) {
  return make(ExprKind::divide, 0.0, 0, {}, std::move(lhs), std::move(rhs));
}

Expr Expr::power(Expr base, int exponent) {
  return make(ExprKind::power, 0.0, exponent, {}, std::move(base), {});
}

ExprKind Expr::kind() const noexcept { return node_->kind; }
double Expr::value() const noexcept { return node_->value; }
const std::string& Expr::name() const noexcept { return node_->name; }
int Expr::exponent() const noexcept { return node_->exponent; }
const Expr& Expr::operand() const noexcept { return *node_->lhs; }
const Expr& Expr::lhs() const noexcept { return *node_->lhs; }
const Expr& Expr::rhs() const noexcept { return *node_->rhs; }

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case ExprKind::constant:
      return a.value() == b.value();
    case ExprKind::variable:
    case ExprKind::parameter:
      return a.name() == b.name();
    case ExprKind::negate:
      return a.operand() == b.operand();
    case ExprKind::power:
      return a.exponent() == b.exponent() && a.operand() == b.operand();
    default:
      return a.lhs() == b.lhs() && a.rhs() == b.rhs();
  }
}

// ---------------------------------------------------------------------------
// Printing

std::string format_real(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  (void)ec;
  return std::string(buf, end);
}

namespace {

enum class Slot { top, sum_rhs, product_lhs, product_rhs, power_base };

bool is_atom(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::variable:
    case ExprKind::parameter:
      return true;
    case ExprKind::constant:
      return !std::signbit(e.value());
    default:
      return false;
  }
}

void print(const Expr& e, Slot slot, std::string& out);

void print_parenthesized(const Expr& e, std::string& out) {
  out += '(';
  print(e, Slot::top, out);
  out += ')';
}

void print(const Expr& e, Slot slot, std::string& out) {
  switch (e.kind()) {
    case ExprKind::constant:
      if (std::signbit(e.value())) {
        if (slot == Slot::power_base) out += '(';
        out += '-';
        out += format_real(-e.value());
        if (slot == Slot::power_base) out += ')';
      } else {
        out += format_real(e.value());
      }
      return;
    case ExprKind::variable:
    case ExprKind::parameter:
      out += e.name();
      return;
    case ExprKind::negate: {
      const bool wrap = slot == Slot::power_base;
      if (wrap) out += '(';
      out += '-';
      const Expr& u = e.operand();
      if (is_atom(u) || u.kind() == ExprKind::power) {
        print(u, Slot::top, out);
      } else {
        print_parenthesized(u, out);
      }
      if (wrap) out += ')';
      return;
    }
    case ExprKind::add:
    case ExprKind::subtract: {
      const bool wrap = slot != Slot::top;
      if (wrap) out += '(';
      print(e.lhs(), Slot::top, out);
      out += e.kind() == ExprKind::add ? " + " : " - ";
      print(e.rhs(), Slot::sum_rhs, out);
      if (wrap) out += ')';
      return;
    }
    case ExprKind::multiply:
    case ExprKind::divide: {
      const bool wrap = slot == Slot::product_rhs || slot == Slot::power_base;
      if (wrap) out += '(';
      print(e.lhs(), Slot::product_lhs, out);
      out += e.kind() == ExprKind::multiply ? " * " : " / ";
      print(e.rhs(), Slot::product_rhs, out);
      if (wrap) out += ')';
      return;
    }
    case ExprKind::power: {
      const Expr& base = e.operand();
      if (is_atom(base)) {
        print(base, Slot::power_base, out);
      } else {
        print_parenthesized(base, out);
      }
      out += '^';
      out += std::to_string(e.exponent());
      return;
    }
  }
}

}  // namespace

std::string Expr::to_string() const {
  std::string out;
  print(*this, Slot::top, out);
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation and queries

double eval_expr(const Expr& e, const Valuation& env) {
  switch (e.kind()) {
    case ExprKind::constant:
      return e.value();
    case ExprKind::variable:
    case ExprKind::parameter: {
      auto v = env ? env(e.kind(), e.name()) : std::nullopt;
      if (!v) throw UnboundName(e.name());
      return *v;
    }
    case ExprKind::negate:
      return -eval_expr(e.operand(), env);
    case ExprKind::add:
      return eval_expr(e.lhs(), env) + eval_expr(e.rhs(), env);
    case ExprKind::subtract:
      return eval_expr(e.lhs(), env) - eval_expr(e.rhs(), env);
    case ExprKind::multiply:
      return eval_expr(e.lhs(), env) * eval_expr(e.rhs(), env);
    case ExprKind::divide: {
      const double num = eval_expr(e.lhs(), env);
      const double den = eval_expr(e.rhs(), env);
      if (den == 0.0) throw DivisionByZero();
      return num / den;
    }
    case ExprKind::power: {
      const double base = eval_expr(e.operand(), env);
      const int n = e.exponent();
      if (n < 0 && base == 0.0) throw DivisionByZero();
      double result = 1.0;
      for (int k = 0; k < std::abs(n); ++k) result *= base;
      return n < 0 ? 1.0 / result : result;
    }
  }
  return 0.0;
}

Valuation make_valuation(const std::map<std::string, double>& variables,
                         const std::map<std::string, double>& parameters) {
  return [&variables, &parameters](ExprKind kind, const std::string& name) -> std::optional<double> {
    const auto& table = kind == ExprKind::variable ? variables : parameters;
    auto it = table.find(name);
    if (it == table.end()) return std::nullopt;
    return it->second;
  };
}

namespace {

void collect(const Expr& e, ExprKind wanted, std::set<std::string>& out) {
  switch (e.kind()) {
    case ExprKind::constant:
      return;
    case ExprKind::variable:
    case ExprKind::parameter:
      if (e.kind() == wanted) out.insert(e.name());
      return;
    case ExprKind::negate:
    case ExprKind::power:
      collect(e.operand(), wanted, out);
      return;
    default:
      collect(e.lhs(), wanted, out);
      collect(e.rhs(), wanted, out);
  }
}

}  // namespace

std::set<std::string> free_coords(const Expr& e) {
  std::set<std::string> out;
  collect(e, ExprKind::variable, out);
  return out;
}

std::set<std::string> free_params(const Expr& e) {
  std::set<std::string> out;
  collect(e, ExprKind::parameter, out);
  return out;
}

// ---------------------------------------------------------------------------
// Folding constructors

namespace simplify {

Expr negate(const Expr& a) {
  if (a.is_constant()) return Expr::constant(-a.value());
  if (a.kind() == ExprKind::negate) return a.operand();
  if (a.kind() == ExprKind::subtract) return Expr::subtract(a.rhs(), a.lhs());
  return Expr::negate(a);
}

Expr add(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.value() + b.value());
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  if (b.kind() == ExprKind::negate) return subtract(a, b.operand());
  return Expr::add(a, b);
}

Expr subtract(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.value() - b.value());
  if (b.is_zero()) return a;
  if (a.is_zero()) return negate(b);
  if (b.kind() == ExprKind::negate) return add(a, b.operand());
  return Expr::subtract(a, b);
}

Expr multiply(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.value() * b.value());
  if (a.is_zero() || b.is_zero()) return Expr::constant(0.0);
  if (a.is_one()) return b;
  if (b.is_one()) return a;
  if (a.is_constant() && a.value() == -1.0) return negate(b);
  if (b.is_constant() && b.value() == -1.0) return negate(a);
  if (a.kind() == ExprKind::negate) return negate(multiply(a.operand(), b));
  if (b.kind() == ExprKind::negate) return negate(multiply(a, b.operand()));
  return Expr::multiply(a, b);
}

Expr divide(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant() && b.value() != 0.0) {
    return Expr::constant(a.value() / b.value());
  }
  if (a.is_zero()) return Expr::constant(0.0);
  if (b.is_one()) return a;
  if (a.kind() == ExprKind::negate && b.kind() == ExprKind::negate) return divide(a.operand(), b.operand());
  if (b.kind() == ExprKind::negate) return negate(divide(a, b.operand()));
  if (a.kind() == ExprKind::multiply && b.kind() == ExprKind::multiply && a.lhs() == b.lhs()) {
    return divide(a.rhs(), b.rhs());
  }
  return Expr::divide(a, b);
}

Expr power(const Expr& base, int exponent) {
  if (exponent == 0) return Expr::constant(1.0);
  if (exponent == 1) return base;
  if (base.is_constant() && !(base.value() == 0.0 && exponent < 0)) {
    return Expr::constant(std::pow(base.value(), exponent));
  }
  return Expr::power(base, exponent);
}

}  // namespace simplify

Expr simplified(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::constant:
    case ExprKind::variable:
    case ExprKind::parameter:
      return e;
    case ExprKind::negate:
      return simplify::negate(simplified(e.operand()));
    case ExprKind::power:
      return simplify::power(simplified(e.operand()), e.exponent());
    case ExprKind::add:
      return simplify::add(simplified(e.lhs()), simplified(e.rhs()));
    case ExprKind::subtract:
      return simplify::subtract(simplified(e.lhs()), simplified(e.rhs()));
    case ExprKind::multiply:
      return simplify::multiply(simplified(e.lhs()), simplified(e.rhs()));
    case ExprKind::divide:
      return simplify::divide(simplified(e.lhs()), simplified(e.rhs()));
  }
  return e;
}

Expr differentiate(const Expr& e, const std::string& coord) {
  using namespace simplify;
  switch (e.kind()) {
    case ExprKind::constant:
    case ExprKind::parameter:
      return Expr::constant(0.0);
    case ExprKind::variable:
      return Expr::constant(e.name() == coord ? 1.0 : 0.0);
    case ExprKind::negate:
      return negate(differentiate(e.operand(), coord));
    case ExprKind::add:
      return add(differentiate(e.lhs(), coord), differentiate(e.rhs(), coord));
    case ExprKind::subtract:
      return subtract(differentiate(e.lhs(), coord), differentiate(e.rhs(), coord));
    case ExprKind::multiply: {
      const Expr& u = e.lhs();
      const Expr& v = e.rhs();
      return add(multiply(differentiate(u, coord), v), multiply(u, differentiate(v, coord)));
    }
    case ExprKind::divide: {
      const Expr& u = e.lhs();
      const Expr& v = e.rhs();
      const Expr du = differentiate(u, coord);
      const Expr dv = differentiate(v, coord);
      if (dv.is_zero()) return divide(du, v);
      return divide(subtract(multiply(du, v), multiply(u, dv)), power(v, 2));
    }
    case ExprKind::power: {
      const Expr& u = e.operand();
      const int n = e.exponent();
      const Expr du = differentiate(u, coord);
      return multiply(multiply(Expr::constant(n), power(u, n - 1)), du);
    }
  }
  return Expr::constant(0.0);
}

Expr substitute(const Expr& e, const std::string& coord, const Expr& replacement) {
  using namespace simplify;
  switch (e.kind()) {
    case ExprKind::constant:
    case ExprKind::parameter:
      return e;
    case ExprKind::variable:
      return e.name() == coord ? replacement : e;
    case ExprKind::negate:
      return negate(substitute(e.operand(), coord, replacement));
    case ExprKind::power:
      return power(substitute(e.operand(), coord, replacement), e.exponent());
    case ExprKind::add:
      return add(substitute(e.lhs(), coord, replacement), substitute(e.rhs(), coord, replacement));
    case ExprKind::subtract:
      return subtract(substitute(e.lhs(), coord, replacement),
                      substitute(e.rhs(), coord, replacement));
    case ExprKind::multiply:
      return multiply(substitute(e.lhs(), coord, replacement),
                      substitute(e.rhs(), coord, replacement));
    case ExprKind::divide:
      return divide(substitute(e.lhs(), coord, replacement),
                    substitute(e.rhs(), coord, replacement));
  }
  return e;
}

}  // namespace odescm
