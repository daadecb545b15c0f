#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "odescm/expr.hpp"

namespace odescm {

/// Stack-machine form of an Expr with coordinate references resolved to
/// state-vector indices and parameters folded to their values. Evaluation
/// follows the same operation order as eval_expr, so both agree bit for bit.
class CompiledExpr {
 public:
  using CoordinateIndex = std::function<std::optional<std::size_t>(const std::string&)>;
  using ParameterValue = std::function<std::optional<double>(const std::string&)>;

  CompiledExpr() = default;
  CompiledExpr(const Expr& e, const CoordinateIndex& coords, const ParameterValue& params);

  /// Throws DivisionByZero.
  double operator()(std::span<const double> state) const;

  bool is_constant_zero() const noexcept {
    return code_.size() == 1 && code_[0].op == Op::push_const && code_[0].value == 0.0;
  }

 private:
  enum class Op : unsigned char { push_const, push_var, negate, add, subtract, multiply, divide, power };
  struct Instruction {
    Op op;
    int exponent = 0;
    std::size_t index = 0;
    double value = 0.0;
  };

  void emit(const Expr& e, const CoordinateIndex& coords, const ParameterValue& params,
            std::size_t depth);

  std::vector<Instruction> code_;
  std::size_t max_depth_ = 0;
};

}  // namespace odescm
