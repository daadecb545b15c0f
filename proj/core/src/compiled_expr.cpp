#include "odescm/compiled_expr.hpp"

#include <algorithm>
#include <cstdlib>

#include "odescm/errors.hpp"

namespace odescm {

CompiledExpr::CompiledExpr(const Expr& e, const CoordinateIndex& coords, const ParameterValue& params) {
  emit(e, coords, params, 1);
}

void CompiledExpr::emit(const Expr& e, const CoordinateIndex& coords, const ParameterValue& params,
                        std::size_t depth) {
  max_depth_ = std::max(max_depth_, depth);
  switch (e.kind()) {
    case ExprKind::constant:
      code_.push_back({Op::push_const, 0, 0, e.value()});
      return;
    case ExprKind::variable: {
      auto idx = coords(e.name());
      if (!idx) throw UnboundName(e.name());
      code_.push_back({Op::push_var, 0, *idx, 0.0});
      return;
    }
    case ExprKind::parameter: {
      auto v = params(e.name());
      if (!v) throw UnboundName(e.name());
      code_.push_back({Op::push_const, 0, 0, *v});
      return;
    }
    case ExprKind::negate:
      emit(e.operand(), coords, params, depth);
      code_.push_back({Op::negate});
      return;
    case ExprKind::power:
      emit(e.operand(), coords, params, depth);
      code_.push_back({Op::power, e.exponent()});
      return;
    default:
      break;
  }
  emit(e.lhs(), coords, params, depth);
  emit(e.rhs(), coords, params, depth + 1);
  switch (e.kind()) {
    case ExprKind::add:
      code_.push_back({Op::add});
      break;
    case ExprKind::subtract:
      code_.push_back({Op::subtract});
      break;
    case ExprKind::multiply:
      code_.push_back({Op::multiply});
      break;
    default:
      code_.push_back({Op::divide});
      break;
  }
}

double CompiledExpr::operator()(std::span<const double> state) const {
  constexpr std::size_t small = 32;
  double small_stack[small];
  std::vector<double> big;
  double* stack = small_stack;
  if (max_depth_ > small) {
    big.resize(max_depth_);
    stack = big.data();
  }
  std::size_t top = 0;
  for (const Instruction& ins : code_) {
    switch (ins.op) {
      case Op::push_const:
        stack[top++] = ins.value;
        break;
      case Op::push_var:
        stack[top++] = state[ins.index];
        break;
      case Op::negate:
        stack[top - 1] = -stack[top - 1];
        break;
      case Op::add:
        --top;
        stack[top - 1] = stack[top - 1] + stack[top];
        break;
      case Op::subtract:
        --top;
        stack[top - 1] = stack[top - 1] - stack[top];
        break;
      case Op::multiply:
        --top;
        stack[top - 1] = stack[top - 1] * stack[top];
        break;
      case Op::divide:
        --top;
        if (stack[top] == 0.0) throw DivisionByZero();
        stack[top - 1] = stack[top - 1] / stack[top];
        break;
      case Op::power: {
        const double base = stack[top - 1];
        const int n = ins.exponent;
        if (n < 0 && base == 0.0) throw DivisionByZero();
        double result = 1.0;
        for (int k = 0; k < std::abs(n); ++k) result *= base;
        stack[top - 1] = n < 0 ? 1.0 / result : result;
        break;
      }
    }
  }
  return top == 0 ? 0.0 : stack[0];
}

}  // namespace odescm
