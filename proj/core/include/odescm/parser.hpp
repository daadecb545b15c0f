#pragma once

#include <string_view>

#include "odescm/expr.hpp"
#include "odescm/model_spec.hpp"

namespace odescm {

/// Parses a single expression, resolving identifiers against `layout`
/// (variables first, then parameters).
Expr parse_expression(std::string_view text, const Layout& layout);

}  // namespace odescm
