#include "odescm/model_spec.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "odescm/errors.hpp"

namespace odescm {

bool Interval::contains(double x) const noexcept {
  if (std::isnan(x)) return false;
  const bool above = lower_closed ? x >= lower : x > lower;
  const bool below = upper_closed ? x <= upper : x < upper;
  return above && below;
}

double Interval::distance(double x) const noexcept {
  if (x < lower) return lower - x;
  if (x > upper) return x - upper;
  return 0.0;
}

namespace {

std::string format_bound(double v) {
  if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
  return format_real(v);
}

}  // namespace

std::string Interval::to_string() const {
  std::string out;
  out += lower_closed ? '[' : '(';
  out += format_bound(lower);
  out += ',';
  out += format_bound(upper);
  out += upper_closed ? ']' : ')';
  return out;
}

std::optional<std::size_t> Layout::find_variable(std::string_view name) const {
  for (std::size_t i = 0; i < variables.size(); ++i) {
    if (variables[i].name == name) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> Layout::find_parameter(std::string_view name) const {
  auto it = std::lower_bound(parameters.begin(), parameters.end(), name,
                             [](const Parameter& p, std::string_view n) { return p.name < n; });
  if (it != parameters.end() && it->name == name) return static_cast<std::size_t>(it - parameters.begin());
  return std::nullopt;
}

std::optional<std::size_t> Layout::find_block(std::string_view name) const {
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (blocks[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t Layout::block_of(std::size_t coord) const {
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& cs = blocks[b].coordinates;
    if (std::find(cs.begin(), cs.end(), coord) != cs.end()) return b;
  }
  throw InvalidArgument("coordinate index " + std::to_string(coord) + " belongs to no block");
}

double Layout::parameter_value(std::string_view name) const {
  auto idx = find_parameter(name);
  if (!idx) throw UnboundName(std::string(name));
  return parameters[*idx].value;
}

CompiledExpr Layout::compile(const Expr& e) const {
  return CompiledExpr(
      e, [this](const std::string& n) { return find_variable(n); },
      [this](const std::string& n) -> std::optional<double> {
        auto idx = find_parameter(n);
        if (!idx) return std::nullopt;
        return parameters[*idx].value;
      });
}

std::string format_tuple(std::span<const double> values) {
  if (values.size() == 1) return format_real(values[0]);
  std::string out = "(";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += format_real(values[i]);
  }
  out += ')';
  return out;
}

std::string print_model(const ModelSpec& spec) {
  const Layout& layout = spec.layout;
  std::string out;
  for (const auto& p : layout.parameters) {
    out += "param " + p.name + " = " + format_real(p.value) + "\n";
  }
  for (const auto& v : layout.variables) {
    out += "var " + v.name + " in " + v.domain.to_string() + "\n";
  }
  for (const auto& b : layout.blocks) {
    const bool implicit = b.coordinates.size() == 1 && layout.variables[b.coordinates[0]].name == b.name;
    if (implicit) continue;
    out += "block " + b.name + " = (";
    for (std::size_t k = 0; k < b.coordinates.size(); ++k) {
      if (k) out += ", ";
      out += layout.variables[b.coordinates[k]].name;
    }
    out += ")\n";
  }
  for (std::size_t i = 0; i < layout.variables.size(); ++i) {
    out += "dyn " + layout.variables[i].name + " = " + spec.dynamics[i].to_string() + "\n";
  }
  for (std::size_t i = 0; i < layout.variables.size(); ++i) {
    out += "init " + layout.variables[i].name + " = " + format_real(spec.initial[i]) + "\n";
  }
  return out;
}

void validate(const ModelSpec& spec) {
  const Layout& layout = spec.layout;
  if (layout.variables.empty()) throw ParseError("model declares no variables", 0, 0);
  std::set<std::string> names;
  for (const auto& p : layout.parameters) {
    if (!names.insert(p.name).second) throw ParseError("duplicate declaration of '" + p.name + "'", 0, 0);
  }
  for (const auto& v : layout.variables) {
    if (!names.insert(v.name).second) throw ParseError("duplicate declaration of '" + v.name + "'", 0, 0);
  }
  if (!std::is_sorted(layout.parameters.begin(), layout.parameters.end(),
                      [](const Parameter& a, const Parameter& b) { return a.name < b.name; })) {
    throw ParseError("parameters must be sorted by name", 0, 0);
  }
  std::vector<int> owner(layout.variables.size(), -1);
  std::size_t expected = 0;
  std::set<std::string> block_names;
  for (std::size_t b = 0; b < layout.blocks.size(); ++b) {
    const Block& blk = layout.blocks[b];
    if (blk.coordinates.empty()) throw ParseError("block '" + blk.name + "' is empty", 0, 0);
    if (!block_names.insert(blk.name).second) {
      throw ParseError("duplicate declaration of block '" + blk.name + "'", 0, 0);
    }
    for (std::size_t c : blk.coordinates) {
      if (c != expected++) throw ParseError("block coordinates must be contiguous", 0, 0);
      owner[c] = static_cast<int>(b);
    }
  }
  if (expected != layout.variables.size()) throw ParseError("every coordinate needs a block", 0, 0);
  if (spec.dynamics.size() != layout.variables.size()) {
    throw ParseError("every coordinate needs exactly one dynamics expression", 0, 0);
  }
  if (spec.initial.size() != layout.variables.size()) {
    throw ParseError("every coordinate needs exactly one initial value", 0, 0);
  }
  for (std::size_t i = 0; i < spec.dynamics.size(); ++i) {
    for (const auto& n : free_coords(spec.dynamics[i])) {
      if (!layout.find_variable(n)) throw ParseError("unknown identifier '" + n + "'", 0, 0);
    }
    for (const auto& n : free_params(spec.dynamics[i])) {
      if (!layout.find_parameter(n)) throw ParseError("unknown identifier '" + n + "'", 0, 0);
    }
    if (!layout.variables[i].domain.contains(spec.initial[i])) {
      throw ParseError("initial value of '" + layout.variables[i].name + "' lies outside its domain " +
                           layout.variables[i].domain.to_string(),
                       0, 0);
    }
  }
}

}  // namespace odescm
