#include "odescm/intervention.hpp"

#include <charconv>
#include <cmath>

#include "odescm/errors.hpp"

namespace odescm {

Intervention& Intervention::set(std::size_t block, std::vector<double> values) {
  targets_[block] = std::move(values);
  return *this;
}

std::vector<std::size_t> Intervention::target_set() const {
  std::vector<std::size_t> out;
  out.reserve(targets_.size());
  for (const auto& [b, v] : targets_) out.push_back(b);
  return out;
}

Intervention Intervention::combine(const Intervention& a, const Intervention& b) {
  Intervention out = a;
  for (const auto& [blk, vals] : b.targets_) {
    if (out.targets_.count(blk)) throw InvalidArgument("interventions to combine must target disjoint blocks");
    out.targets_[blk] = vals;
  }
  return out;
}

std::string Intervention::describe(const Layout& layout) const {
  std::string out = "do(";
  bool first = true;
  for (const auto& [blk, vals] : targets_) {
    if (!first) out += ", ";
    first = false;
    out += blk < layout.blocks.size() ? layout.blocks[blk].name : "#" + std::to_string(blk);
    out += "=";
    out += format_tuple(vals);
  }
  out += ")";
  return out;
}

void validate(const Layout& layout, const Intervention& iv) {
  for (const auto& [blk, vals] : iv.targets()) {
    if (blk >= layout.block_count()) {
      throw InvalidArgument("intervention targets unknown block index " + std::to_string(blk));
    }
    const Block& b = layout.blocks[blk];
    if (vals.size() != b.coordinates.size()) {
      throw InvalidArgument("intervention on block '" + b.name + "' needs " +
                            std::to_string(b.coordinates.size()) + " values");
    }
    for (std::size_t k = 0; k < vals.size(); ++k) {
      const Variable& var = layout.variables[b.coordinates[k]];
      if (!var.domain.contains(vals[k])) {
        throw DomainError("intervention value " + format_real(vals[k]) + " for '" + var.name +
                          "' lies outside its domain " + var.domain.to_string());
      }
    }
  }
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

double parse_value(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw InvalidArgument("invalid intervention value '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

Intervention parse_intervention(const Layout& layout, std::string_view text) {
  // Collect explicit coordinate assignments per block first.
  std::map<std::size_t, std::map<std::size_t, double>> assigned;
  std::size_t start = 0;
  text = trim(text);
  if (text.empty()) return {};
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view item = trim(text.substr(start, end - start));
    const std::size_t eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw InvalidArgument("intervention item '" + std::string(item) + "' must look like NAME=VALUE");
    }
    const std::string name(trim(item.substr(0, eq)));
    const double value = parse_value(item.substr(eq + 1));
    std::size_t coord = 0;
    if (auto blk = layout.find_block(name); blk && layout.blocks[*blk].coordinates.size() == 1) {
      coord = layout.blocks[*blk].coordinates[0];
    } else if (auto var = layout.find_variable(name)) {
      coord = *var;
    } else if (blk) {
      throw InvalidArgument("block '" + name + "' has several coordinates; clamp them by coordinate name");
    } else {
      throw InvalidArgument("unknown intervention target '" + name + "'");
    }
    const std::size_t blk = layout.block_of(coord);
    if (!assigned[blk].emplace(coord, value).second) {
      throw InvalidArgument("coordinate '" + layout.variables[coord].name + "' assigned twice");
    }
    start = end + 1;
  }
  Intervention iv;
  for (const auto& [blk, coords] : assigned) {
    std::vector<double> vals;
    for (std::size_t c : layout.blocks[blk].coordinates) {
      auto it = coords.find(c);
      vals.push_back(it == coords.end() ? 0.0 : it->second);
    }
    iv.set(blk, std::move(vals));
  }
  validate(layout, iv);
  return iv;
}

InterventionSampler box_sampler(const Layout& layout, Box box) {
  return [blocks = layout.blocks, box = std::move(box)](const std::vector<std::size_t>& targets, Rng& rng) {
    Intervention iv;
    for (std::size_t b : targets) {
      std::vector<double> vals;
      for (std::size_t c : blocks.at(b).coordinates) {
        vals.push_back(box.lower[c] == box.upper[c] ? box.lower[c] : rng.uniform(box.lower[c], box.upper[c]));
      }
      iv.set(b, std::move(vals));
    }
    return iv;
  };
}

}  // namespace odescm
