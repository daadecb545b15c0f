#include "odescm/ode_system.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "odescm/box.hpp"
#include "odescm/errors.hpp"
#include "odescm/rng.hpp"

namespace odescm {

namespace {

constexpr std::uint64_t kProbeSeed = 0x6e6f6e636f6e7374ULL;
constexpr int kProbePoints = 50;
constexpr double kProbeThreshold = 1e-12;

}  // namespace

OdeSystem::OdeSystem(ModelSpec spec) : OdeSystem(std::move(spec), {}) {}

OdeSystem::OdeSystem(ModelSpec spec, std::vector<std::optional<std::vector<double>>> clamps)
    : spec_(std::move(spec)), clamps_(std::move(clamps)) {
  validate(spec_);
  const Layout& layout = spec_.layout;
  if (clamps_.empty()) clamps_.resize(layout.block_count());
  if (clamps_.size() != layout.block_count()) throw InvalidArgument("one clamp slot per block required");

  const std::size_t n = layout.dimension();
  coord_parents_.resize(n);
  compiled_.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    const Expr& f = spec_.dynamics[r];
    for (const auto& name : free_coords(f)) coord_parents_[r].push_back(*layout.find_variable(name));
    std::sort(coord_parents_[r].begin(), coord_parents_[r].end());
    compiled_.push_back(layout.compile(f));
    for (std::size_t c : coord_parents_[r]) {
      Expr d = differentiate(f, layout.variables[c].name);
      if (d.is_zero()) continue;
      partials_.push_back({r, c, layout.compile(d)});
    }
  }

  block_parents_.resize(layout.block_count());
  for (std::size_t b = 0; b < layout.block_count(); ++b) {
    std::set<std::size_t> pa;
    for (std::size_t r : layout.blocks[b].coordinates) {
      for (std::size_t c : coord_parents_[r]) pa.insert(layout.block_of(c));
    }
    block_parents_[b].assign(pa.begin(), pa.end());
  }
  probe_non_constancy();
}

void OdeSystem::probe_non_constancy() {
  const Layout& layout = spec_.layout;
  const Box box = Box::around(layout, spec_.initial);
  Rng rng(kProbeSeed);
  for (std::size_t r = 0; r < layout.dimension(); ++r) {
    for (std::size_t c : coord_parents_[r]) {
      bool evaluated = false;
      bool varies = false;
      for (int k = 0; k < kProbePoints && !varies; ++k) {
        std::vector<double> x = box.sample(rng);
        std::vector<double> y = x;
        const double lo = box.lower[c], hi = box.upper[c];
        y[c] = lo == hi ? x[c] + 1.0 : rng.uniform(lo, hi);
        try {
          const double fx = compiled_[r](x);
          const double fy = compiled_[r](y);
          evaluated = true;
          if (std::abs(fx - fy) > kProbeThreshold) varies = true;
        } catch (const EvalError&) {
          // singular probe point, try another
        }
      }
      if (evaluated && !varies) {
        warnings_.push_back("dynamics of '" + layout.variables[r].name + "' did not vary with '" +
                            layout.variables[c].name + "' at any probe point; semantic constancy suspected");
      }
    }
  }
}

void OdeSystem::drift(std::span<const double> x, std::span<double> out) const {
  for (std::size_t r = 0; r < compiled_.size(); ++r) out[r] = compiled_[r](x);
}

std::vector<double> OdeSystem::drift(std::span<const double> x) const {
  if (x.size() != dimension()) throw InvalidArgument("state has wrong dimension");
  std::vector<double> out(dimension());
  drift(x, out);
  return out;
}

Matrix OdeSystem::jacobian(std::span<const double> x) const {
  if (x.size() != dimension()) throw InvalidArgument("state has wrong dimension");
  Matrix j(dimension(), dimension());
  for (const Partial& p : partials_) j(p.row, p.col) = p.value(x);
  return j;
}

OdeSystem build_system(ModelSpec spec) { return OdeSystem(std::move(spec)); }

OdeSystem intervene_hard(const OdeSystem& sys, const Intervention& iv) {
  validate(sys.layout(), iv);
  ModelSpec spec = sys.spec();
  auto clamps = sys.clamps_;
  for (const auto& [blk, vals] : iv.targets()) {
    const auto& coords = spec.layout.blocks[blk].coordinates;
    for (std::size_t k = 0; k < coords.size(); ++k) {
      spec.dynamics[coords[k]] = Expr::constant(0.0);
      spec.initial[coords[k]] = vals[k];
    }
    clamps[blk] = vals;
  }
  return OdeSystem(std::move(spec), std::move(clamps));
}

OdeSystem intervene_soft(const OdeSystem& sys, const Intervention& iv, double kappa) {
  if (!(kappa > 0) || !std::isfinite(kappa)) throw InvalidArgument("soft intervention gain must be positive");
  validate(sys.layout(), iv);
  ModelSpec spec = sys.spec();
  auto clamps = sys.clamps_;
  for (const auto& [blk, vals] : iv.targets()) {
    const auto& coords = spec.layout.blocks[blk].coordinates;
    for (std::size_t k = 0; k < coords.size(); ++k) {
      const std::size_t c = coords[k];
      Expr feedback = Expr::multiply(Expr::constant(kappa),
                                     Expr::subtract(Expr::constant(vals[k]), Expr::variable(spec.layout.variables[c].name)));
      spec.dynamics[c] = Expr::add(spec.dynamics[c], feedback);
    }
    clamps[blk].reset();
  }
  return OdeSystem(std::move(spec), std::move(clamps));
}

Digraph block_graph(const OdeSystem& sys) {
  std::vector<std::string> names;
  for (const auto& b : sys.layout().blocks) names.push_back(b.name);
  return Digraph::from_parents(std::move(names), sys.parent_sets());
}

Digraph coordinate_graph(const OdeSystem& sys) {
  std::vector<std::string> names;
  std::vector<std::vector<std::size_t>> parents;
  for (std::size_t r = 0; r < sys.dimension(); ++r) {
    names.push_back(sys.layout().variables[r].name);
    parents.push_back(sys.coordinate_parents(r));
  }
  return Digraph::from_parents(std::move(names), parents);
}

}  // namespace odescm
