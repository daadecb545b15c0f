#include "odescm/lee.hpp"

#include <algorithm>
#include <cmath>

#include "odescm/errors.hpp"
#include "odescm/rng.hpp"

namespace odescm {

namespace {

constexpr double kDomainSlack = 1e-9;

std::string tuple_text(const std::vector<Expr>& exprs) {
  if (exprs.size() == 1) return exprs[0].to_string();
  std::string out = "(";
  for (std::size_t k = 0; k < exprs.size(); ++k) {
    if (k) out += ", ";
    out += exprs[k].to_string();
  }
  return out + ")";
}

}  // namespace

Lee::Lee(Layout layout, std::vector<LabeledEquation> equations, std::vector<double> reference)
    : layout_(std::move(layout)), equations_(std::move(equations)), reference_(std::move(reference)) {
  if (equations_.size() != layout_.block_count()) throw InvalidArgument("one labeled equation per block required");
  if (reference_.size() != layout_.dimension()) throw InvalidArgument("reference state has wrong dimension");
  for (std::size_t b = 0; b < equations_.size(); ++b) {
    const auto& eq = equations_[b];
    const std::size_t d = layout_.blocks[b].coordinates.size();
    if (eq.clamp ? eq.xi.size() != d : eq.body.size() != d) {
      throw InvalidArgument("equation of '" + layout_.blocks[b].name + "' does not match the block dimension");
    }
  }
}

std::vector<Expr> Lee::residual_exprs(std::size_t block) const {
  const auto& eq = equations_.at(block);
  if (!eq.clamp) return eq.body;
  std::vector<Expr> out;
  const auto& coords = layout_.blocks[block].coordinates;
  for (std::size_t k = 0; k < coords.size(); ++k) {
    out.push_back(Expr::subtract(Expr::variable(layout_.variables[coords[k]].name), Expr::constant(eq.xi[k])));
  }
  return out;
}

double Lee::residual(std::span<const double> x) const {
  if (x.size() != layout_.dimension()) throw InvalidArgument("state has wrong dimension");
  double r = 0.0;
  std::map<std::string, double> vars, params;
  for (std::size_t c = 0; c < x.size(); ++c) vars[layout_.variables[c].name] = x[c];
  for (const auto& p : layout_.parameters) params[p.name] = p.value;
  const Valuation env = make_valuation(vars, params);
  for (std::size_t b = 0; b < equations_.size(); ++b) {
    for (const Expr& e : residual_exprs(b)) r = std::max(r, std::abs(eval_expr(e, env)));
  }
  return r;
}

Lee lee_from_ode(const OdeSystem& sys) {
  const Layout& layout = sys.layout();
  std::vector<LabeledEquation> eqs(layout.block_count());
  for (std::size_t b = 0; b < layout.block_count(); ++b) {
    auto& eq = eqs[b];
    if (sys.is_clamped(b)) {
      eq.clamp = true;
      eq.xi = *sys.clamp(b);
      eq.parents = {b};
      continue;
    }
    for (std::size_t c : layout.blocks[b].coordinates) eq.body.push_back(sys.spec().dynamics[c]);
    eq.parents = sys.parents(b);
  }
  return Lee(layout, std::move(eqs), std::vector<double>(sys.initial_state().begin(), sys.initial_state().end()));
}

Lee intervene_lee(const Lee& lee, const Intervention& iv) {
  validate(lee.layout(), iv);
  std::vector<LabeledEquation> eqs = lee.equations();
  std::vector<double> reference(lee.reference().begin(), lee.reference().end());
  for (const auto& [b, vals] : iv.targets()) {
    eqs[b] = LabeledEquation{true, {}, vals, {b}};
    const auto& coords = lee.layout().blocks[b].coordinates;
    for (std::size_t k = 0; k < coords.size(); ++k) reference[coords[k]] = vals[k];
  }
  return Lee(lee.layout(), std::move(eqs), std::move(reference));
}

std::string render(const Lee& lee) {
  std::string out;
  for (std::size_t b = 0; b < lee.size(); ++b) {
    out += "E[" + lee.layout().blocks[b].name + "]: 0 = " + tuple_text(lee.residual_exprs(b)) + "\n";
  }
  return out;
}

Digraph lee_graph(const Lee& lee) {
  std::vector<std::string> names;
  std::vector<std::vector<std::size_t>> parents;
  for (std::size_t b = 0; b < lee.size(); ++b) {
    names.push_back(lee.layout().blocks[b].name);
    parents.push_back(lee.equation(b).parents);
  }
  return Digraph::from_parents(std::move(names), parents);
}

SolveResult solve_lee(const Lee& lee, const LeeSolveOptions& options) {
  const Layout& layout = lee.layout();
  const std::size_t n = layout.dimension();

  std::vector<double> base(lee.reference().begin(), lee.reference().end());
  std::vector<std::size_t> unknowns;
  std::vector<CompiledExpr> rows;
  std::vector<std::vector<std::pair<std::size_t, CompiledExpr>>> partials;
  std::vector<std::ptrdiff_t> slot(n, -1);
  for (std::size_t b = 0; b < lee.size(); ++b) {
    const auto& eq = lee.equation(b);
    const auto& coords = layout.blocks[b].coordinates;
    if (eq.clamp) {
      for (std::size_t k = 0; k < coords.size(); ++k) base[coords[k]] = eq.xi[k];
      continue;
    }
    for (std::size_t c : coords) {
      slot[c] = static_cast<std::ptrdiff_t>(unknowns.size());
      unknowns.push_back(c);
    }
  }
  for (std::size_t b = 0; b < lee.size(); ++b) {
    const auto& eq = lee.equation(b);
    if (eq.clamp) continue;
    for (const Expr& g : eq.body) {
      rows.push_back(layout.compile(g));
      auto& row = partials.emplace_back();
      for (const auto& name : free_coords(g)) {
        const std::size_t c = *layout.find_variable(name);
        if (slot[c] < 0) continue;
        Expr d = differentiate(g, name);
        if (!d.is_zero()) row.emplace_back(static_cast<std::size_t>(slot[c]), layout.compile(d));
      }
    }
  }

  auto expand = [&](std::span<const double> u) {
    std::vector<double> x = base;
    for (std::size_t k = 0; k < unknowns.size(); ++k) x[unknowns[k]] = u[k];
    return x;
  };
  const ResidualFn residual = [&](std::span<const double> u, std::span<double> out) {
    const auto x = expand(u);
    for (std::size_t r = 0; r < rows.size(); ++r) out[r] = rows[r](x);
  };
  const JacobianFn jacobian = [&](std::span<const double> u) {
    const auto x = expand(u);
    Matrix j(rows.size(), unknowns.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (const auto& [c, d] : partials[r]) j(r, c) = d(x);
    }
    return j;
  };
  const auto admissible = [&](std::span<const double> u) {
    for (std::size_t k = 0; k < unknowns.size(); ++k) {
      if (layout.variables[unknowns[k]].domain.distance(u[k]) > kDomainSlack) return false;
    }
    return true;
  };

  const Box box = options.box ? *options.box : Box::around(layout, base);
  if (box.dimension() != n) throw InvalidArgument("start box has wrong dimension");
  std::vector<std::vector<double>> starts;
  const std::size_t count = std::max<std::size_t>(1, options.newton.starts);
  starts.reserve(count);
  auto project = [&](const std::vector<double>& x) {
    std::vector<double> u(unknowns.size());
    for (std::size_t k = 0; k < unknowns.size(); ++k) u[k] = x[unknowns[k]];
    return u;
  };
  starts.push_back(project(base));
  for (std::size_t k = 1; k < count; ++k) {
    Rng rng = Rng::stream(options.newton.seed, k);
    starts.push_back(project(box.sample(rng)));
  }

  SolveResult result = multistart_newton(residual, jacobian, starts, options.newton, admissible);
  for (auto& s : result.solutions) s = expand(s);
  if (result.solution) result.solution = expand(*result.solution);
  return result;
}

}  // namespace odescm
