#include "odescm/scm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <Eigen/Dense>

#include "odescm/errors.hpp"
#include "odescm/rng.hpp"

namespace odescm {

namespace {

constexpr std::size_t kMaxClosedFormDim = 4;
constexpr double kDegenerateDet = 1e-12;
constexpr double kInnerTol = 1e-10;
constexpr std::size_t kInnerIterations = 100;
constexpr int kAffineProbes = 20;
constexpr int kDependenceProbes = 50;
constexpr double kDependenceThreshold = 1e-12;
constexpr std::uint64_t kAffineSeed = 0x616666696e65ULL;

using ExprMatrix = std::vector<std::vector<Expr>>;

Expr symbolic_det(const ExprMatrix& a) {
  const std::size_t n = a.size();
  if (n == 1) return a[0][0];
  if (n == 2) return simplify::subtract(simplify::multiply(a[0][0], a[1][1]), simplify::multiply(a[0][1], a[1][0]));
  Expr sum = Expr::constant(0.0);
  for (std::size_t col = 0; col < n; ++col) {
    if (a[0][col].is_zero()) continue;
    ExprMatrix minor;
    for (std::size_t r = 1; r < n; ++r) {
      std::vector<Expr> row;
      for (std::size_t c = 0; c < n; ++c) {
        if (c != col) row.push_back(a[r][c]);
      }
      minor.push_back(std::move(row));
    }
    const Expr term = simplify::multiply(a[0][col], symbolic_det(minor));
    sum = col % 2 == 0 ? simplify::add(sum, term) : simplify::subtract(sum, term);
  }
  return sum;
}

Expr zero_own(Expr e, const Layout& layout, const std::vector<std::size_t>& coords) {
  for (std::size_t c : coords) e = substitute(e, layout.variables[c].name, Expr::constant(0.0));
  return e;
}

// True when every second partial in the block's own coordinates vanishes,
// symbolically or, failing that, at sampled points.
bool is_affine(const std::vector<Expr>& body, const Layout& layout, const std::vector<std::size_t>& coords,
               std::span<const double> reference) {
  const Box box = Box::around(layout, reference);
  for (const Expr& g : body) {
    for (std::size_t a : coords) {
      const Expr da = differentiate(g, layout.variables[a].name);
      for (std::size_t b : coords) {
        const Expr dab = differentiate(da, layout.variables[b].name);
        if (dab.is_zero()) continue;
        const CompiledExpr f = layout.compile(dab);
        Rng rng(kAffineSeed);
        for (int k = 0; k < kAffineProbes; ++k) {
          try {
            if (f(box.sample(rng)) != 0.0) return false;
          } catch (const EvalError&) {
            return false;
          }
        }
      }
    }
  }
  return true;
}

Mechanism make_mechanism(const Lee& lee, std::size_t block) {
  const Layout& layout = lee.layout();
  const LabeledEquation& eq = lee.equation(block);
  Mechanism m;
  if (eq.clamp) {
    m.kind = MechanismKind::clamp;
    m.values = eq.xi;
    return m;
  }
  for (std::size_t p : eq.parents) {
    if (p != block) m.parents.push_back(p);
  }
  const auto& coords = layout.blocks[block].coordinates;
  const std::size_t d = coords.size();
  if (d <= kMaxClosedFormDim && is_affine(eq.body, layout, coords, lee.reference())) {
    ExprMatrix a(d, std::vector<Expr>(d));
    std::vector<Expr> rhs(d);
    for (std::size_t r = 0; r < d; ++r) {
      for (std::size_t c = 0; c < d; ++c) {
        a[r][c] = zero_own(differentiate(eq.body[r], layout.variables[coords[c]].name), layout, coords);
      }
      rhs[r] = simplify::negate(zero_own(eq.body[r], layout, coords));
    }
    m.kind = MechanismKind::closed_form;
    m.determinant = simplified(symbolic_det(a));
    for (std::size_t k = 0; k < d; ++k) {
      ExprMatrix ak = a;
      for (std::size_t r = 0; r < d; ++r) ak[r][k] = rhs[r];
      m.closed.push_back(simplified(simplify::divide(symbolic_det(ak), m.determinant)));
    }
    return m;
  }
  m.kind = MechanismKind::implicit;
  m.equation = eq.body;
  for (std::size_t c : coords) m.hint.push_back(lee.reference()[c]);
  return m;
}

std::string tuple_text(const std::vector<Expr>& exprs) {
  if (exprs.size() == 1) return exprs[0].to_string();
  std::string out = "(";
  for (std::size_t k = 0; k < exprs.size(); ++k) {
    if (k) out += ", ";
    out += exprs[k].to_string();
  }
  return out + ")";
}

bool has_cycle(const Scm& scm) {
  std::vector<int> state(scm.size(), 0);
  auto visit = [&](auto&& self, std::size_t i) -> bool {
    if (state[i] == 1) return true;
    if (state[i] == 2) return false;
    state[i] = 1;
    for (std::size_t p : scm.mechanism(i).parents) {
      if (self(self, p)) return true;
    }
    state[i] = 2;
    return false;
  };
  for (std::size_t i = 0; i < scm.size(); ++i) {
    if (visit(visit, i)) return true;
  }
  return false;
}

std::vector<std::size_t> topological_order(const Scm& scm) {
  std::vector<std::size_t> order;
  std::vector<bool> done(scm.size(), false);
  while (order.size() < scm.size()) {
    for (std::size_t i = 0; i < scm.size(); ++i) {
      if (done[i]) continue;
      const auto& pa = scm.mechanism(i).parents;
      if (std::all_of(pa.begin(), pa.end(), [&](std::size_t p) { return done[p]; })) {
        done[i] = true;
        order.push_back(i);
        break;
      }
    }
  }
  return order;
}

}  // namespace

std::string_view to_string(MechanismKind k) {
  switch (k) {
    case MechanismKind::closed_form: return "closed-form";
    case MechanismKind::implicit: return "implicit";
    case MechanismKind::clamp: return "clamp";
  }
  return "unknown";
}

Scm::Scm(Layout layout, std::vector<Mechanism> mechanisms, std::vector<double> reference)
    : layout_(std::move(layout)), mechanisms_(std::move(mechanisms)), reference_(std::move(reference)) {
  if (mechanisms_.size() != layout_.block_count()) throw InvalidArgument("one mechanism per block required");
  if (reference_.size() != layout_.dimension()) throw InvalidArgument("reference state has wrong dimension");
  compiled_.resize(mechanisms_.size());
  for (std::size_t b = 0; b < mechanisms_.size(); ++b) {
    const Mechanism& m = mechanisms_[b];
    const auto& coords = layout_.blocks[b].coordinates;
    if (std::find(m.parents.begin(), m.parents.end(), b) != m.parents.end()) {
      throw InvalidArgument("structural equation of '" + layout_.blocks[b].name + "' has a self-loop");
    }
    if (!std::is_sorted(m.parents.begin(), m.parents.end())) throw InvalidArgument("parent sets must be sorted");
    Compiled& c = compiled_[b];
    switch (m.kind) {
      case MechanismKind::clamp:
        if (m.values.size() != coords.size() || !m.parents.empty()) throw InvalidArgument("malformed clamp mechanism");
        break;
      case MechanismKind::closed_form:
        if (m.closed.size() != coords.size()) throw InvalidArgument("malformed closed-form mechanism");
        for (const Expr& e : m.closed) c.closed.push_back(layout_.compile(e));
        c.determinant = layout_.compile(m.determinant);
        break;
      case MechanismKind::implicit:
        if (m.equation.size() != coords.size() || m.hint.size() != coords.size()) {
          throw InvalidArgument("malformed implicit mechanism");
        }
        for (const Expr& e : m.equation) {
          c.equation.push_back(layout_.compile(e));
          for (std::size_t cc : coords) c.own_jacobian.push_back(layout_.compile(differentiate(e, layout_.variables[cc].name)));
        }
        break;
    }
  }
}

Scm build_scm(const Lee& lee) {
  std::vector<Mechanism> mechs;
  for (std::size_t b = 0; b < lee.size(); ++b) mechs.push_back(make_mechanism(lee, b));
  return Scm(lee.layout(), std::move(mechs), std::vector<double>(lee.reference().begin(), lee.reference().end()));
}

Derivation derive_scm(const Lee& lee, const DeriveOptions& options) {
  const InterventionSampler sampler = options.sampler ? options.sampler : default_xi_sampler(lee);
  StructuralSolvabilityReport report = check_structural_solvability(lee, sampler, options.solvability);
  std::vector<std::string> warnings;
  if (report.verdict != StructuralVerdict::solvable) {
    std::string detail = "structural solvability is '" + std::string(to_string(report.verdict)) + "'";
    for (std::size_t b = 0; b < report.labels.size(); ++b) {
      const auto& label = report.labels[b];
      if (label.verdict == StructuralVerdict::solvable) continue;
      detail += "; label " + lee.layout().blocks[b].name + ": " + std::string(to_string(label.verdict));
      if (label.degenerate) detail += " at " + label.degenerate->describe(lee.layout());
    }
    if (!options.force) throw SolvabilityRefused(detail);
    warnings.push_back("forced derivation: " + detail);
  }
  Scm scm = build_scm(lee);
  return Derivation{std::move(scm), std::move(report), std::move(warnings)};
}

std::vector<double> eval_mechanism(const Scm& scm, std::size_t block, std::span<const double> x) {
  if (x.size() != scm.layout().dimension()) throw InvalidArgument("state has wrong dimension");
  const Mechanism& m = scm.mechanism(block);
  const Scm::Compiled& c = scm.compiled(block);
  const auto& coords = scm.layout().blocks[block].coordinates;
  const std::string& name = scm.layout().blocks[block].name;
  switch (m.kind) {
    case MechanismKind::clamp: return m.values;
    case MechanismKind::closed_form: {
      const double det = c.determinant(x);
      if (!(std::abs(det) > kDegenerateDet)) {
        throw DegenerateMechanism(name, "affine coefficient " + m.determinant.to_string() + " vanishes");
      }
      std::vector<double> out;
      for (const auto& e : c.closed) out.push_back(e(x));
      return out;
    }
    case MechanismKind::implicit: break;
  }

  const std::size_t d = coords.size();
  std::vector<double> state(x.begin(), x.end());
  const ResidualFn residual = [&](std::span<const double> u, std::span<double> out) {
    for (std::size_t k = 0; k < d; ++k) state[coords[k]] = u[k];
    for (std::size_t r = 0; r < d; ++r) out[r] = c.equation[r](state);
  };
  const JacobianFn jacobian = [&](std::span<const double> u) {
    for (std::size_t k = 0; k < d; ++k) state[coords[k]] = u[k];
    Matrix j(d, d);
    for (std::size_t r = 0; r < d; ++r) {
      for (std::size_t k = 0; k < d; ++k) j(r, k) = c.own_jacobian[r * d + k](state);
    }
    return j;
  };
  NewtonOptions opts;
  opts.residual_tol = kInnerTol;
  opts.max_iterations = kInnerIterations;
  static constexpr double offsets[] = {0.0, 1.0, -1.0, 3.0, -3.0, 10.0, -10.0};
  for (double s : offsets) {
    std::vector<double> start = m.hint;
    for (double& v : start) v += s * (1.0 + std::abs(v));
    NewtonRun run = damped_newton(residual, jacobian, start, opts);
    if (run.converged) return run.x;
  }
  throw MechanismSolveError("implicit mechanism of '" + name + "' did not converge");
}

Scm intervene_scm(const Scm& scm, const Intervention& iv) {
  validate(scm.layout(), iv);
  std::vector<Mechanism> mechs = scm.mechanisms();
  std::vector<double> reference(scm.reference().begin(), scm.reference().end());
  for (const auto& [b, vals] : iv.targets()) {
    Mechanism m;
    m.kind = MechanismKind::clamp;
    m.values = vals;
    mechs[b] = std::move(m);
    const auto& coords = scm.layout().blocks[b].coordinates;
    for (std::size_t k = 0; k < coords.size(); ++k) reference[coords[k]] = vals[k];
  }
  return Scm(scm.layout(), std::move(mechs), std::move(reference));
}

double scm_residual(const Scm& scm, std::span<const double> x) {
  double r = 0.0;
  for (std::size_t b = 0; b < scm.size(); ++b) {
    const auto h = eval_mechanism(scm, b, x);
    const auto& coords = scm.layout().blocks[b].coordinates;
    for (std::size_t k = 0; k < coords.size(); ++k) r = std::max(r, std::abs(x[coords[k]] - h[k]));
  }
  return r;
}

SolveResult solve_scm(const Scm& scm, const LeeSolveOptions& options) {
  const Layout& layout = scm.layout();
  const std::size_t n = layout.dimension();
  std::vector<double> base(scm.reference().begin(), scm.reference().end());
  for (std::size_t b = 0; b < scm.size(); ++b) {
    if (scm.mechanism(b).kind != MechanismKind::clamp) continue;
    const auto& coords = layout.blocks[b].coordinates;
    for (std::size_t k = 0; k < coords.size(); ++k) base[coords[k]] = scm.mechanism(b).values[k];
  }

  if (!has_cycle(scm)) {
    SolveResult result;
    result.starts = 1;
    std::vector<double> x = base;
    try {
      for (std::size_t b : topological_order(scm)) {
        const auto h = eval_mechanism(scm, b, x);
        const auto& coords = layout.blocks[b].coordinates;
        for (std::size_t k = 0; k < coords.size(); ++k) x[coords[k]] = h[k];
      }
      result.residual = scm_residual(scm, x);
    } catch (const Error&) {
      result.status = SolveStatus::none_found;
      result.residual = std::numeric_limits<double>::infinity();
      return result;
    }
    result.status = SolveStatus::unique;
    result.converged_starts = 1;
    result.solution = x;
    result.solutions.push_back(std::move(x));
    return result;
  }

  std::vector<std::size_t> unknowns;
  for (std::size_t b = 0; b < scm.size(); ++b) {
    if (scm.mechanism(b).kind == MechanismKind::clamp) continue;
    for (std::size_t c : layout.blocks[b].coordinates) unknowns.push_back(c);
  }
  auto expand = [&](std::span<const double> u) {
    std::vector<double> x = base;
    for (std::size_t k = 0; k < unknowns.size(); ++k) x[unknowns[k]] = u[k];
    return x;
  };
  const ResidualFn residual = [&](std::span<const double> u, std::span<double> out) {
    const auto x = expand(u);
    std::size_t k = 0;
    for (std::size_t b = 0; b < scm.size(); ++b) {
      if (scm.mechanism(b).kind == MechanismKind::clamp) continue;
      const auto h = eval_mechanism(scm, b, x);
      const auto& coords = layout.blocks[b].coordinates;
      for (std::size_t j = 0; j < coords.size(); ++j) out[k++] = x[coords[j]] - h[j];
    }
  };
  const JacobianFn jacobian = [&](std::span<const double> u) {
    return finite_difference_jacobian(residual, u, unknowns.size());
  };
  const auto admissible = [&](std::span<const double> u) {
    for (std::size_t k = 0; k < unknowns.size(); ++k) {
      if (layout.variables[unknowns[k]].domain.distance(u[k]) > 1e-9) return false;
    }
    return true;
  };

  const Box box = options.box ? *options.box : Box::around(layout, base);
  if (box.dimension() != n) throw InvalidArgument("start box has wrong dimension");
  auto project = [&](const std::vector<double>& x) {
    std::vector<double> u(unknowns.size());
    for (std::size_t k = 0; k < unknowns.size(); ++k) u[k] = x[unknowns[k]];
    return u;
  };
  std::vector<std::vector<double>> starts{project(base)};
  for (std::size_t k = 1; k < std::max<std::size_t>(1, options.newton.starts); ++k) {
    Rng rng = Rng::stream(options.newton.seed, k);
    starts.push_back(project(box.sample(rng)));
  }
  SolveResult result = multistart_newton(residual, jacobian, starts, options.newton, admissible);
  for (auto& s : result.solutions) s = expand(s);
  if (result.solution) result.solution = expand(*result.solution);
  return result;
}

Digraph scm_graph(const Scm& scm, std::uint64_t seed) {
  const Layout& layout = scm.layout();
  const Box box = Box::around(layout, scm.reference());
  std::vector<std::vector<std::size_t>> parents(scm.size());
  for (std::size_t i = 0; i < scm.size(); ++i) {
    for (std::size_t j : scm.mechanism(i).parents) {
      bool depends = false;
      for (std::size_t c : layout.blocks[j].coordinates) {
        Rng rng = Rng::stream(seed, i * 1000003ULL + c);
        for (int k = 0; k < kDependenceProbes && !depends; ++k) {
          std::vector<double> x = box.sample(rng);
          std::vector<double> y = x;
          y[c] = box.lower[c] == box.upper[c] ? x[c] + 1.0 : rng.uniform(box.lower[c], box.upper[c]);
          try {
            const auto hx = eval_mechanism(scm, i, x);
            const auto hy = eval_mechanism(scm, i, y);
            for (std::size_t m = 0; m < hx.size(); ++m) {
              if (std::abs(hx[m] - hy[m]) > kDependenceThreshold) depends = true;
            }
          } catch (const Error&) {
            // degenerate probe point
          }
        }
        if (depends) break;
      }
      if (depends) parents[i].push_back(j);
    }
  }
  std::vector<std::string> names;
  for (const auto& b : layout.blocks) names.push_back(b.name);
  return Digraph::from_parents(std::move(names), parents);
}

Digraph scm_parent_graph(const Scm& scm) {
  std::vector<std::string> names;
  std::vector<std::vector<std::size_t>> parents;
  for (std::size_t b = 0; b < scm.size(); ++b) {
    names.push_back(scm.layout().blocks[b].name);
    parents.push_back(scm.mechanism(b).parents);
  }
  return Digraph::from_parents(std::move(names), parents);
}

std::string render(const Scm& scm) {
  std::string out;
  for (std::size_t b = 0; b < scm.size(); ++b) {
    const Mechanism& m = scm.mechanism(b);
    out += "X[" + scm.layout().blocks[b].name + "] = ";
    switch (m.kind) {
      case MechanismKind::clamp: out += format_tuple(m.values); break;
      case MechanismKind::closed_form: out += tuple_text(m.closed); break;
      case MechanismKind::implicit: out += "implicit root of: " + tuple_text(m.equation); break;
    }
    out += '\n';
  }
  return out;
}

std::string render_projected(const Scm& scm) {
  std::string out;
  for (std::size_t b = 0; b < scm.size(); ++b) {
    const Mechanism& m = scm.mechanism(b);
    const auto& coords = scm.layout().blocks[b].coordinates;
    for (std::size_t k = 0; k < coords.size(); ++k) {
      std::string rhs;
      switch (m.kind) {
        case MechanismKind::clamp:
          if (m.values[k] == 0.0) continue;
          rhs = Expr::constant(m.values[k]).to_string();
          break;
        case MechanismKind::closed_form:
          if (m.closed[k].is_zero()) continue;
          rhs = m.closed[k].to_string();
          break;
        case MechanismKind::implicit:
          rhs = "implicit root of: " + tuple_text(m.equation);
          break;
      }
      out += scm.layout().variables[coords[k]].name + " = " + rhs + "\n";
    }
  }
  return out;
}

}  // namespace odescm
