#include "odescm/solvability.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "odescm/errors.hpp"

namespace odescm {

namespace {

constexpr std::uint64_t kScanSalt = 0x7363616e5eedULL;
constexpr int kBisections = 200;

std::vector<std::size_t> minimal_targets(const Lee& lee, std::size_t block) {
  std::vector<std::size_t> out;
  for (std::size_t p : lee.equation(block).parents) {
    if (p != block) out.push_back(p);
  }
  return out;
}

SolvabilitySummary sample_solvability(const Lee& lee, const std::vector<std::size_t>& targets,
                                      const InterventionSampler& sampler, const SolvabilityOptions& options,
                                      std::uint64_t stream) {
  SolvabilitySummary summary;
  summary.solvable = true;
  for (std::size_t d = 0; d < options.draws; ++d) {
    Rng rng = Rng::stream(options.seed, stream * 1000003ULL + d);
    Intervention iv = sampler(targets, rng);
    SolveResult r = solve_lee(intervene_lee(lee, iv), options.solve);
    if (r.status != SolveStatus::unique) summary.solvable = false;
    summary.draws.emplace_back(std::move(iv), std::move(r));
  }
  return summary;
}

// Determinant of the Jacobian of g_i with respect to block i's own coordinates.
class OwnBlockDeterminant {
 public:
  OwnBlockDeterminant(const Lee& lee, std::size_t block) : coords_(lee.layout().blocks[block].coordinates) {
    const Layout& layout = lee.layout();
    for (const Expr& g : lee.equation(block).body) {
      for (std::size_t c : coords_) entries_.push_back(layout.compile(differentiate(g, layout.variables[c].name)));
    }
  }

  double operator()(std::span<const double> x) const {
    const auto d = static_cast<Eigen::Index>(coords_.size());
    Eigen::MatrixXd a(d, d);
    for (Eigen::Index r = 0; r < d; ++r) {
      for (Eigen::Index c = 0; c < d; ++c) a(r, c) = entries_[static_cast<std::size_t>(r * d + c)](x);
    }
    return d == 1 ? a(0, 0) : a.determinant();
  }

 private:
  std::vector<std::size_t> coords_;
  std::vector<CompiledExpr> entries_;
};

// Sign of det along one coordinate; nullopt where the entries are undefined.
std::optional<double> det_at(const OwnBlockDeterminant& det, std::vector<double>& x, std::size_t coord, double v) {
  x[coord] = v;
  try {
    const double d = det(x);
    return std::isfinite(d) ? std::optional<double>(d) : std::nullopt;
  } catch (const EvalError&) {
    return std::nullopt;
  }
}

// Scans parent coordinates for a value where the own-block Jacobian is
// singular and the intervened equations lose unique solvability.
void scan_degenerate(const Lee& lee, std::size_t block, LabelSolvability& label, const SolvabilityOptions& options) {
  const Layout& layout = lee.layout();
  const OwnBlockDeterminant det(lee, block);
  const Box box = options.solve.box ? *options.solve.box : Box::around(layout, lee.reference());
  std::vector<std::size_t> scan_coords;
  for (std::size_t b : label.targets) {
    for (std::size_t c : layout.blocks[b].coordinates) scan_coords.push_back(c);
  }

  for (std::size_t p = 0; p < options.scan_points; ++p) {
    Rng rng = Rng::stream(options.seed ^ kScanSalt, block * 1000003ULL + p);
    const std::vector<double> base = box.sample(rng);
    for (std::size_t c : scan_coords) {
      const double lo = box.lower[c], hi = box.upper[c];
      if (!(hi > lo)) continue;
      std::vector<double> x = base;
      std::vector<double> roots;
      std::optional<double> prev;
      double prev_v = lo;
      for (std::size_t k = 0; k < options.scan_grid; ++k) {
        const double v = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(options.scan_grid - 1);
        const auto d = det_at(det, x, c, v);
        if (d && *d == 0.0) {
          roots.push_back(v);
        } else if (d && prev && (*d > 0) != (*prev > 0) && *prev != 0.0) {
          double a = prev_v, b = v, fa = *prev;
          double root = 0.5 * (a + b);
          for (int it = 0; it < kBisections; ++it) {
            const double m = 0.5 * (a + b);
            if (m == a || m == b) break;
            const auto fm = det_at(det, x, c, m);
            if (!fm) break;
            root = m;
            if (*fm == 0.0) break;
            if ((*fm > 0) == (fa > 0)) {
              a = m;
              fa = *fm;
            } else {
              b = m;
            }
          }
          roots.push_back(root);
        }
        prev = d;
        prev_v = v;
      }

      for (double v : roots) {
        std::vector<double> point = base;
        point[c] = v;
        Intervention iv;
        for (std::size_t b : label.targets) {
          std::vector<double> vals;
          for (std::size_t cc : layout.blocks[b].coordinates) vals.push_back(point[cc]);
          iv.set(b, std::move(vals));
        }
        try {
          validate(layout, iv);
        } catch (const Error&) {
          continue;
        }
        SolveResult r = solve_lee(intervene_lee(lee, iv), options.solve);
        if (r.status != SolveStatus::unique) {
          label.degenerate = std::move(iv);
          label.degenerate_result = std::move(r);
          return;
        }
      }
    }
  }
}

}  // namespace

std::string_view to_string(StructuralVerdict v) {
  switch (v) {
    case StructuralVerdict::solvable: return "solvable-w.r.t.-probes";
    case StructuralVerdict::generic_only: return "generic only";
    case StructuralVerdict::refuted: return "refuted";
  }
  return "unknown";
}

std::map<std::vector<std::size_t>, SolvabilitySummary> check_solvability(
    const Lee& lee, const std::vector<std::vector<std::size_t>>& family, const InterventionSampler& sampler,
    const SolvabilityOptions& options) {
  std::map<std::vector<std::size_t>, SolvabilitySummary> out;
  std::uint64_t index = 0;
  for (const auto& targets : family) out[targets] = sample_solvability(lee, targets, sampler, options, index++);
  return out;
}

StructuralSolvabilityReport check_structural_solvability(const Lee& lee, const InterventionSampler& sampler,
                                                         const SolvabilityOptions& options) {
  StructuralSolvabilityReport report;
  report.labels.resize(lee.size());
  for (std::size_t b = 0; b < lee.size(); ++b) {
    LabelSolvability& label = report.labels[b];
    if (lee.equation(b).clamp) {
      label.verdict = StructuralVerdict::solvable;
      continue;
    }
    label.targets = minimal_targets(lee, b);
    label.sampled = sample_solvability(lee, label.targets, sampler, options, b);
    if (!label.sampled.solvable) {
      label.verdict = StructuralVerdict::refuted;
    } else {
      if (!label.targets.empty()) scan_degenerate(lee, b, label, options);
      label.verdict = label.degenerate ? StructuralVerdict::generic_only : StructuralVerdict::solvable;
    }
    if (label.verdict == StructuralVerdict::refuted) {
      report.verdict = StructuralVerdict::refuted;
    } else if (label.verdict == StructuralVerdict::generic_only && report.verdict == StructuralVerdict::solvable) {
      report.verdict = StructuralVerdict::generic_only;
    }
  }
  return report;
}

InterventionSampler default_xi_sampler(const Lee& lee) {
  return box_sampler(lee.layout(), Box::around(lee.layout(), lee.reference()));
}

}  // namespace odescm
