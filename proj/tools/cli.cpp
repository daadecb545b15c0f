#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>

#include "odescm/builtins.hpp"
#include "odescm/errors.hpp"
#include "odescm/flow.hpp"
#include "odescm/integrator.hpp"
#include "odescm/lee.hpp"
#include "odescm/scm.hpp"
#include "odescm/spectrum.hpp"
#include "odescm/stability.hpp"
#include "odescm/suite.hpp"
#include "odescm/verify.hpp"

namespace odescm::cli {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelOptions {
  std::string file;
  std::string builtin;
  std::string theta;
  std::string init;
  std::size_t d = 2;
  std::string k, m, b, l;
  double wall = -1.0;
  std::vector<std::string> interventions;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

struct Loaded {
  SuiteModel model;
  Intervention iv;
};

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string tuple_of(const std::vector<double>& x) {
  std::string s = "(";
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) s += ", ";
    s += format_number(x[i]);
  }
  return s + ")";
}

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (item.empty() || end == item.c_str() || *end != '\0') {
      throw UsageError(flag + ": '" + item + "' is not a number");
    }
    out.push_back(v);
  }
  if (out.empty()) throw UsageError(flag + ": empty list");
  return out;
}

// A list flag given as one value broadcasts to every entry.
void fill(std::vector<double>& target, const std::string& text, const std::string& flag) {
  if (text.empty()) return;
  const std::vector<double> v = parse_list(text, flag);
  if (v.size() == 1) {
    std::fill(target.begin(), target.end(), v[0]);
  } else if (v.size() == target.size()) {
    target = v;
  } else {
    throw UsageError(flag + " expects 1 or " + std::to_string(target.size()) + " values");
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + path + "'");
  out << text;
}

std::vector<std::vector<std::size_t>> nonempty_subsets(std::size_t n) {
  std::vector<std::vector<std::size_t>> sets;
  for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
    std::vector<std::size_t> s;
    for (std::size_t b = 0; b < n; ++b) {
      if (mask & (std::size_t{1} << b)) s.push_back(b);
    }
    sets.push_back(std::move(s));
  }
  return sets;
}

Loaded load(const ModelOptions& o) {
  if (o.file.empty() == o.builtin.empty()) throw UsageError("give exactly one of --model or --builtin");
  ModelSpec spec;
  std::string id;
  std::vector<std::vector<std::size_t>> sets;
  std::optional<Box> box;
  if (!o.file.empty()) {
    spec = parse_model(read_file(o.file));
    id = o.file;
    for (std::size_t b = 0; b < spec.layout.block_count(); ++b) sets.push_back({b});
  } else if (o.builtin == "lv") {
    LotkaVolterraParams p;
    if (!o.theta.empty()) {
      const auto t = parse_list(o.theta, "--theta");
      if (t.size() != 4) throw UsageError("--theta expects th11,th12,th21,th22");
      p.th11 = t[0];
      p.th12 = t[1];
      p.th21 = t[2];
      p.th22 = t[3];
    }
    if (!o.init.empty()) {
      const auto x = parse_list(o.init, "--init");
      if (x.size() != 2) throw UsageError("--init expects X1,X2");
      p.a = x[0];
      p.b = x[1];
    }
    spec = builtin_lotka_volterra(p);
    id = "lotka-volterra";
    sets = {{1}};
    // do(X2 = xi) with th11 - th12 xi < 0 has the attracting equilibrium (0, xi).
    box = Box::around(spec.layout, spec.initial);
    box->lower[1] = 1.5 * p.th11 / p.th12;
    box->upper[1] = 4.0 * p.th11 / p.th12;
  } else if (o.builtin == "mass-spring") {
    if (o.d == 0) throw UsageError("--D must be positive");
    MassSpringParams p = MassSpringParams::uniform(o.d);
    fill(p.masses, o.m, "--m");
    fill(p.springs, o.k, "--k");
    fill(p.lengths, o.l, "--l");
    fill(p.frictions, o.b, "--b");
    p.wall = o.wall >= 0 ? o.wall : std::accumulate(p.lengths.begin(), p.lengths.end(), 0.0);
    if (!o.init.empty()) {
      p.init_positions.assign(o.d, 0.0);
      fill(p.init_positions, o.init, "--init");
    }
    spec = builtin_mass_spring(p);
    id = "mass-spring-D" + std::to_string(o.d);
    sets = nonempty_subsets(std::min<std::size_t>(o.d, 12));
    box = mass_spring_intervention_box(spec);
  } else {
    throw UsageError("unknown builtin '" + o.builtin + "' (expected lv or mass-spring)");
  }

  if (!box) box = Box::around(spec.layout, spec.initial);
  const Layout layout = spec.layout;
  InterventionSampler sampler = box_sampler(layout, *box);
  Loaded out{{std::move(id), OdeSystem(std::move(spec)), std::move(sets), std::move(sampler)}, {}};
  for (const std::string& text : o.interventions) {
    out.iv = Intervention::combine(out.iv, parse_intervention(layout, text));
  }
  if (!out.iv.empty()) validate(layout, out.iv);
  return out;
}

void add_model_options(CLI::App& app, ModelOptions& o) {
  app.add_option("--model", o.file, "Model file in the model language");
  app.add_option("--builtin", o.builtin, "Builtin model: lv or mass-spring");
  app.add_option("--theta", o.theta, "lv rates th11,th12,th21,th22");
  app.add_option("--init", o.init, "Initial state: lv X1,X2; mass-spring positions Q1,...,QD");
  app.add_option("--D", o.d, "mass-spring: number of masses")->capture_default_str();
  app.add_option("--k", o.k, "mass-spring: spring constants k0..kD (one value broadcasts)");
  app.add_option("--m", o.m, "mass-spring: masses m1..mD (one value broadcasts)");
  app.add_option("--b", o.b, "mass-spring: frictions b1..bD (one value broadcasts)");
  app.add_option("--l", o.l, "mass-spring: rest lengths l0..lD (one value broadcasts)");
  app.add_option("--L", o.wall, "mass-spring: wall position (default: sum of rest lengths)");
  app.add_option("--do", o.interventions,
                 "Intervention NAME=VALUE[,NAME=VALUE...]; repeated flags form one joint intervention");
  app.add_option("--seed", o.seed, "Random seed (default: $ODESCM_SEED or 0)");
  app.add_option("--threads", o.threads, "Worker threads for probes (0: hardware concurrency)");
}

OdeSystem intervened_system(const Loaded& m) {
  return m.iv.empty() ? m.model.system : intervene_hard(m.model.system, m.iv);
}

void print_flow(std::ostream& os, const EquilibriumOutcome& e) {
  os << "flow status=" << to_string(e.status) << " time=" << format_number(e.time)
     << " residual=" << format_short(e.residual) << " state=" << tuple_of(e.state) << '\n';
  for (const auto& d : e.diagnostics) os << "# " << d << '\n';
}

std::string gnuplot_script(const std::string& csv, const Layout& layout) {
  std::string s = "set datafile separator ','\nset key autotitle columnhead\nset xlabel 't'\nplot ";
  for (std::size_t c = 0; c < layout.dimension(); ++c) {
    if (c) s += ", \\\n     ";
    s += "'" + csv + "' using 1:" + std::to_string(c + 2) + " with lines";
  }
  return s + '\n';
}

struct SimulateOptions {
  double t_end = 50.0;
  double dt = 0.0;
  double kappa = 0.0;
  double eq_tol = 1e-8;
  double tol = 1e-9;
  std::string out;
  std::string gnuplot;
};

int cmd_simulate(const Loaded& m, const SimulateOptions& o, std::ostream& out, std::ostream& err) {
  if (!(o.t_end > 0)) throw UsageError("--t-end must be positive");
  OdeSystem sys = m.model.system;
  if (!m.iv.empty()) sys = o.kappa > 0 ? intervene_soft(sys, m.iv, o.kappa) : intervene_hard(sys, m.iv);

  IntegratorOptions io;
  io.abs_tol = o.tol;
  io.rel_tol = o.tol;
  if (o.dt > 0) {
    for (std::size_t k = 0; static_cast<double>(k) * o.dt < o.t_end; ++k) {
      io.sample_times.push_back(static_cast<double>(k) * o.dt);
    }
    io.sample_times.push_back(o.t_end);
  }
  const Trajectory traj = integrate(sys, sys.initial_state(), o.t_end, io);
  const std::string csv = trajectory_csv(traj, sys.layout());

  FlowOptions fo;
  fo.eq_tol = o.eq_tol;
  fo.t_max = o.t_end;
  fo.integrator.abs_tol = o.tol;
  fo.integrator.rel_tol = o.tol;
  const EquilibriumOutcome eq = find_equilibrium_by_flow(sys, sys.initial_state(), fo);

  if (o.out.empty()) {
    out << csv;
    print_flow(err, eq);
  } else {
    write_file(o.out, csv);
    if (!o.gnuplot.empty()) write_file(o.gnuplot, gnuplot_script(o.out, sys.layout()));
    print_flow(out, eq);
  }
  return traj.reason == Termination::diverged ? exit_failed : exit_ok;
}

struct StabilityOptions {
  std::size_t trials = 20;
  double match_tol = 1e-5;
  double eq_tol = 1e-8;
  double t_max = 1e3;
  bool structural = false;
  std::size_t draws = 3;
  bool verbose = false;
};

int verdict_exit(Verdict v) {
  switch (v) {
    case Verdict::stable: return exit_ok;
    case Verdict::refuted: return exit_failed;
    case Verdict::inconclusive: return exit_inconclusive;
  }
  return exit_failed;
}

void print_report(std::ostream& os, const StabilityReport& r, bool verbose, const std::string& indent) {
  os << indent << "verdict " << to_string(r.verdict) << " trials=" << r.trials.size()
     << " max-distance=" << format_short(r.max_distance) << '\n';
  if (r.witness) {
    os << indent << "witness "
       << (r.witness->kind == Witness::Kind::non_converging ? "non-converging" : "multiple-limits") << ": "
       << r.witness->description << '\n';
  }
  if (!verbose) return;
  for (std::size_t k = 0; k < r.trials.size(); ++k) {
    const Trial& t = r.trials[k];
    os << indent << "trial " << k << " init=" << tuple_of(t.init) << " status=" << to_string(t.outcome.status)
       << " state=" << tuple_of(t.outcome.state) << '\n';
  }
}

int cmd_stability(const Loaded& m, const StabilityOptions& o, const ModelOptions& mo, std::ostream& out) {
  ProbeOptions po;
  po.trials = o.trials;
  po.seed = mo.seed;
  po.match_tol = o.match_tol;
  po.flow.eq_tol = o.eq_tol;
  po.flow.t_max = o.t_max;
  po.threads = mo.threads;
  const OdeSystem sys = intervened_system(m);
  if (!o.structural) {
    const StabilityReport r = probe_stability(sys, po);
    print_report(out, r, o.verbose, "");
    return verdict_exit(r.verdict);
  }
  VerifyOptions vo;
  vo.probe = po;
  vo.stability_draws = o.draws;
  const StructuralStabilityReport r = probe_structural_stability(sys, m.model.sampler, vo);
  for (const auto& [targets, entry] : r.probes) {
    std::string names;
    for (std::size_t b : targets) names += (names.empty() ? "" : ",") + sys.layout().blocks[b].name;
    out << "targets {" << names << "} verdict " << to_string(entry.verdict) << '\n';
    for (const auto& [iv, report] : entry.draws) {
      out << "  " << iv.describe(sys.layout()) << '\n';
      print_report(out, report, o.verbose, "    ");
    }
  }
  out << "structural stability " << to_string(r.verdict) << '\n';
  return verdict_exit(r.verdict);
}

struct DeriveCmdOptions {
  std::string to = "both";
  std::string out_dir;
  bool force = false;
  bool projected = false;
};

int cmd_derive(const Loaded& m, const DeriveCmdOptions& o, const ModelOptions& mo, std::ostream& out,
               std::ostream& err) {
  if (o.to != "lee" && o.to != "scm" && o.to != "both") throw UsageError("--to expects lee, scm or both");
  Lee lee = lee_from_ode(m.model.system);
  if (!m.iv.empty()) lee = intervene_lee(lee, m.iv);

  bool first = true;
  auto emit = [&](const std::string& file, const std::string& text) {
    if (!o.out_dir.empty()) {
      write_file(o.out_dir + "/" + file, text);
      return;
    }
    if (!first) out << '\n';
    first = false;
    out << text;
  };

  if (o.to != "scm") {
    emit("lee.txt", render(lee));
    emit("lee.dot", to_dot(lee_graph(lee), "lee"));
  }
  if (o.to == "lee") return exit_ok;

  DeriveOptions dopt;
  dopt.force = o.force;
  dopt.sampler = m.model.sampler;
  dopt.solvability.seed = mo.seed;
  dopt.solvability.solve.newton.seed = mo.seed;
  dopt.solvability.solve.newton.threads = mo.threads;
  const Derivation d = derive_scm(lee, dopt);
  for (const auto& w : d.warnings) err << "warning: " << w << '\n';
  emit("scm.txt", o.projected ? render_projected(d.scm) : render(d.scm));
  emit("scm.dot", to_dot(scm_graph(d.scm, mo.seed), "scm"));
  return exit_ok;
}

struct SolveCmdOptions {
  std::string level = "lee";
  std::size_t starts = 32;
  bool force = false;
};

int cmd_solve(const Loaded& m, const SolveCmdOptions& o, const ModelOptions& mo, std::ostream& out,
              std::ostream& err) {
  if (o.level != "lee" && o.level != "scm") throw UsageError("--level expects lee or scm");
  Lee lee = lee_from_ode(m.model.system);
  if (!m.iv.empty()) lee = intervene_lee(lee, m.iv);
  LeeSolveOptions so;
  so.newton.seed = mo.seed;
  so.newton.starts = o.starts;
  so.newton.threads = mo.threads;
  SolveResult r;
  if (o.level == "lee") {
    r = solve_lee(lee, so);
  } else {
    DeriveOptions dopt;
    dopt.force = o.force;
    dopt.sampler = m.model.sampler;
    dopt.solvability.seed = mo.seed;
    dopt.solvability.solve.newton.seed = mo.seed;
    dopt.solvability.solve.newton.threads = mo.threads;
    const Derivation d = derive_scm(lee, dopt);
    for (const auto& w : d.warnings) err << "warning: " << w << '\n';
    r = solve_scm(d.scm, so);
  }

  const OdeSystem sys = intervened_system(m);
  std::vector<std::size_t> free;
  for (std::size_t b = 0; b < sys.block_count(); ++b) {
    if (sys.is_clamped(b)) continue;
    for (std::size_t c : sys.layout().blocks[b].coordinates) free.push_back(c);
  }

  out << "status " << to_string(r.status) << " starts=" << r.starts << " converged=" << r.converged_starts << '\n';
  for (const auto& x : r.solutions) {
    out << "solution " << tuple_of(x);
    try {
      // Linearisation restricted to the coordinates that still evolve.
      const Matrix j = jacobian_at(sys, x);
      Matrix sub(free.size(), free.size());
      for (std::size_t a = 0; a < free.size(); ++a) {
        for (std::size_t b = 0; b < free.size(); ++b) sub(a, b) = j(free[a], free[b]);
      }
      out << " local=" << to_string(classify_equilibrium(sub).kind);
    } catch (const Error&) {
      out << " local=undefined";
    }
    out << '\n';
  }
  return r.status == SolveStatus::none_found ? exit_failed : exit_ok;
}

struct VerifyCmdOptions {
  std::string suite;
  std::size_t n = 3;
  double tol = 1e-6;
};

int cmd_verify(const std::optional<Loaded>& m, const VerifyCmdOptions& o, const ModelOptions& mo,
               std::ostream& out) {
  VerifyOptions vo;
  vo.tol = o.tol;
  vo.probe.threads = mo.threads;
  vo.solve.newton.threads = mo.threads;
  std::vector<SuiteModel> models;
  std::size_t n = o.n;
  if (!o.suite.empty()) {
    if (o.suite != "default") throw UsageError("unknown suite '" + o.suite + "'");
    models = default_suite();
  } else {
    SuiteModel model = m->model;
    if (!m->iv.empty()) {
      const Intervention iv = m->iv;
      const InterventionSampler sampler = model.sampler;
      model.target_sets = {iv.target_set()};
      // The fixed intervention is checked once; probes still use the box.
      model.sampler = [iv, sampler](const std::vector<std::size_t>& targets, Rng& rng) {
        return targets == iv.target_set() ? iv : sampler(targets, rng);
      };
      n = 1;
    }
    models.push_back(std::move(model));
  }
  const SuiteReport report = run_verification_suite(models, n, mo.seed, vo);
  out << to_text(report);
  return report.passed() ? exit_ok : exit_failed;
}

struct ExportOptions {
  std::string what = "model";
  std::string out;
};

int cmd_export(const Loaded& m, const ExportOptions& o, const ModelOptions& mo, std::ostream& out) {
  const OdeSystem sys = intervened_system(m);
  std::string text;
  if (o.what == "model") {
    text = print_model(sys.spec());
  } else if (o.what == "ode-dot") {
    text = to_dot(block_graph(sys), "ode");
  } else if (o.what == "coordinate-dot") {
    text = to_dot(coordinate_graph(sys), "ode");
  } else if (o.what == "lee-dot") {
    text = to_dot(lee_graph(lee_from_ode(sys)), "lee");
  } else if (o.what == "scm-dot") {
    text = to_dot(scm_graph(build_scm(lee_from_ode(sys)), mo.seed), "scm");
  } else {
    throw UsageError("--what expects model, ode-dot, coordinate-dot, lee-dot or scm-dot");
  }
  if (o.out.empty()) {
    out << text;
  } else {
    write_file(o.out, text);
  }
  return exit_ok;
}

std::uint64_t env_seed() {
  const char* s = std::getenv("ODESCM_SEED");
  if (!s || !*s) return 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s, &end, 10);
  if (*end != '\0') throw UsageError("ODESCM_SEED must be an unsigned integer");
  return v;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"odescm: ODE systems, equilibrium equations and structural causal models"};
  app.name("odescm");
  app.require_subcommand(1);

  ModelOptions mo;
  SimulateOptions so;
  StabilityOptions sto;
  DeriveCmdOptions dco;
  SolveCmdOptions slo;
  VerifyCmdOptions vco;
  ExportOptions eo;

  auto* sim = app.add_subcommand("simulate", "Integrate the (intervened) system and write a trajectory CSV");
  add_model_options(*sim, mo);
  sim->add_option("--t-end", so.t_end, "End time")->capture_default_str();
  sim->add_option("--dt", so.dt, "Sample spacing (default: every accepted step)");
  sim->add_option("--kappa", so.kappa, "Realise --do as soft feedback with this gain instead of a hard clamp");
  sim->add_option("--eq-tol", so.eq_tol, "Equilibrium residual tolerance")->capture_default_str();
  sim->add_option("--tol", so.tol, "Integrator absolute and relative tolerance")->capture_default_str();
  sim->add_option("--out", so.out, "CSV output file (default: stdout)");
  sim->add_option("--gnuplot", so.gnuplot, "Also write a gnuplot script for the CSV (needs --out)");

  auto* stab = app.add_subcommand("stability", "Probe stability of the (intervened) system");
  add_model_options(*stab, mo);
  stab->add_option("--trials", sto.trials, "Random starts")->capture_default_str();
  stab->add_option("--match-tol", sto.match_tol, "Distance below which limits coincide")->capture_default_str();
  stab->add_option("--eq-tol", sto.eq_tol, "Equilibrium residual tolerance")->capture_default_str();
  stab->add_option("--t-max", sto.t_max, "Integration horizon per trial")->capture_default_str();
  stab->add_flag("--structural", sto.structural, "Probe stability under do(pa(i)\\{i}) for every block i");
  stab->add_option("--draws", sto.draws, "Clamp draws per target set with --structural")->capture_default_str();
  stab->add_flag("--verbose", sto.verbose, "Print every trial");

  auto* der = app.add_subcommand("derive", "Print the equilibrium equations and/or the derived SCM");
  add_model_options(*der, mo);
  der->add_option("--to", dco.to, "lee, scm or both")->capture_default_str();
  der->add_option("--out-dir", dco.out_dir, "Write lee.txt, lee.dot, scm.txt, scm.dot into this directory");
  der->add_flag("--force", dco.force, "Derive the SCM even when solvability probes fail");
  der->add_flag("--projected", dco.projected, "Print SCM mechanisms without zero coordinates");

  auto* sol = app.add_subcommand("solve", "Solve the (intervened) equilibrium equations or SCM");
  add_model_options(*sol, mo);
  sol->add_option("--level", slo.level, "lee or scm")->capture_default_str();
  sol->add_option("--starts", slo.starts, "Newton starts")->capture_default_str();
  sol->add_flag("--force", slo.force, "With --level scm, solve even when solvability probes fail");

  auto* ver = app.add_subcommand("verify", "Check that interventions commute across ODE, equations and SCM");
  add_model_options(*ver, mo);
  ver->add_option("--suite", vco.suite, "Run a named suite instead of one model: default");
  ver->add_option("--n", vco.n, "Random interventions per model")->capture_default_str();
  ver->add_option("--tol", vco.tol, "Agreement tolerance")->capture_default_str();

  auto* exp = app.add_subcommand("export", "Write the canonical model text or a DOT graph");
  add_model_options(*exp, mo);
  exp->add_option("--what", eo.what, "model, ode-dot, coordinate-dot, lee-dot or scm-dot")->capture_default_str();
  exp->add_option("--out", eo.out, "Output file (default: stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_usage;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    bool seed_given = false;
    for (const CLI::Option* opt : sub->get_options()) {
      if (opt->get_name() == "--seed" && opt->count() > 0) seed_given = true;
    }
    if (!seed_given) mo.seed = env_seed();

    if (sub == ver && !vco.suite.empty()) return cmd_verify(std::nullopt, vco, mo, out);
    const Loaded model = load(mo);
    if (sub == sim) return cmd_simulate(model, so, out, err);
    if (sub == stab) return cmd_stability(model, sto, mo, out);
    if (sub == der) return cmd_derive(model, dco, mo, out, err);
    if (sub == sol) return cmd_solve(model, slo, mo, out, err);
    if (sub == ver) return cmd_verify(model, vco, mo, out);
    return cmd_export(model, eo, mo, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return exit_usage;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const SolvabilityRefused& e) {
    err << "refused: " << e.what() << "\n(use --force to derive anyway)\n";
    return exit_refused;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_failed;
  }
}

}  // namespace odescm::cli
