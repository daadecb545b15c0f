#include "odescm/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "odescm/errors.hpp"

namespace odescm {

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

constexpr double kSafety = 0.9;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 10.0;

bool all_finite(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

double max_norm(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::reached_end: return "reached_end";
    case Termination::converged: return "converged";
    case Termination::diverged: return "diverged";
    case Termination::left_domain: return "left_domain";
    case Termination::step_underflow: return "step_underflow";
  }
  return "unknown";
}

DormandPrince::DormandPrince(const OdeSystem& sys, std::span<const double> x0, double t0, IntegratorOptions options)
    : sys_(sys), opt_(std::move(options)), n_(sys.dimension()), t_(t0), x_(x0.begin(), x0.end()) {
  if (x0.size() != n_) throw InvalidArgument("initial state has wrong dimension");
  if (!all_finite(x0)) throw InvalidArgument("initial state must be finite");
  x_prev_ = x_new_ = tmp_ = err_ = x_;
  for (auto& k : k_) k.assign(n_, 0.0);
  for (auto& d : dense_) d.assign(n_, 0.0);
  sys_.drift(x_, k_[6]);

  if (opt_.fixed_step) {
    if (!(*opt_.fixed_step > 0)) throw InvalidArgument("fixed step must be positive");
    h_ = *opt_.fixed_step;
  } else if (opt_.initial_step > 0) {
    h_ = opt_.initial_step;
  } else {
    // Scale-based first guess followed by one explicit Euler probe.
    double d0 = 0.0, dd1 = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double sk = opt_.abs_tol + opt_.rel_tol * std::abs(x_[i]);
      d0 += (x_[i] / sk) * (x_[i] / sk);
      dd1 += (k_[6][i] / sk) * (k_[6][i] / sk);
    }
    d0 = n_ ? std::sqrt(d0 / n_) : 0.0;
    dd1 = n_ ? std::sqrt(dd1 / n_) : 0.0;
    double h0 = (d0 < 1e-5 || dd1 < 1e-5) ? 1e-6 : 0.01 * d0 / dd1;
    h0 = std::min(h0, opt_.max_step);
    for (std::size_t i = 0; i < n_; ++i) tmp_[i] = x_[i] + h0 * k_[6][i];
    double d2 = 0.0;
    try {
      sys_.drift(tmp_, k_[1]);
      for (std::size_t i = 0; i < n_; ++i) {
        const double sk = opt_.abs_tol + opt_.rel_tol * std::abs(x_[i]);
        const double v = (k_[1][i] - k_[6][i]) / sk;
        d2 += v * v;
      }
      d2 = n_ ? std::sqrt(d2 / n_) / h0 : 0.0;
    } catch (const EvalError&) {
      d2 = 0.0;
    }
    const double m = std::max(dd1, d2);
    const double h1 = m <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / m, 0.2);
    h_ = std::min({100 * h0, h1, opt_.max_step});
  }
}

void DormandPrince::stages(double h) {
  const auto& k1 = k_[6];
  auto& k2 = k_[1];
  auto& k3 = k_[2];
  auto& k4 = k_[3];
  auto& k5 = k_[4];
  auto& k6 = k_[5];
  auto& k7 = k_[0];  // holds the new derivative until the step is accepted
  for (std::size_t i = 0; i < n_; ++i) tmp_[i] = x_[i] + h * a21 * k1[i];
  sys_.drift(tmp_, k2);
  for (std::size_t i = 0; i < n_; ++i) tmp_[i] = x_[i] + h * (a31 * k1[i] + a32 * k2[i]);
  sys_.drift(tmp_, k3);
  for (std::size_t i = 0; i < n_; ++i) tmp_[i] = x_[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
  sys_.drift(tmp_, k4);
  for (std::size_t i = 0; i < n_; ++i) {
    tmp_[i] = x_[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
  }
  sys_.drift(tmp_, k5);
  for (std::size_t i = 0; i < n_; ++i) {
    tmp_[i] = x_[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
  }
  sys_.drift(tmp_, k6);
  for (std::size_t i = 0; i < n_; ++i) {
    x_new_[i] = x_[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
  }
  sys_.drift(x_new_, k7);
  for (std::size_t i = 0; i < n_; ++i) {
    err_[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
  }
}

double DormandPrince::error_norm() const {
  if (n_ == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    const double sk = opt_.abs_tol + opt_.rel_tol * std::max(std::abs(x_[i]), std::abs(x_new_[i]));
    const double v = err_[i] / sk;
    sum += v * v;
  }
  return std::sqrt(sum / n_);
}

DormandPrince::Status DormandPrince::step(double t_limit) {
  const double eps = std::numeric_limits<double>::epsilon();
  for (;;) {
    const double remaining = t_limit - t_;
    const double tiny = 16 * eps * std::max(1.0, std::abs(t_));
    if (remaining <= tiny) {
      t_ = t_limit;
      return Status::ok;
    }
    double h = std::min(h_, remaining);
    if (remaining - h <= tiny) h = remaining;
    if (h <= tiny) return Status::underflow;
    try {
      stages(h);
    } catch (const EvalError&) {
      if (opt_.fixed_step) return Status::non_finite;
      h_ = h * kMinFactor;
      continue;
    }
    const bool finite = all_finite(x_new_) && all_finite(k_[0]);
    if (opt_.fixed_step) {
      if (!finite) return Status::non_finite;
    } else {
      const double err = finite ? error_norm() : std::numeric_limits<double>::infinity();
      if (!(err <= 1.0)) {
        const double fac = std::isfinite(err) ? std::max(kMinFactor, kSafety * std::pow(err, -0.2)) : kMinFactor;
        h_ = h * fac;
        continue;
      }
      const double fac = err == 0.0 ? kMaxFactor : std::clamp(kSafety * std::pow(err, -0.2), kMinFactor, kMaxFactor);
      h_ = std::min(h * fac, opt_.max_step);
    }

    const auto& k1 = k_[6];
    for (std::size_t i = 0; i < n_; ++i) {
      const double ydiff = x_new_[i] - x_[i];
      const double bspl = h * k1[i] - ydiff;
      dense_[0][i] = x_[i];
      dense_[1][i] = ydiff;
      dense_[2][i] = bspl;
      dense_[3][i] = ydiff - h * k_[0][i] - bspl;
      dense_[4][i] = h * (d1 * k1[i] + d3 * k_[2][i] + d4 * k_[3][i] + d5 * k_[4][i] + d6 * k_[5][i] +
                          d7 * k_[0][i]);
    }
    x_prev_.swap(x_);
    x_.swap(x_new_);
    k_[6].swap(k_[0]);
    t_ = remaining == h ? t_limit : t_ + h;
    h_last_ = h;
    ++accepted_;
    return Status::ok;
  }
}

std::vector<double> DormandPrince::interpolate(double t) const {
  if (h_last_ == 0.0) return x_;
  const double theta = (t - (t_ - h_last_)) / h_last_;
  const double theta1 = 1.0 - theta;
  std::vector<double> out(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    out[i] = dense_[0][i] +
             theta * (dense_[1][i] + theta1 * (dense_[2][i] + theta * (dense_[3][i] + theta1 * dense_[4][i])));
  }
  return out;
}

Trajectory integrate(const OdeSystem& sys, std::span<const double> x0, double t_end,
                     const IntegratorOptions& options) {
  if (!(t_end > 0) || !std::isfinite(t_end)) throw InvalidArgument("t_end must be positive and finite");
  const auto& samples = options.sample_times;
  if (!std::is_sorted(samples.begin(), samples.end()) ||
      (!samples.empty() && (samples.front() < 0 || samples.back() > t_end))) {
    throw InvalidArgument("sample times must be increasing and inside [0, t_end]");
  }

  Trajectory traj;
  traj.times.push_back(0.0);
  traj.states.emplace_back(x0.begin(), x0.end());
  std::size_t next_sample = 0;
  while (next_sample < samples.size() && samples[next_sample] <= 0.0) ++next_sample;

  const Layout& layout = sys.layout();
  bool reported_exit = false;
  auto check_domain = [&](std::span<const double> x, double t) {
    if (reported_exit) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!layout.variables[i].domain.contains(x[i])) {
        reported_exit = true;
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", t);
        traj.diagnostics.push_back("left domain of '" + layout.variables[i].name + "' at t=" + buf);
        return true;
      }
    }
    return false;
  };

  DormandPrince dp(sys, x0, 0.0, options);
  while (dp.time() < t_end) {
    if (dp.accepted_steps() >= options.max_steps) {
      traj.reason = Termination::step_underflow;
      traj.diagnostics.push_back("step budget exhausted");
      break;
    }
    const auto status = dp.step(t_end);
    if (status == DormandPrince::Status::underflow) {
      traj.reason = Termination::step_underflow;
      traj.diagnostics.push_back("step size underflow (stiffness suspected)");
      break;
    }
    if (status == DormandPrince::Status::non_finite) {
      traj.reason = Termination::diverged;
      traj.diagnostics.push_back("non-finite state");
      break;
    }
    if (samples.empty()) {
      traj.times.push_back(dp.time());
      traj.states.emplace_back(dp.state().begin(), dp.state().end());
    } else {
      for (; next_sample < samples.size() && samples[next_sample] <= dp.time(); ++next_sample) {
        if (samples[next_sample] <= traj.times.back()) continue;
        traj.times.push_back(samples[next_sample]);
        traj.states.push_back(samples[next_sample] == dp.time()
                                  ? std::vector<double>(dp.state().begin(), dp.state().end())
                                  : dp.interpolate(samples[next_sample]));
      }
    }
    if (!all_finite(dp.state()) || max_norm(dp.state()) > options.divergence_norm) {
      traj.reason = Termination::diverged;
      traj.diagnostics.push_back("state norm exceeded divergence threshold");
      if (traj.times.back() < dp.time()) {
        traj.times.push_back(dp.time());
        traj.states.emplace_back(dp.state().begin(), dp.state().end());
      }
      break;
    }
    if (check_domain(dp.state(), dp.time()) && options.stop_on_domain_exit) {
      traj.reason = Termination::left_domain;
      if (traj.times.back() < dp.time()) {
        traj.times.push_back(dp.time());
        traj.states.emplace_back(dp.state().begin(), dp.state().end());
      }
      break;
    }
  }
  return traj;
}

std::string trajectory_csv(const Trajectory& traj, const Layout& layout) {
  std::string out = "t";
  for (const auto& v : layout.variables) out += "," + v.name;
  out += '\n';
  for (std::size_t r = 0; r < traj.times.size(); ++r) {
    out += format_real(traj.times[r]);
    for (double v : traj.states[r]) out += "," + format_real(v);
    out += '\n';
  }
  out += "# terminated: ";
  out += to_string(traj.reason);
  out += '\n';
  return out;
}

}  // namespace odescm
