#include "ghostgame/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "engine.hpp"

namespace ghostgame {

using detail::Normal;
using detail::PathSetup;
using detail::check_params;
using detail::check_stop;
using detail::draw_theta;
using detail::with_meta;

// ---------------------------------------------------------------------------
// ControlPolicy

ControlPolicy::ControlPolicy(std::vector<double> breakpoints, std::vector<double> levels)
    : breakpoints_(std::move(breakpoints)), levels_(std::move(levels)) {
  if (levels_.size() != breakpoints_.size() + 1) {
    throw std::invalid_argument("ControlPolicy: need exactly one more level than breakpoints");
  }
  for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
    const double b = breakpoints_[i];
    if (!(b > 0.0 && b < 1.0) || (i > 0 && !(b > breakpoints_[i - 1]))) {
      throw std::invalid_argument(
          "ControlPolicy: breakpoints must be strictly increasing inside (0,1)");
    }
  }
}

ControlPolicy ControlPolicy::constant(double level) { return ControlPolicy({}, {level}); }

ControlPolicy ControlPolicy::threshold(double cut, double below, double above) {
  return ControlPolicy({cut}, {below, above});
}

ControlPolicy ControlPolicy::equilibrium(const ModelParams& params, double b2) {
  return threshold(b2, params.lambda_hi, params.lambda_lo);
}

double ControlPolicy::operator()(double p) const {
  const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), p);
  return levels_[static_cast<std::size_t>(it - breakpoints_.begin())];
}

void ControlPolicy::check_admissible(const ModelParams& params) const {
  for (double level : levels_) {
    if (level != params.lambda_hi && level != params.lambda_lo) {
      std::ostringstream msg;
      msg << "ControlPolicy: level " << level << " is neither lambda_hi=" << params.lambda_hi
          << " nor lambda_lo=" << params.lambda_lo;
      throw std::invalid_argument(msg.str());
    }
  }
}

// ---------------------------------------------------------------------------
// Configuration and summaries

void check_config(const SimConfig& cfg) {
  auto fail = [](const std::string& what) { throw std::invalid_argument("SimConfig: " + what); };
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) fail("dt must be positive and finite");
  if (!(cfg.horizon >= 0.0) || !std::isfinite(cfg.horizon)) {
    fail("horizon must be non-negative and finite");
  }
  if (cfg.horizon > 0.0 && cfg.dt >= cfg.horizon) fail("dt must be smaller than horizon");
  if (cfg.n_paths < 1) fail("n_paths must be at least 1");
  if (!(cfg.p0 > 0.0 && cfg.p0 < 1.0)) fail("p0 must lie in (0,1)");
  if (cfg.threads < 0) fail("threads must be non-negative");
  if (!(cfg.absorb_tol >= 0.0 && cfg.absorb_tol < 1.0)) fail("absorb_tol must lie in [0,1)");
}

McEstimate summarize(std::span<const double> samples) {
  const std::vector<double> copy(samples.begin(), samples.end());
  return detail::column_summary(copy, 1, 0);
}

namespace {

constexpr double kClampLo = 1e-9;
constexpr double kClampHi = 1.0 - 1e-9;

// Runs one strong-form path, writing stopper and controller payoffs for every
// stop level of `s` (descending). Returns the number of clamp events.
template <bool kDirect>
std::int64_t run_strong(const PathSetup& s, int theta, std::mt19937_64& eng, double* j1,
                        double* j2) {
  const auto& coef = s.coef[theta];
  const auto& regions = s.regions;
  const std::size_t m = s.z_stops.size();
  Normal normal;
  std::size_t next = 0;
  double pay1 = 0.0;
  double pay2 = 0.0;
  double disc = 1.0;
  double z = s.z0;
  double p = s.p0;
  std::int64_t clamps = 0;

  auto stopped = [&](std::size_t k) { return kDirect ? p <= s.p_stops[k] : z <= s.z_stops[k]; };
  auto record = [&] {
    while (next < m && stopped(next)) {
      j1[next] = pay1;
      j2[next] = pay2;
      ++next;
    }
  };
  record();

  const int top = regions.top();
  const double p_absorb = detail::logistic(s.z_absorb[theta]);
  int reg = kDirect ? regions.locate_p(p) : regions.locate_z(z);
  for (std::int64_t i = 0; i < s.n_steps && next < m; ++i) {
    const detail::StepCoef& k = coef[reg];
    pay1 += disc * s.w * k.stopper_rate;
    pay2 += disc * s.w * k.controller_rate;
    const double xi = normal(eng);
    if constexpr (kDirect) {
      const double spread = k.lambda_eq * p * (1.0 - p);
      p += spread * (theta * k.lambda_dev - k.lambda_eq * p) * s.dt + spread * s.sqrt_dt * xi;
      if (p < kClampLo) {
        p = kClampLo;
        ++clamps;
      } else if (p > kClampHi) {
        p = kClampHi;
        ++clamps;
      }
      reg = regions.walk_p(reg, p);
    } else {
      z += k.drift_dt + k.vol_sqdt * xi;
      reg = regions.walk_z(reg, z);
    }
    disc *= s.q;
    record();
    if (next < m && reg == top && (kDirect ? p >= p_absorb : z >= s.z_absorb[theta])) {
      const double rest = disc * s.remaining_weight(i + 1);
      pay1 += rest * coef[top].stopper_rate;
      pay2 += rest * coef[top].controller_rate;
      break;
    }
  }
  for (; next < m; ++next) {
    j1[next] = pay1;
    j2[next] = pay2;
  }
  return clamps;
}

struct StrongRun {
  std::vector<double> stopper;     // [path][stop level], levels in caller order
  std::vector<double> controller;  // same layout
  std::int64_t clamp_events = 0;
};

// Shared driver for the strong estimators.
StrongRun run_strong_paths(const ModelParams& params, const ControlPolicy& eq,
                           const ControlPolicy& dev, std::span<const double> stops,
                           const SimConfig& cfg, bool theta_from_cfg) {
  check_config(cfg);
  check_params(params);
  eq.check_admissible(params);
  dev.check_admissible(params);
  for (double b : stops) check_stop(b);

  const std::vector<double> levels(stops.begin(), stops.end());
  const PathSetup setup(params, eq, dev, levels, cfg, detail::Measure::kStrong, true);
  const std::size_t m = levels.size();

  // Map sorted (descending) slots back to caller order.
  std::vector<std::size_t> order(m);
  for (std::size_t k = 0; k < m; ++k) {
    order[k] = static_cast<std::size_t>(
        std::find(setup.p_stops.begin(), setup.p_stops.end(), levels[k]) - setup.p_stops.begin());
  }

  const auto n = static_cast<std::size_t>(cfg.n_paths);
  StrongRun out;
  out.stopper.assign(n * m, 0.0);
  out.controller.assign(n * m, 0.0);
  std::vector<std::int64_t> clamps(n, 0);
  detail::for_each_path(cfg.n_paths, cfg.threads, [&](std::int64_t path) {
    auto eng = detail::path_engine(cfg.seed, static_cast<std::uint64_t>(path));
    const int theta_draw = draw_theta(eng, cfg);
    const int theta = theta_from_cfg ? theta_draw : 1;
    std::vector<double> j1(m), j2(m);
    clamps[path] = cfg.integrator == Integrator::kDirect
                       ? run_strong<true>(setup, theta, eng, j1.data(), j2.data())
                       : run_strong<false>(setup, theta, eng, j1.data(), j2.data());
    const std::size_t row = static_cast<std::size_t>(path) * m;
    for (std::size_t k = 0; k < m; ++k) {
      out.stopper[row + k] = j1[order[k]];
      out.controller[row + k] = j2[order[k]];
    }
  });
  for (auto c : clamps) out.clamp_events += c;
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Single paths

BeliefPath simulate_belief_path(const ModelParams& params, const ControlPolicy& equilibrium,
                                const ControlPolicy& deviation, int theta, const SimConfig& cfg,
                                const PathOptions& opts) {
  check_config(cfg);
  check_params(params);
  equilibrium.check_admissible(params);
  deviation.check_admissible(params);
  if (theta != 0 && theta != 1) throw std::invalid_argument("theta must be 0 or 1");
  if (opts.record_every < 1) throw std::invalid_argument("record_every must be >= 1");
  check_stop(opts.stop_threshold);
  if (opts.form == BeliefForm::kInnovation && cfg.integrator == Integrator::kDirect) {
    throw std::invalid_argument("the innovation form is only available in log-odds");
  }

  const PathSetup s(params, equilibrium, deviation, {}, cfg, detail::Measure::kStrong, false);
  const auto& coef = s.coef[theta];
  auto eng = detail::path_engine(cfg.seed, opts.path_index);
  Normal normal;

  BeliefPath path;
  double z = s.z0;
  double p = s.p0;
  double x = 0.0;
  double disc = 1.0;
  double pay1 = 0.0;
  double pay2 = 0.0;
  const bool direct = cfg.integrator == Integrator::kDirect;
  int reg = s.regions.locate_z(z);

  auto push = [&](std::int64_t i) {
    path.points.push_back({static_cast<double>(i) * s.dt, p, x, pay1, pay2});
    if (path.stop_index < 0 && opts.stop_threshold > 0.0 && p <= opts.stop_threshold) {
      path.stop_index = static_cast<std::int64_t>(path.points.size()) - 1;
    }
  };
  push(0);
  const std::int64_t n_steps = detail::step_count(cfg);
  for (std::int64_t i = 0; i < n_steps; ++i) {
    const detail::StepCoef& k = coef[reg];
    pay1 += disc * s.w * k.stopper_rate;
    pay2 += disc * s.w * k.controller_rate;
    const double dw = s.sqrt_dt * normal(eng);
    if (opts.form == BeliefForm::kInnovation) {
      // dZ = lambda* dW^ + lambda*^2 (2P - 1)/2 dt, dX = dW^ - c dt + lambda* P dt
      const double le = k.lambda_eq;
      x += dw + (le * p - params.c) * s.dt;
      z += le * dw + 0.5 * le * le * (2.0 * p - 1.0) * s.dt;
      p = detail::logistic(z);
      reg = s.regions.walk_z(reg, z);
    } else if (direct) {
      const double spread = k.lambda_eq * p * (1.0 - p);
      x += (theta * k.lambda_dev - params.c) * s.dt + dw;
      p += spread * (theta * k.lambda_dev - k.lambda_eq * p) * s.dt + spread * dw;
      if (p < kClampLo || p > kClampHi) {
        p = std::clamp(p, kClampLo, kClampHi);
        ++path.clamp_events;
      }
      reg = s.regions.walk_p(reg, p);
    } else {
      x += (theta * k.lambda_dev - params.c) * s.dt + dw;
      z += k.drift_dt + k.lambda_eq * dw;
      p = detail::logistic(z);
      reg = s.regions.walk_z(reg, z);
    }
    disc *= s.q;
    if ((i + 1) % opts.record_every == 0 || i + 1 == n_steps) push(i + 1);
  }
  return path;
}

// ---------------------------------------------------------------------------
// Strong estimators

std::vector<double> stopper_reward_samples(const ModelParams& params,
                                           const ControlPolicy& control,
                                           std::span<const double> stop_thresholds,
                                           const SimConfig& cfg, McEstimate* meta) {
  auto run = run_strong_paths(params, control, control, stop_thresholds, cfg, true);
  if (meta != nullptr) *meta = with_meta({}, params, cfg, run.clamp_events);
  return std::move(run.stopper);
}

std::vector<McEstimate> estimate_stopper_rewards(const ModelParams& params,
                                                 const ControlPolicy& control,
                                                 std::span<const double> stop_thresholds,
                                                 const SimConfig& cfg) {
  McEstimate meta;
  const auto table = stopper_reward_samples(params, control, stop_thresholds, cfg, &meta);
  std::vector<McEstimate> out;
  for (std::size_t k = 0; k < stop_thresholds.size(); ++k) {
    out.push_back(with_meta(detail::column_summary(table, stop_thresholds.size(), k), params,
                            cfg, meta.clamp_events));
  }
  return out;
}

McEstimate estimate_stopper_reward(const ModelParams& params, const StrategyProfile& profile,
                                   const SimConfig& cfg) {
  const double stops[] = {profile.stop_threshold};
  return estimate_stopper_rewards(params, profile.control, stops, cfg).front();
}

std::vector<double> controller_reward_samples(const ModelParams& params, double stop_threshold,
                                              const ControlPolicy& equilibrium,
                                              const ControlPolicy& deviation,
                                              const SimConfig& cfg, McEstimate* meta) {
  const double stops[] = {stop_threshold};
  auto run = run_strong_paths(params, equilibrium, deviation, stops, cfg, false);
  if (meta != nullptr) *meta = with_meta({}, params, cfg, run.clamp_events);
  return std::move(run.controller);
}

McEstimate estimate_controller_reward(const ModelParams& params, double stop_threshold,
                                      const ControlPolicy& equilibrium,
                                      const ControlPolicy& deviation, const SimConfig& cfg) {
  McEstimate meta;
  const auto samples =
      controller_reward_samples(params, stop_threshold, equilibrium, deviation, cfg, &meta);
  return with_meta(detail::column_summary(samples, 1, 0), params, cfg, meta.clamp_events);
}

McEstimate terminal_belief_mean(const ModelParams& params, const ControlPolicy& equilibrium,
                                BeliefForm form, const SimConfig& cfg) {
  check_config(cfg);
  check_params(params);
  equilibrium.check_admissible(params);
  const PathSetup s(params, equilibrium, equilibrium, {}, cfg, detail::Measure::kStrong, false);
  const std::int64_t n_steps = detail::step_count(cfg);
  std::vector<double> terminal(static_cast<std::size_t>(cfg.n_paths));
  detail::for_each_path(cfg.n_paths, cfg.threads, [&](std::int64_t path) {
    auto eng = detail::path_engine(cfg.seed, static_cast<std::uint64_t>(path));
    const int theta = draw_theta(eng, cfg);
    const auto& coef = s.coef[theta];
    Normal normal;
    double z = s.z0;
    int reg = s.regions.locate_z(z);
    for (std::int64_t i = 0; i < n_steps; ++i) {
      const double dw = s.sqrt_dt * normal(eng);
      const double le = coef[reg].lambda_eq;
      if (form == BeliefForm::kInnovation) {
        z += le * dw + 0.5 * le * le * (2.0 * detail::logistic(z) - 1.0) * s.dt;
      } else {
        z += coef[reg].drift_dt + le * dw;
      }
      reg = s.regions.walk_z(reg, z);
    }
    terminal[static_cast<std::size_t>(path)] = detail::logistic(z);
  });
  McEstimate e = with_meta(detail::column_summary(terminal, 1, 0), params, cfg, 0);
  e.truncation_bound = 0.0;
  e.absorption_bound = 0.0;
  return e;
}

}  // namespace ghostgame
