#include <cmath>
#include <limits>

#include "engine.hpp"
#include "ghostgame/simulate.hpp"

namespace ghostgame {

namespace {

struct WeakPath {
  double increment = 0.0;  // sum of Lambda_s e^{-rs} h ds
  double stopped = 0.0;    // Lambda_{tau ^ T} int e^{-rs} h ds
  double weight = 1.0;     // Lambda_{tau ^ T}
  double mean_weight = 1.0;  // discount-averaged Lambda over [0, tau ^ T]
};

// X is a standard Brownian motion; the belief is driven by dX and the
// likelihood accumulates (theta lambda - c) dX - (theta lambda - c)^2 dt / 2.
WeakPath run_weak(const detail::PathSetup& s, int theta, std::mt19937_64& eng, WeakPayoff payoff,
                  bool stop) {
  const auto& coef = s.coef[theta];
  const auto& regions = s.regions;
  const double z_stop = stop && !s.z_stops.empty() ? s.z_stops.front()
                                                   : -std::numeric_limits<double>::infinity();
  detail::Normal normal;
  WeakPath out;
  double z = s.z0;
  if (z <= z_stop) return out;

  auto rate_of = [&](const detail::StepCoef& k) {
    return payoff == WeakPayoff::kStopper ? k.stopper_rate : k.controller_rate;
  };
  double log_l = 0.0;
  double lam = 1.0;
  double disc = 1.0;
  double raw = 0.0;
  double num = 0.0;
  double den = 0.0;
  const int top = regions.top();
  int reg = regions.locate_z(z);
  for (std::int64_t i = 0; i < s.n_steps; ++i) {
    const detail::StepCoef& k = coef[reg];
    const double piece = disc * s.w;
    out.increment += lam * piece * rate_of(k);
    raw += piece * rate_of(k);
    num += lam * piece;
    den += piece;

    const double dx = s.sqrt_dt * normal(eng);
    const double h = k.stopper_rate;
    log_l += h * dx - 0.5 * h * h * s.dt;
    lam = std::exp(log_l);
    z += k.drift_dt + k.lambda_eq * dx;
    reg = regions.walk_z(reg, z);
    disc *= s.q;
    if (z <= z_stop) break;
    if (reg == top && z >= s.z_absorb[theta]) {
      const double rest = disc * s.remaining_weight(i + 1);
      out.increment += lam * rest * rate_of(coef[top]);
      raw += rest * rate_of(coef[top]);
      num += lam * rest;
      den += rest;
      break;
    }
  }
  out.stopped = lam * raw;
  out.weight = lam;
  out.mean_weight = den > 0.0 ? num / den : 1.0;
  return out;
}

}  // namespace

WeakEstimate weak_estimate(const ModelParams& params, const ControlPolicy& equilibrium,
                           const ControlPolicy& control, double stop_threshold,
                           const SimConfig& cfg, const WeakOptions& opts) {
  check_config(cfg);
  detail::check_params(params);
  equilibrium.check_admissible(params);
  control.check_admissible(params);
  detail::check_stop(stop_threshold);

  const detail::PathSetup setup(params, equilibrium, control, {stop_threshold}, cfg,
                                detail::Measure::kWeak, true);
  const auto n = static_cast<std::size_t>(cfg.n_paths);
  constexpr std::size_t kWidth = 4;
  std::vector<double> table(n * kWidth);
  detail::for_each_path(cfg.n_paths, cfg.threads, [&](std::int64_t path) {
    auto eng = detail::path_engine(cfg.seed, static_cast<std::uint64_t>(path));
    const int theta = detail::draw_theta(eng, cfg);
    const WeakPath w = run_weak(setup, theta, eng, opts.payoff, true);
    double* row = table.data() + static_cast<std::size_t>(path) * kWidth;
    row[0] = w.increment;
    row[1] = w.stopped;
    row[2] = w.weight;
    row[3] = w.mean_weight;
  });

  WeakEstimate out;
  const std::size_t col = opts.scheme == WeightScheme::kIncrement ? 0 : 1;
  out.estimate = detail::with_meta(detail::column_summary(table, kWidth, col), params, cfg, 0);
  out.stopped_weight = detail::with_meta(detail::column_summary(table, kWidth, 2), params, cfg, 0);
  out.stopped_weight.truncation_bound = 0.0;

  std::vector<double> w(n), w2(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = table[i * kWidth + 3];
    w2[i] = w[i] * w[i];
  }
  const double s1 = detail::pairwise_sum(w.data(), n, 1);
  const double s2 = detail::pairwise_sum(w2.data(), n, 1);
  out.effective_sample_size = s2 > 0.0 ? s1 * s1 / s2 : 0.0;
  out.low_ess = out.effective_sample_size < 0.01 * static_cast<double>(n);
  return out;
}

McEstimate likelihood_weight_mean(const ModelParams& params, const ControlPolicy& equilibrium,
                                  const ControlPolicy& control, const SimConfig& cfg) {
  check_config(cfg);
  detail::check_params(params);
  equilibrium.check_admissible(params);
  control.check_admissible(params);

  const detail::PathSetup setup(params, equilibrium, control, {}, cfg, detail::Measure::kWeak,
                                false);
  std::vector<double> weights(static_cast<std::size_t>(cfg.n_paths));
  detail::for_each_path(cfg.n_paths, cfg.threads, [&](std::int64_t path) {
    auto eng = detail::path_engine(cfg.seed, static_cast<std::uint64_t>(path));
    const int theta = detail::draw_theta(eng, cfg);
    weights[static_cast<std::size_t>(path)] =
        run_weak(setup, theta, eng, WeakPayoff::kStopper, false).weight;
  });
  McEstimate e = detail::with_meta(detail::column_summary(weights, 1, 0), params, cfg, 0);
  e.truncation_bound = 0.0;
  e.absorption_bound = 0.0;
  return e;
}

}  // namespace ghostgame
