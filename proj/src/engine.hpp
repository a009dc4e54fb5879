#pragma once

// Internal path-simulation machinery shared by the estimators.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <span>
#include <thread>
#include <vector>

#include <boost/random/normal_distribution.hpp>

#include "ghostgame/simulate.hpp"

namespace ghostgame::detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent engine per (seed, path).
inline std::mt19937_64 path_engine(std::uint64_t seed, std::uint64_t path) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(path + 0x632be59bd9b4e019ULL)));
}

/// Uniform on [0,1) from the top 53 bits.
inline double uniform01(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

using Normal = boost::random::normal_distribution<double>;

inline double logit(double p) { return std::log(p) - std::log1p(-p); }
inline double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Coefficients of one step inside a region where both policies are constant.
struct StepCoef {
  double lambda_eq = 0.0;
  double lambda_dev = 0.0;
  double drift_dt = 0.0;       // Z drift times dt
  double vol_sqdt = 0.0;       // lambda_eq * sqrt(dt)
  double stopper_rate = 0.0;   // theta lambda - c
  double controller_rate = 0.0;  // c - (lambda - lambda_lo)^2
};

/// Belief axis split at every policy breakpoint, in log-odds.
class Regions {
 public:
  Regions(const ControlPolicy& eq, const ControlPolicy& dev) {
    std::vector<double> cuts = eq.breakpoints();
    cuts.insert(cuts.end(), dev.breakpoints().begin(), dev.breakpoints().end());
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    p_cuts_ = cuts;
    for (double b : cuts) z_cuts_.push_back(logit(b));
    // Policies are right-continuous, so each region [lo, hi) takes the value at lo.
    for (std::size_t j = 0; j <= p_cuts_.size(); ++j) {
      const double at = j == 0 ? 0.0 : p_cuts_[j - 1];
      levels_eq_.push_back(eq(at));
      levels_dev_.push_back(dev(at));
    }
  }

  int size() const { return static_cast<int>(levels_eq_.size()); }
  int top() const { return size() - 1; }
  const std::vector<double>& z_cuts() const { return z_cuts_; }
  const std::vector<double>& p_cuts() const { return p_cuts_; }
  double lambda_eq(int j) const { return levels_eq_[j]; }
  double lambda_dev(int j) const { return levels_dev_[j]; }

  int locate_z(double z) const {
    return static_cast<int>(std::upper_bound(z_cuts_.begin(), z_cuts_.end(), z) - z_cuts_.begin());
  }
  int locate_p(double p) const {
    return static_cast<int>(std::upper_bound(p_cuts_.begin(), p_cuts_.end(), p) - p_cuts_.begin());
  }
  /// Region of z starting the search from the previous region.
  int walk_z(int j, double z) const {
    while (j > 0 && z < z_cuts_[j - 1]) --j;
    while (j < top() && z >= z_cuts_[j]) ++j;
    return j;
  }
  int walk_p(int j, double p) const {
    while (j > 0 && p < p_cuts_[j - 1]) --j;
    while (j < top() && p >= p_cuts_[j]) ++j;
    return j;
  }

 private:
  std::vector<double> p_cuts_;
  std::vector<double> z_cuts_;
  std::vector<double> levels_eq_;
  std::vector<double> levels_dev_;
};

/// Step coefficients per region for theta in {0, 1}.
enum class Measure { kStrong, kWeak };

inline std::vector<StepCoef> step_coefficients(const ModelParams& params, const Regions& regions,
                                               int theta, double dt, Measure measure) {
  std::vector<StepCoef> out(regions.size());
  const double sq = std::sqrt(dt);
  for (int j = 0; j < regions.size(); ++j) {
    StepCoef& s = out[j];
    s.lambda_eq = regions.lambda_eq(j);
    s.lambda_dev = regions.lambda_dev(j);
    const double le = s.lambda_eq;
    const double drive = measure == Measure::kStrong ? theta * s.lambda_dev : params.c;
    s.drift_dt = (le * drive - 0.5 * le * le) * dt;
    s.vol_sqdt = le * sq;
    s.stopper_rate = theta * s.lambda_dev - params.c;
    const double shirk = s.lambda_dev - params.lambda_lo;
    s.controller_rate = params.c - shirk * shirk;
  }
  return out;
}

/// Log-odds level above which a path with positive drift mu and volatility
/// sigma returns to `z_top` with probability at most `tol`.
inline double absorption_level(double z_top, double mu, double sigma, double tol) {
  if (!(mu > 0.0) || !(tol > 0.0)) return std::numeric_limits<double>::infinity();
  return z_top + sigma * sigma * std::log(1.0 / tol) / (2.0 * mu);
}

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Calls fn(path) for path in [0, n) over contiguous chunks. Results must be
/// written to per-path slots so the outcome is schedule independent.
template <typename Fn>
void for_each_path(std::int64_t n, int threads, Fn&& fn) {
  const int t = static_cast<int>(std::min<std::int64_t>(resolve_threads(threads), std::max<std::int64_t>(n, 1)));
  if (t <= 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(t);
  const std::int64_t chunk = (n + t - 1) / t;
  for (int k = 0; k < t; ++k) {
    const std::int64_t lo = k * chunk;
    const std::int64_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::int64_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

/// Pairwise summation over a strided view.
inline double pairwise_sum(const double* x, std::size_t n, std::size_t stride) {
  if (n <= 16) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i * stride];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(x, half, stride) + pairwise_sum(x + half * stride, n - half, stride);
}

/// Mean and standard error of column `col` of a row-major [n][width] table.
inline McEstimate column_summary(const std::vector<double>& table, std::size_t width,
                                 std::size_t col) {
  McEstimate e;
  const std::size_t n = width == 0 ? 0 : table.size() / width;
  e.n = static_cast<std::int64_t>(n);
  if (n == 0) return e;
  const double* base = table.data() + col;
  e.mean = pairwise_sum(base, n, width) / static_cast<double>(n);
  if (n > 1) {
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = base[i * width] - e.mean;
      sq[i] = d * d;
    }
    const double var = pairwise_sum(sq.data(), n, 1) / static_cast<double>(n - 1);
    e.std_error = std::sqrt(var / static_cast<double>(n));
  }
  return e;
}

/// Number of Euler steps covering the horizon.
inline std::int64_t step_count(const SimConfig& cfg) {
  if (cfg.horizon == 0.0) return 0;
  return static_cast<std::int64_t>(std::ceil(cfg.horizon / cfg.dt - 1e-9));
}

inline double truncation_bound(const ModelParams& params, const SimConfig& cfg) {
  return std::max(params.c, params.lambda_hi) / params.r * std::exp(-params.r * cfg.horizon);
}

}  // namespace ghostgame::detail

namespace ghostgame::detail {

/// Everything a path kernel needs, fixed for one estimator call.
struct PathSetup {
  Regions regions;
  std::vector<StepCoef> coef[2];  // indexed by theta
  std::vector<double> z_stops;    // descending; -inf for "never stop"
  std::vector<double> p_stops;    // same levels in belief space
  double z_absorb[2] = {std::numeric_limits<double>::infinity(),
                        std::numeric_limits<double>::infinity()};
  double z0 = 0.0;
  double p0 = 0.5;
  double dt = 0.0;
  double sqrt_dt = 0.0;
  double q = 1.0;       // e^{-r dt}
  double w = 0.0;       // int_0^dt e^{-rs} ds
  double r = 0.0;
  double horizon = 0.0;
  std::int64_t n_steps = 0;

  PathSetup(const ModelParams& params, const ControlPolicy& eq, const ControlPolicy& dev,
            std::vector<double> stops, const SimConfig& cfg, Measure measure, bool absorb)
      : regions(eq, dev) {
    std::sort(stops.begin(), stops.end(), std::greater<>());
    p_stops = stops;
    for (double b : stops) {
      z_stops.push_back(b > 0.0 ? logit(b) : -std::numeric_limits<double>::infinity());
    }
    dt = cfg.dt;
    sqrt_dt = std::sqrt(dt);
    r = params.r;
    q = std::exp(-r * dt);
    w = -std::expm1(-r * dt) / r;
    horizon = cfg.horizon;
    p0 = cfg.p0;
    z0 = logit(cfg.p0);
    n_steps = step_count(cfg);
    // Past this many steps the discount factor is below 1e-250.
    const double cap = 250.0 * std::log(10.0) / (r * dt);
    if (static_cast<double>(n_steps) > cap) n_steps = static_cast<std::int64_t>(cap);
    for (int theta = 0; theta < 2; ++theta) {
      coef[theta] = step_coefficients(params, regions, theta, dt, measure);
    }
    if (absorb) {
      double z_top = -std::numeric_limits<double>::infinity();
      if (!regions.z_cuts().empty()) z_top = regions.z_cuts().back();
      if (!z_stops.empty()) z_top = std::max(z_top, z_stops.front());
      // Absorption is judged under the controlled law, whatever the sampling measure.
      const auto target = step_coefficients(params, regions, 0, dt, Measure::kStrong);
      const auto target1 = step_coefficients(params, regions, 1, dt, Measure::kStrong);
      const StepCoef* tops[2] = {&target[regions.top()], &target1[regions.top()]};
      for (int theta = 0; theta < 2; ++theta) {
        const double mu = tops[theta]->drift_dt / dt;
        z_absorb[theta] = absorption_level(z_top, mu, tops[theta]->lambda_eq, cfg.absorb_tol);
      }
    }
  }

  /// int_t^T e^{-rs} ds / e^{-rt} after `steps` steps.
  double remaining_weight(std::int64_t steps) const {
    const double left = horizon - static_cast<double>(steps) * dt;
    return left > 0.0 ? -std::expm1(-r * left) / r : 0.0;
  }
};

inline double absorption_bound(const ModelParams& params, const SimConfig& cfg) {
  const double gap = params.rate_gap();
  return 2.0 * cfg.absorb_tol * (std::max(params.lambda_hi, params.c) + gap * gap) / params.r;
}

}  // namespace ghostgame::detail

namespace ghostgame::detail {

inline void check_params(const ModelParams& params) {
  if (!(params.r > 0.0)) throw std::invalid_argument("simulation needs r > 0");
}

inline void check_stop(double b) {
  if (!(b >= 0.0 && b < 1.0)) {
    std::ostringstream msg;
    msg << "stop threshold must lie in [0,1), got " << b;
    throw std::invalid_argument(msg.str());
  }
}

inline int draw_theta(std::mt19937_64& eng, const SimConfig& cfg) {
  const double u = uniform01(eng);
  return cfg.theta_mode == ThetaMode::kFixedOne ? 1 : (u < cfg.p0 ? 1 : 0);
}

inline McEstimate with_meta(McEstimate e, const ModelParams& params, const SimConfig& cfg,
                     std::int64_t clamps) {
  e.dt = cfg.dt;
  e.horizon = cfg.horizon;
  e.truncation_bound = truncation_bound(params, cfg);
  e.absorption_bound = absorption_bound(params, cfg);
  e.clamp_events = clamps;
  return e;
}

}  // namespace ghostgame::detail
