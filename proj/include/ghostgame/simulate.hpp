#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ghostgame/params.hpp"
#include "ghostgame/solver.hpp"

namespace ghostgame {

/// Right-continuous step function of the belief: levels[0] on [0, bp[0]),
/// levels[i] on [bp[i-1], bp[i]), levels.back() on [bp.back(), 1].
class ControlPolicy {
 public:
  ControlPolicy(std::vector<double> breakpoints, std::vector<double> levels);

  static ControlPolicy constant(double level);
  /// `below` for p < cut, `above` for p >= cut.
  static ControlPolicy threshold(double cut, double below, double above);
  /// High effort strictly below b2, low effort from b2 on.
  static ControlPolicy equilibrium(const ModelParams& params, double b2);

  double operator()(double p) const;
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& levels() const { return levels_; }

  /// Throws std::invalid_argument unless every level is lambda_hi or lambda_lo.
  void check_admissible(const ModelParams& params) const;

 private:
  std::vector<double> breakpoints_;
  std::vector<double> levels_;
};

struct StrategyProfile {
  double stop_threshold = 0.0;
  ControlPolicy control = ControlPolicy::constant(0.0);
};

enum class ThetaMode { kFixedOne, kBernoulli };

enum class Integrator {
  kLogit,   // Euler in Z = log(P/(1-P)); exact between policy switches
  kDirect,  // Euler in P with clamping to [1e-9, 1-1e-9]; test oracle only
};

struct SimConfig {
  double dt = 1e-3;
  double horizon = 200.0;
  std::int64_t n_paths = 100000;
  std::uint64_t seed = 20240917;
  double p0 = 0.5;
  ThetaMode theta_mode = ThetaMode::kBernoulli;
  int threads = 0;             // 0: hardware concurrency
  double absorb_tol = 1e-9;    // see McEstimate::absorption_bound
  Integrator integrator = Integrator::kLogit;
};

/// Throws std::invalid_argument. A zero horizon is allowed (empty simulation).
void check_config(const SimConfig& cfg);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t n = 0;
  double dt = 0.0;
  double horizon = 0.0;
  /// Bound on the discounted payoff beyond the horizon: max(c, lambda_hi)/r e^{-rT}.
  double truncation_bound = 0.0;
  /// Bound on the error from finishing paths analytically once the chance of
  /// ever returning below the top policy switch is below absorb_tol.
  double absorption_bound = 0.0;
  std::int64_t clamp_events = 0;
};

/// Per-path summary statistics; rows must have equal weight.
McEstimate summarize(std::span<const double> samples);

// ---------------------------------------------------------------------------
// Single paths

enum class BeliefForm {
  kStrong,      // driven by W with theta in the drift
  kInnovation,  // driven by the innovation Brownian motion; theta unused
};

struct PathPoint {
  double t = 0.0;
  double p = 0.0;
  double x = 0.0;                  // accumulated income
  double stopper_payoff = 0.0;     // int e^{-rs}(theta lambda_s - c) ds, unstopped
  double controller_payoff = 0.0;  // int e^{-rs}(c - (lambda_s - lambda_lo)^2) ds, unstopped
};

struct BeliefPath {
  std::vector<PathPoint> points;
  std::int64_t stop_index = -1;  // first recorded index with P <= stop_threshold
  std::int64_t clamp_events = 0;
};

struct PathOptions {
  BeliefForm form = BeliefForm::kStrong;
  double stop_threshold = 0.0;  // 0: no stopping bookkeeping
  int record_every = 1;
  std::uint64_t path_index = 0;
};

/// One path of (t, P, X, running payoffs). `equilibrium` drives learning,
/// `deviation` is the effort actually exerted.
BeliefPath simulate_belief_path(const ModelParams& params, const ControlPolicy& equilibrium,
                                const ControlPolicy& deviation, int theta,
                                const SimConfig& cfg, const PathOptions& opts = {});

// ---------------------------------------------------------------------------
// Strong-formulation estimators

/// J1 with theta ~ Bernoulli(p0) (or 1 under kFixedOne), stopping at the first
/// grid time with P <= profile.stop_threshold.
McEstimate estimate_stopper_reward(const ModelParams& params, const StrategyProfile& profile,
                                   const SimConfig& cfg);

/// J1 for several stopping thresholds from one set of paths (common random
/// numbers). Output order matches `stop_thresholds`.
std::vector<McEstimate> estimate_stopper_rewards(const ModelParams& params,
                                                 const ControlPolicy& control,
                                                 std::span<const double> stop_thresholds,
                                                 const SimConfig& cfg);

/// Per-path J1 samples for each threshold, row-major [path][threshold].
std::vector<double> stopper_reward_samples(const ModelParams& params,
                                           const ControlPolicy& control,
                                           std::span<const double> stop_thresholds,
                                           const SimConfig& cfg, McEstimate* meta = nullptr);

/// J2 given theta = 1: learning driven by `equilibrium`, effort `deviation`.
McEstimate estimate_controller_reward(const ModelParams& params, double stop_threshold,
                                      const ControlPolicy& equilibrium,
                                      const ControlPolicy& deviation, const SimConfig& cfg);

std::vector<double> controller_reward_samples(const ModelParams& params, double stop_threshold,
                                              const ControlPolicy& equilibrium,
                                              const ControlPolicy& deviation,
                                              const SimConfig& cfg, McEstimate* meta = nullptr);

/// P_T without stopping; a martingale check for the no-deviation filter.
McEstimate terminal_belief_mean(const ModelParams& params, const ControlPolicy& equilibrium,
                                BeliefForm form, const SimConfig& cfg);

// ---------------------------------------------------------------------------
// Weak formulation

enum class WeakPayoff { kStopper, kController };

enum class WeightScheme {
  kIncrement,  // each payoff increment weighted by the likelihood at its time
  kStopped,    // whole payoff weighted by the likelihood at tau ^ T
};

struct WeakOptions {
  WeakPayoff payoff = WeakPayoff::kStopper;
  WeightScheme scheme = WeightScheme::kIncrement;
};

struct WeakEstimate {
  McEstimate estimate;
  /// Effective sample size of the discount-averaged likelihood weights.
  double effective_sample_size = 0.0;
  bool low_ess = false;  // ESS < 1% of n_paths
  McEstimate stopped_weight;  // E[Lambda_{tau ^ T}], should be 1
};

/// X simulated as a standard Brownian motion; P follows the filter driven by
/// dX; the controlled law is recovered by the likelihood ratio
/// Lambda = exp(int (theta lambda - c) dX - 1/2 int (theta lambda - c)^2 dt).
WeakEstimate weak_estimate(const ModelParams& params, const ControlPolicy& equilibrium,
                           const ControlPolicy& control, double stop_threshold,
                           const SimConfig& cfg, const WeakOptions& opts = {});

/// E[Lambda_T] without stopping.
McEstimate likelihood_weight_mean(const ModelParams& params, const ControlPolicy& equilibrium,
                                  const ControlPolicy& control, const SimConfig& cfg);

// ---------------------------------------------------------------------------
// Nash gap

struct DeviationResult {
  std::string label;
  McEstimate reward;
  double improvement = 0.0;  // deviation mean - equilibrium mean
  double combined_se = 0.0;  // sqrt(se_eq^2 + se_dev^2)
  double paired_se = 0.0;    // SE of per-path differences (common random numbers)
};

struct PlayerGap {
  McEstimate equilibrium;
  std::vector<DeviationResult> deviations;
  double gap = 0.0;  // max improvement
  double gap_combined_se = 0.0;
  std::string argmax;
};

struct DeviationFamilies {
  std::vector<double> stop_thresholds;    // stopper deviations b1'
  std::vector<double> switch_thresholds;  // controller deviations b2'
  bool include_constant_policies = true;  // always low / always high effort
};

/// b1' in {0.05, ..., 0.95}, b2' in {0.1, ..., 0.9}, plus both constants.
DeviationFamilies default_deviation_families();

struct NashGapReport {
  double p0 = 0.0;
  PlayerGap stopper;
  PlayerGap controller;
};

NashGapReport nash_gap(const ModelParams& params, const ThresholdPair& equilibrium,
                       const DeviationFamilies& families, const SimConfig& cfg);

// ---------------------------------------------------------------------------
// Filter calibration

struct CalibrationBin {
  double lo = 0.0;
  double hi = 0.0;
  std::int64_t count = 0;
  double mean_theta = 0.0;
  double se_theta = 0.0;
  double mean_belief = 0.0;
};

struct CalibrationSlice {
  double t = 0.0;
  std::vector<CalibrationBin> bins;
};

/// Bins P_t by value and averages theta per bin; theta ~ Bernoulli(p0),
/// no deviation, no stopping.
std::vector<CalibrationSlice> calibrate_filter(const ModelParams& params,
                                               const ControlPolicy& equilibrium,
                                               std::span<const double> times, int n_bins,
                                               const SimConfig& cfg);

}  // namespace ghostgame
