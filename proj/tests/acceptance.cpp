// Runs every acceptance criterion and prints one PASS/FAIL line for each.
// Exit status is nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ghostgame/cli.hpp"
#include "ghostgame/closed_form.hpp"
#include "ghostgame/params.hpp"
#include "ghostgame/simulate.hpp"
#include "ghostgame/solver.hpp"
#include "support.hpp"

namespace {

using namespace ghostgame;
using Clock = std::chrono::steady_clock;

// Tolerances
constexpr double kThresholdTol = 0.003;
constexpr double kB1Paper = 0.125;
constexpr double kB2Paper = 0.618;
constexpr double kSolveSeconds = 1.0;
constexpr double kOdeStep = 1e-5;
constexpr double kOdeTol = 1e-4;
constexpr int kOdePoints = 1000;
constexpr double kSeMultiple = 3.0;
constexpr double kMcSlack = 0.05;
constexpr double kIdentityTol = 1e-12;
constexpr int kIdentityDraws = 10000;
constexpr std::int64_t kMinBinCount = 100;

// Monte Carlo settings
constexpr std::int64_t kMcPaths = 100000;
constexpr double kMcDt = 1e-3;
constexpr double kMcHorizon = 200.0;
constexpr std::int64_t kNashPaths = 20000;
constexpr double kNashDt = 2e-3;
constexpr std::int64_t kWeakPaths = 100000;
constexpr double kWeakDt = 1e-2;
constexpr std::int64_t kCalibPaths = 100000;
constexpr double kCalibDt = 1e-2;
constexpr std::uint64_t kSeed = 20240917;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

SimConfig mc_config(std::int64_t n, double dt, double horizon, double p0) {
  SimConfig cfg;
  cfg.n_paths = n;
  cfg.dt = dt;
  cfg.horizon = horizon;
  cfg.seed = kSeed;
  cfg.p0 = p0;
  return cfg;
}

Outcome figure_one() {
  namespace fs = std::filesystem;
  const auto path = fs::temp_directory_path() / "ghostgame_acceptance.json";
  std::ofstream(path) << R"({"params": {"lambda_hi": 2.2, "lambda_lo": 1.4, "c": 1, "r": 0.2}})";
  std::ostringstream out, err;
  const auto t0 = Clock::now();
  const int code = run_cli({"solve", "--config", path.string()}, out, err);
  const double elapsed = seconds_since(t0);
  fs::remove(path);
  if (code != kExitOk) return {false, "solve exited " + std::to_string(code) + ": " + err.str()};
  const auto doc = nlohmann::json::parse(out.str());
  const double b1 = doc["b1_star"].get<double>();
  const double b2 = doc["b2_star"].get<double>();
  const bool ok = std::abs(b1 - kB1Paper) <= kThresholdTol &&
                  std::abs(b2 - kB2Paper) <= kThresholdTol && elapsed < kSolveSeconds;
  return {ok, fmt("b1*=%.10f b2*=%.10f time=%.3fs", b1, b2, elapsed)};
}

Outcome certification(const EquilibriumCertificate& cert) {
  const auto& c = cert.conditions;
  const bool ok = c.grid_n == 2001 && c.stopper_value_nonnegative.ok && c.smooth_fit.ok &&
                  c.slope_decreasing.ok && c.indifference.ok;
  const double target = testing::reference_params().rate_gap() / testing::reference_params().lambda_lo;
  return {ok, fmt("grid=%d min u margin=%.3g |u_p(b1+)|=%.3g slope margin=%.3g "
                  "|indifference - %.6f|=%.3g",
                  c.grid_n, c.stopper_value_nonnegative.worst_margin, std::abs(cert.residual.f_val),
                  c.slope_decreasing.worst_margin, target, std::abs(cert.residual.g_val))};
}

Outcome ode_residuals(const EquilibriumCertificate& cert) {
  const ValueCurves vc(testing::reference_params(), cert.star);
  const double b1 = cert.star.b1;
  const double b2 = cert.star.b2;
  double worst_v = 0.0, worst_u = 0.0;
  int used = 0;
  for (int i = 1; i <= kOdePoints; ++i) {
    double p = b1 + (1.0 - b1) * i / (kOdePoints + 1.0);
    // Keep the stencil on one side of the switch and inside (b1, 1).
    if (std::abs(p - b2) < 2 * kOdeStep) p = b2 + 2 * kOdeStep;
    p = std::clamp(p, b1 + 2 * kOdeStep, 1.0 - 2 * kOdeStep);
    worst_v = std::max(worst_v, std::abs(testing::controller_ode_residual(vc, p, kOdeStep)));
    worst_u = std::max(worst_u, std::abs(testing::stopper_ode_residual(vc, p, kOdeStep)));
    ++used;
  }
  return {used == kOdePoints && worst_v <= kOdeTol && worst_u <= kOdeTol,
          fmt("points=%d max controller residual=%.3g max stopper residual=%.3g", used, worst_v,
              worst_u)};
}

Outcome appendix_certificates(const EquilibriumCertificate& cert) {
  const auto& c = cert.conditions;
  const bool ok = c.v_below_cap.ok && c.v_increasing.ok && c.u_nonnegative.ok &&
                  c.b1_below_bound.ok;
  return {ok, fmt("c/r - max v=%.4g min v_p=%.4g min u=%.3g c/lambda_hi - b1*=%.4f",
                  c.v_below_cap.worst_margin, c.v_increasing.worst_margin,
                  c.u_nonnegative.worst_margin, c.b1_below_bound.worst_margin)};
}

Outcome mc_vs_closed_form(const EquilibriumCertificate& cert) {
  const auto m = testing::reference_params();
  const ValueCurves vc(m, cert.star);
  const auto pol = ControlPolicy::equilibrium(m, cert.star.b2);
  bool ok = true;
  std::string detail;
  for (double p0 : {0.3, 0.5, 0.8}) {
    auto cfg = mc_config(kMcPaths, kMcDt, kMcHorizon, p0);
    const auto j1 = estimate_stopper_reward(m, {cert.star.b1, pol}, cfg);
    cfg.theta_mode = ThetaMode::kFixedOne;
    const auto j2 = estimate_controller_reward(m, cert.star.b1, pol, pol, cfg);
    const double e1 = std::abs(j1.mean - vc.u(p0));
    const double e2 = std::abs(j2.mean - vc.v(p0));
    ok = ok && e1 <= kSeMultiple * j1.std_error + kMcSlack &&
         e2 <= kSeMultiple * j2.std_error + kMcSlack;
    detail += fmt("p0=%.1f J1=%.4f(%.4f) u=%.4f J2=%.4f(%.4f) v=%.4f; ", p0, j1.mean, j1.std_error,
                  vc.u(p0), j2.mean, j2.std_error, vc.v(p0));
  }
  return {ok, detail};
}

Outcome nash(const EquilibriumCertificate& cert) {
  const auto report = nash_gap(testing::reference_params(), cert.star,
                               default_deviation_families(),
                               mc_config(kNashPaths, kNashDt, kMcHorizon, 0.5));
  bool ok = true;
  double worst = -1e300;
  for (const auto* player : {&report.stopper, &report.controller}) {
    for (const auto& d : player->deviations) {
      const double slack = kSeMultiple * d.combined_se + kMcSlack - d.improvement;
      ok = ok && slack >= 0.0;
      worst = std::max(worst, d.improvement - kSeMultiple * d.combined_se);
    }
  }
  return {ok, fmt("stopper gap=%.4f (%s) controller gap=%.4f (%s) max(improvement - 3SE)=%.4f",
                  report.stopper.gap, report.stopper.argmax.c_str(), report.controller.gap,
                  report.controller.argmax.c_str(), worst)};
}

Outcome weak_strong(const EquilibriumCertificate& cert) {
  const auto m = testing::reference_params();
  const auto pol = ControlPolicy::equilibrium(m, cert.star.b2);
  const auto cfg = mc_config(kWeakPaths, kWeakDt, kMcHorizon, 0.5);
  const auto strong = estimate_stopper_reward(m, {cert.star.b1, pol}, cfg);
  const auto weak = weak_estimate(m, pol, pol, cert.star.b1, cfg);
  const double diff = std::abs(weak.estimate.mean - strong.mean);
  const double se = std::hypot(weak.estimate.std_error, strong.std_error);
  bool ok = diff <= kSeMultiple * se && !weak.low_ess;
  std::string detail = fmt("weak=%.4f(%.4f) strong=%.4f(%.4f) ESS=%.0f; ", weak.estimate.mean,
                           weak.estimate.std_error, strong.mean, strong.std_error,
                           weak.effective_sample_size);
  for (double horizon : {0.5, 1.0, 2.0}) {
    const auto l = likelihood_weight_mean(m, pol, pol, mc_config(kWeakPaths, kWeakDt, horizon, 0.5));
    ok = ok && std::abs(l.mean - 1.0) <= kSeMultiple * l.std_error;
    detail += fmt("E[L_%.1f]=%.4f(%.4f) ", horizon, l.mean, l.std_error);
  }
  return {ok, detail};
}

Outcome calibration(const EquilibriumCertificate& cert) {
  const auto m = testing::reference_params();
  const double times[] = {1.0, 5.0, 20.0};
  const auto slices = calibrate_filter(m, ControlPolicy::equilibrium(m, cert.star.b2), times, 10,
                                       mc_config(kCalibPaths, kCalibDt, 20.0, 0.5));
  bool ok = slices.size() == 3;
  int checked = 0;
  double worst_z = 0.0;
  for (const auto& s : slices) {
    for (const auto& b : s.bins) {
      if (b.count < kMinBinCount) continue;
      ++checked;
      const double dev = std::abs(b.mean_theta - b.mean_belief);
      ok = ok && dev <= kSeMultiple * b.se_theta;
      if (b.se_theta > 0.0) worst_z = std::max(worst_z, dev / b.se_theta);
    }
  }
  return {ok && checked > 0, fmt("bins checked=%d max |mean theta - mean P|/SE=%.2f", checked, worst_z)};
}

Outcome exponent_identities() {
  std::mt19937_64 eng(kSeed);
  std::uniform_real_distribution<double> dist(0.01, 100.0);
  double worst_sum = 0.0, worst_prod = 0.0;
  for (int i = 0; i < kIdentityDraws; ++i) {
    const double level = dist(eng);
    const double r = dist(eng);
    const auto a = alpha(level, r);
    worst_sum = std::max(worst_sum, std::abs(a.alpha1 + a.alpha2 - 1.0));
    const double q = 2.0 * r / (level * level);
    worst_prod = std::max(worst_prod, std::abs(a.alpha1 * a.alpha2 + q) / (1.0 + q));
  }
  return {worst_sum <= kIdentityTol && worst_prod <= kIdentityTol,
          fmt("draws=%d max|a1+a2-1|=%.3g max|a1*a2+q|/(1+q)=%.3g", kIdentityDraws, worst_sum,
              worst_prod)};
}

Outcome small_gap_sweep() {
  bool ok = true;
  int n = 0;
  std::string failed;
  for (int i = 0; i <= 15; ++i) {
    const double hi = 1.45 + 0.05 * i;
    ++n;
    try {
      const auto cert = solve_equilibrium({hi, 1.4, 1.0, 0.2});
      if (!cert.certified) {
        ok = false;
        failed += fmt("%.2f ", hi);
      }
    } catch (const std::exception&) {
      ok = false;
      failed += fmt("%.2f(no root) ", hi);
    }
  }
  return {ok, fmt("values=%d uncertified=[%s]", n, failed.c_str())};
}

}  // namespace

int main() {
  const auto cert = solve_equilibrium(testing::reference_params());
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"figure_one_thresholds", figure_one},
      {"certification_conditions", [&] { return certification(cert); }},
      {"ode_residuals", [&] { return ode_residuals(cert); }},
      {"appendix_certificates", [&] { return appendix_certificates(cert); }},
      {"mc_vs_closed_form", [&] { return mc_vs_closed_form(cert); }},
      {"nash_gap", [&] { return nash(cert); }},
      {"weak_strong_agreement", [&] { return weak_strong(cert); }},
      {"filter_calibration", [&] { return calibration(cert); }},
      {"exponent_identities", exponent_identities},
      {"small_gap_sweep", small_gap_sweep},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s %2zu %s [%.1fs] %s\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), seconds_since(t0), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
