#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "engine.hpp"
#include "ghostgame/simulate.hpp"

namespace ghostgame {

DeviationFamilies default_deviation_families() {
  DeviationFamilies f;
  for (int i = 1; i <= 19; ++i) f.stop_thresholds.push_back(i / 20.0);
  for (int i = 1; i <= 9; ++i) f.switch_thresholds.push_back(i / 10.0);
  f.include_constant_policies = true;
  return f;
}

namespace {

std::string label(const char* prefix, double value) {
  std::ostringstream s;
  s << prefix << value;
  return s.str();
}

McEstimate column(const std::vector<double>& table, std::size_t width, std::size_t col,
                  const McEstimate& meta) {
  McEstimate e = detail::column_summary(table, width, col);
  e.dt = meta.dt;
  e.horizon = meta.horizon;
  e.truncation_bound = meta.truncation_bound;
  e.absorption_bound = meta.absorption_bound;
  e.clamp_events = meta.clamp_events;
  return e;
}

DeviationResult compare(std::string name, const std::vector<double>& eq_samples,
                        const McEstimate& eq, std::vector<double> dev_samples,
                        const McEstimate& dev) {
  DeviationResult d;
  d.label = std::move(name);
  d.reward = dev;
  d.improvement = dev.mean - eq.mean;
  d.combined_se = std::hypot(eq.std_error, dev.std_error);
  for (std::size_t i = 0; i < dev_samples.size(); ++i) dev_samples[i] -= eq_samples[i];
  d.paired_se = detail::column_summary(dev_samples, 1, 0).std_error;
  return d;
}

void finish(PlayerGap& g) {
  g.gap = 0.0;
  g.gap_combined_se = 0.0;
  g.argmax.clear();
  bool first = true;
  for (const auto& d : g.deviations) {
    if (first || d.improvement > g.gap) {
      g.gap = d.improvement;
      g.gap_combined_se = d.combined_se;
      g.argmax = d.label;
      first = false;
    }
  }
}

}  // namespace

NashGapReport nash_gap(const ModelParams& params, const ThresholdPair& equilibrium,
                       const DeviationFamilies& families, const SimConfig& cfg) {
  check_thresholds(equilibrium);
  const ControlPolicy eq_policy = ControlPolicy::equilibrium(params, equilibrium.b2);
  NashGapReport report;
  report.p0 = cfg.p0;

  // Stopper: every threshold from the same paths.
  {
    SimConfig c = cfg;
    c.theta_mode = ThetaMode::kBernoulli;
    std::vector<double> stops = {equilibrium.b1};
    stops.insert(stops.end(), families.stop_thresholds.begin(), families.stop_thresholds.end());
    McEstimate meta;
    const auto table = stopper_reward_samples(params, eq_policy, stops, c, &meta);
    const std::size_t width = stops.size();
    const std::size_t n = table.size() / width;
    report.stopper.equilibrium = column(table, width, 0, meta);
    std::vector<double> eq_samples(n);
    for (std::size_t i = 0; i < n; ++i) eq_samples[i] = table[i * width];
    for (std::size_t k = 1; k < width; ++k) {
      std::vector<double> dev(n);
      for (std::size_t i = 0; i < n; ++i) dev[i] = table[i * width + k];
      report.stopper.deviations.push_back(compare(label("stop at b1'=", stops[k]), eq_samples,
                                                  report.stopper.equilibrium, std::move(dev),
                                                  column(table, width, k, meta)));
    }
    finish(report.stopper);
  }

  // Controller: theta = 1, learning driven by the equilibrium policy.
  {
    SimConfig c = cfg;
    c.theta_mode = ThetaMode::kFixedOne;
    McEstimate meta;
    const auto eq_samples =
        controller_reward_samples(params, equilibrium.b1, eq_policy, eq_policy, c, &meta);
    report.controller.equilibrium = column(eq_samples, 1, 0, meta);

    std::vector<std::pair<std::string, ControlPolicy>> devs;
    for (double b : families.switch_thresholds) {
      devs.emplace_back(label("switch at b2'=", b),
                        ControlPolicy::threshold(b, params.lambda_hi, params.lambda_lo));
    }
    if (families.include_constant_policies) {
      devs.emplace_back("constant lambda_lo", ControlPolicy::constant(params.lambda_lo));
      devs.emplace_back("constant lambda_hi", ControlPolicy::constant(params.lambda_hi));
    }
    for (auto& [name, policy] : devs) {
      McEstimate dmeta;
      auto samples = controller_reward_samples(params, equilibrium.b1, eq_policy, policy, c, &dmeta);
      const McEstimate est = column(samples, 1, 0, dmeta);
      report.controller.deviations.push_back(
          compare(name, eq_samples, report.controller.equilibrium, std::move(samples), est));
    }
    finish(report.controller);
  }
  return report;
}

std::vector<CalibrationSlice> calibrate_filter(const ModelParams& params,
                                               const ControlPolicy& equilibrium,
                                               std::span<const double> times, int n_bins,
                                               const SimConfig& cfg) {
  check_config(cfg);
  detail::check_params(params);
  equilibrium.check_admissible(params);
  if (n_bins < 1) throw std::invalid_argument("calibrate_filter: n_bins must be >= 1");
  std::vector<std::int64_t> marks;
  for (double t : times) {
    if (!(t >= 0.0) || !std::isfinite(t)) {
      throw std::invalid_argument("calibrate_filter: times must be finite and non-negative");
    }
    marks.push_back(static_cast<std::int64_t>(std::llround(t / cfg.dt)));
  }
  const std::int64_t last = marks.empty() ? 0 : *std::max_element(marks.begin(), marks.end());

  const detail::PathSetup s(params, equilibrium, equilibrium, {}, cfg, detail::Measure::kStrong,
                            false);
  const std::size_t m = marks.size();
  const std::size_t width = m + 1;  // theta, then P at each mark
  const auto n = static_cast<std::size_t>(cfg.n_paths);
  std::vector<double> table(n * width);
  detail::for_each_path(cfg.n_paths, cfg.threads, [&](std::int64_t path) {
    auto eng = detail::path_engine(cfg.seed, static_cast<std::uint64_t>(path));
    const int theta = detail::draw_theta(eng, cfg);
    const auto& coef = s.coef[theta];
    detail::Normal normal;
    double* row = table.data() + static_cast<std::size_t>(path) * width;
    row[0] = theta;
    double z = s.z0;
    int reg = s.regions.locate_z(z);
    auto mark = [&](std::int64_t step) {
      for (std::size_t k = 0; k < m; ++k) {
        if (marks[k] == step) row[k + 1] = detail::logistic(z);
      }
    };
    mark(0);
    for (std::int64_t i = 0; i < last; ++i) {
      z += coef[reg].drift_dt + coef[reg].vol_sqdt * normal(eng);
      reg = s.regions.walk_z(reg, z);
      mark(i + 1);
    }
  });

  std::vector<CalibrationSlice> out;
  for (std::size_t k = 0; k < m; ++k) {
    CalibrationSlice slice;
    slice.t = static_cast<double>(marks[k]) * cfg.dt;
    std::vector<double> theta_sum(n_bins, 0.0), p_sum(n_bins, 0.0);
    std::vector<std::int64_t> count(n_bins, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const double p = table[i * width + k + 1];
      const int b = std::min(n_bins - 1, static_cast<int>(p * n_bins));
      ++count[b];
      theta_sum[b] += table[i * width];
      p_sum[b] += p;
    }
    for (int b = 0; b < n_bins; ++b) {
      CalibrationBin bin;
      bin.lo = static_cast<double>(b) / n_bins;
      bin.hi = static_cast<double>(b + 1) / n_bins;
      bin.count = count[b];
      if (count[b] > 0) {
        const double cnt = static_cast<double>(count[b]);
        bin.mean_theta = theta_sum[b] / cnt;
        bin.mean_belief = p_sum[b] / cnt;
        if (count[b] > 1) {
          const double var = bin.mean_theta * (1.0 - bin.mean_theta) * cnt / (cnt - 1.0);
          bin.se_theta = std::sqrt(var / cnt);
        }
      }
      slice.bins.push_back(bin);
    }
    out.push_back(std::move(slice));
  }
  return out;
}

}  // namespace ghostgame
