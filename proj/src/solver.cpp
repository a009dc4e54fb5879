#include "ghostgame/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ghostgame {

ResidualPair residuals(const ModelParams& params, const ThresholdPair& tp) {
  const ValueCurves curves(params, tp);
  const double slope = tp.b2 * (1.0 - tp.b2) * curves.v_prime(tp.b2, Side::kLeft);
  return {curves.u_prime(tp.b1, Side::kRight),
          slope - params.rate_gap() / params.lambda_lo};
}

IndifferenceResidual::IndifferenceResidual(const ModelParams& params, double b1) {
  const auto e = exponents(params);
  const double gap = params.rate_gap();
  const double r = params.r;
  const double l1 = log_odds_ratio(b1);
  a1_ = e.alpha1_hi;
  a2_ = e.alpha2_hi;
  target_ = gap / params.lambda_lo;
  num_const_ = gap * gap / r - gap / (e.alpha1_lo * params.lambda_lo);
  num_scale_ = (params.c - gap * gap) / r * std::exp(-a2_ * l1);
  y1_spread_ = std::exp((a1_ - a2_) * l1);
  k2_const_ = -num_scale_;
}

double IndifferenceResidual::operator()(double b2) const {
  const double l2 = log_odds_ratio(b2);
  const double e1 = std::exp(a1_ * l2);
  const double e2 = std::exp(a2_ * l2);
  const double k1 = (num_const_ + num_scale_ * e2) / (e1 - y1_spread_ * e2);
  const double k2 = k2_const_ - k1 * y1_spread_;
  return -(a1_ * k1 * e1 + a2_ * k2 * e2) - target_;
}

std::vector<double> solve_b2_given_b1(const ModelParams& params, double b1,
                                      const SolverOpts& opts) {
  const double eps = opts.bracket_eps;
  if (!(b1 > 0.0) || !(b1 < 1.0 - 2.0 * eps)) {
    std::ostringstream msg;
    msg << "solve_b2_given_b1: b1 must lie in (0, 1 - 2*bracket_eps), got " << b1;
    throw std::invalid_argument(msg.str());
  }
  if (opts.scan_n < 2) throw std::invalid_argument("solve_b2_given_b1: scan_n must be >= 2");

  const IndifferenceResidual g(params, b1);
  const double lo = b1 + eps;
  const double hi = 1.0 - eps;
  const double step = (hi - lo) / static_cast<double>(opts.scan_n - 1);

  std::vector<double> roots;
  double x_prev = lo;
  double g_prev = g(lo);
  if (g_prev == 0.0) roots.push_back(lo);
  for (int j = 1; j < opts.scan_n; ++j) {
    const double x = (j == opts.scan_n - 1) ? hi : lo + step * j;
    const double g_x = g(x);
    if (g_x == 0.0) {
      roots.push_back(x);
    } else if (g_prev != 0.0 && (g_prev < 0.0) != (g_x < 0.0)) {
      roots.push_back(bisect(g, x_prev, x, g_prev, opts.tol_b).root());
    }
    x_prev = x;
    g_prev = g_x;
  }
  return roots;
}

namespace {

ConditionCheck check_at_least(double value, double bound, double p) {
  return {value >= bound, value - bound, p};
}

// Running minimum of a margin over the grid.
struct WorstMargin {
  double margin = std::numeric_limits<double>::infinity();
  double p = 0.0;
  void update(double m, double at) {
    if (m < margin) {
      margin = m;
      p = at;
    }
  }
};

}  // namespace

ConditionReport certify(const ModelParams& params, const ThresholdPair& tp,
                        const SolverOpts& opts) {
  const ValueCurves curves(params, tp);
  const double b1 = tp.b1;
  const double b2 = tp.b2;
  const double gap = params.rate_gap();
  const double cap = params.c / params.r;
  constexpr double kExclusion = 1e-6;
  constexpr double kStopperSlack = 1e-9;

  ConditionReport report;
  report.grid_n = opts.grid_n;
  const int n = std::max(opts.grid_n, 2);

  WorstMargin u_slack, u_strict, v_cap, v_inc, slope_dec;
  bool have_prev_slope = false;
  double prev_slope = 0.0;
  for (int i = 0; i < n; ++i) {
    const double p = static_cast<double>(i) / static_cast<double>(n - 1);
    const double u = curves.u(p);
    u_slack.update(u + kStopperSlack, p);
    u_strict.update(u, p);

    if (p <= b1 || p >= 1.0) continue;
    v_cap.update(cap - curves.v(p), p);
    if (std::abs(p - b1) <= kExclusion || std::abs(p - b2) <= kExclusion) continue;
    const double vp = curves.v_prime(p, Side::kLeft);
    v_inc.update(vp, p);
    const double slope = p * (1.0 - p) * vp;
    if (have_prev_slope) slope_dec.update(prev_slope - slope, p);
    prev_slope = slope;
    have_prev_slope = true;
  }

  report.stopper_value_nonnegative = {u_slack.margin >= 0.0, u_slack.margin, u_slack.p};
  report.u_nonnegative = {u_strict.margin >= 0.0, u_strict.margin, u_strict.p};
  report.v_below_cap = {v_cap.margin > 0.0, v_cap.margin, v_cap.p};
  report.v_increasing = {v_inc.margin > 0.0, v_inc.margin, v_inc.p};
  report.slope_decreasing = {slope_dec.margin > 0.0, slope_dec.margin, slope_dec.p};

  const double smooth = curves.u_prime(b1, Side::kRight);
  report.smooth_fit = check_at_least(opts.tol_f - std::abs(smooth), 0.0, b1);

  const double vp_left = curves.v_prime(b2, Side::kLeft);
  const double vp_right = curves.v_prime(b2, Side::kRight);
  const double slope_left = b2 * (1.0 - b2) * vp_left;
  const double slope_right = b2 * (1.0 - b2) * vp_right;
  const double upper = gap / params.lambda_lo;
  const double lower = gap / params.lambda_hi;
  report.indifference = check_at_least(opts.tol_g - std::abs(slope_left - upper), 0.0, b2);

  const double window_margin =
      std::min({slope_left - lower, slope_right - lower, upper + opts.tol_g - slope_left,
                upper + opts.tol_g - slope_right});
  report.feasibility_window = check_at_least(window_margin, 0.0, b2);

  const double bound = params.c / params.lambda_hi;
  report.b1_below_bound = {b1 < bound, bound - b1, b1};

  const double kink_tol = 1e-6 * (1.0 + std::abs(vp_right));
  report.v_smooth_at_switch = check_at_least(kink_tol - std::abs(vp_left - vp_right), 0.0, b2);
  return report;
}

namespace {

double smooth_fit_residual(const ModelParams& params, double b1, double b2) {
  return ValueCurves(params, {b1, b2}).u_prime(b1, Side::kRight);
}

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double nearest(const std::vector<double>& xs, double ref) {
  double best = std::numeric_limits<double>::quiet_NaN();
  double best_dist = std::numeric_limits<double>::infinity();
  for (double x : xs) {
    const double d = std::abs(x - ref);
    if (d < best_dist) {
      best_dist = d;
      best = x;
    }
  }
  return best;
}

struct LostBranch {};

}  // namespace

EquilibriumCertificate solve_equilibrium(const ModelParams& params, const SolverOpts& opts) {
  EquilibriumCertificate cert;
  cert.validation = validate(params);
  cert.best_effort = !cert.validation.all_ok();

  const double eps = opts.bracket_eps;
  const double z_lo = std::log(eps / (1.0 - eps));
  const double z_hi = std::log((1.0 - 3.0 * eps) / (3.0 * eps));
  const int n_outer = std::max(opts.outer_n, 2);

  std::vector<ScanRow> table;
  table.reserve(n_outer);
  for (int i = 0; i < n_outer; ++i) {
    ScanRow row;
    row.b1 = logistic(z_lo + (z_hi - z_lo) * i / (n_outer - 1));
    row.b2_roots = solve_b2_given_b1(params, row.b1, opts);
    for (double b2 : row.b2_roots) row.f_values.push_back(smooth_fit_residual(params, row.b1, b2));
    table.push_back(std::move(row));
  }

  std::vector<ThresholdPair> found;
  for (int i = 0; i + 1 < n_outer; ++i) {
    const auto& left = table[i];
    const auto& right = table[i + 1];
    if (left.b2_roots.size() != right.b2_roots.size()) continue;
    for (std::size_t k = 0; k < left.b2_roots.size(); ++k) {
      const double f_left = left.f_values[k];
      const double f_right = right.f_values[k];
      if (f_left == 0.0) {
        found.push_back({left.b1, left.b2_roots[k]});
        continue;
      }
      if (f_right == 0.0 || (f_left < 0.0) == (f_right < 0.0)) continue;

      // Follow the k-th b2 branch by continuity while bisecting on b1.
      double ref = left.b2_roots[k];
      auto composite = [&](double b1) {
        const double b2 = nearest(solve_b2_given_b1(params, b1, opts), ref);
        if (std::isnan(b2)) throw LostBranch{};
        ref = b2;
        return smooth_fit_residual(params, b1, b2);
      };
      try {
        const auto br = bisect(composite, left.b1, right.b1, f_left, opts.tol_b);
        const double b1 = br.root();
        const double b2 = nearest(solve_b2_given_b1(params, b1, opts), ref);
        if (!std::isnan(b2)) found.push_back({b1, b2});
      } catch (const LostBranch&) {
      }
    }
  }

  if (found.empty()) {
    throw NoEquilibriumFound("no sign change of the smooth-fit residual along b2(b1)",
                             std::move(table));
  }

  std::sort(found.begin(), found.end(),
            [](const ThresholdPair& a, const ThresholdPair& b) { return a.b1 < b.b1; });
  for (const auto& tp : found) {
    if (!cert.candidates.empty()) {
      const auto& last = cert.candidates.back().tp;
      if (std::abs(last.b1 - tp.b1) <= 10.0 * opts.tol_b &&
          std::abs(last.b2 - tp.b2) <= 10.0 * opts.tol_b) {
        continue;
      }
    }
    cert.candidates.push_back({tp, residuals(params, tp), certify(params, tp, opts)});
  }

  const auto primary =
      std::find_if(cert.candidates.begin(), cert.candidates.end(),
                   [](const Candidate& c) { return c.conditions.equilibrium_ok(); });
  const auto& chosen = primary != cert.candidates.end() ? *primary : cert.candidates.front();
  cert.star = chosen.tp;
  cert.residual = chosen.residual;
  cert.conditions = chosen.conditions;
  cert.certified = primary != cert.candidates.end();
  return cert;
}

}  // namespace ghostgame
