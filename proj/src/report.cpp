#include "ghostgame/report.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace ghostgame {

using nlohmann::json;

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

json to_json(const ValidationReport& report) {
  json checks = json::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"name", c.name},
                      {"expression", c.expression},
                      {"lhs", c.lhs},
                      {"rhs", c.rhs},
                      {"relation", c.strict ? "<" : "<="},
                      {"margin", c.margin},
                      {"ok", c.ok}});
  }
  return {{"model_ok", report.model_ok},
          {"cond_A_ok", report.cond_A_ok},
          {"cond_B_ok", report.cond_B_ok},
          {"all_ok", report.all_ok()},
          {"checks", checks}};
}

json to_json(const ConditionCheck& check) {
  return {{"ok", check.ok}, {"worst_margin", check.worst_margin}, {"worst_p", check.worst_p}};
}

json to_json(const ConditionReport& r) {
  return {{"grid_n", r.grid_n},
          {"equilibrium_ok", r.equilibrium_ok()},
          {"I_stopper_value_nonnegative", to_json(r.stopper_value_nonnegative)},
          {"II_smooth_fit", to_json(r.smooth_fit)},
          {"III_slope_decreasing", to_json(r.slope_decreasing)},
          {"IV_indifference", to_json(r.indifference)},
          {"feasibility_window", to_json(r.feasibility_window)},
          {"v_below_cap", to_json(r.v_below_cap)},
          {"v_increasing", to_json(r.v_increasing)},
          {"u_nonnegative", to_json(r.u_nonnegative)},
          {"b1_below_bound", to_json(r.b1_below_bound)},
          {"v_smooth_at_switch", to_json(r.v_smooth_at_switch)}};
}

json to_json(const EquilibriumCertificate& cert) {
  json candidates = json::array();
  for (const auto& c : cert.candidates) {
    candidates.push_back({{"b1", c.tp.b1},
                          {"b2", c.tp.b2},
                          {"f", c.residual.f_val},
                          {"g", c.residual.g_val},
                          {"conditions", to_json(c.conditions)}});
  }
  return {{"b1_star", cert.star.b1},
          {"b2_star", cert.star.b2},
          {"certified", cert.certified},
          {"best_effort", cert.best_effort},
          {"residuals", {{"f", cert.residual.f_val}, {"g", cert.residual.g_val}}},
          {"conditions", to_json(cert.conditions)},
          {"validation", to_json(cert.validation)},
          {"candidates", candidates}};
}

json to_json(const McEstimate& e) {
  return {{"mean", e.mean},
          {"std_error", e.std_error},
          {"n", e.n},
          {"dt", e.dt},
          {"horizon", e.horizon},
          {"truncation_bound", e.truncation_bound},
          {"absorption_bound", e.absorption_bound},
          {"clamp_events", e.clamp_events}};
}

json to_json(const WeakEstimate& e) {
  return {{"estimate", to_json(e.estimate)},
          {"effective_sample_size", e.effective_sample_size},
          {"low_ess", e.low_ess},
          {"stopped_weight", to_json(e.stopped_weight)}};
}

json to_json(const PlayerGap& g) {
  json devs = json::array();
  for (const auto& d : g.deviations) {
    devs.push_back({{"label", d.label},
                    {"reward", to_json(d.reward)},
                    {"improvement", d.improvement},
                    {"combined_se", d.combined_se},
                    {"paired_se", d.paired_se}});
  }
  return {{"equilibrium", to_json(g.equilibrium)},
          {"gap", g.gap},
          {"gap_combined_se", g.gap_combined_se},
          {"argmax", g.argmax},
          {"deviations", devs}};
}

json to_json(const NashGapReport& r) {
  return {{"p0", r.p0}, {"stopper", to_json(r.stopper)}, {"controller", to_json(r.controller)}};
}

json to_json(const std::vector<ScanRow>& table) {
  json rows = json::array();
  for (const auto& row : table) {
    rows.push_back({{"b1", row.b1}, {"b2_roots", row.b2_roots}, {"f_values", row.f_values}});
  }
  return rows;
}

void write_curve_csv(std::ostream& out, const ValueCurves& curves, int n_points) {
  if (n_points < 2) throw std::invalid_argument("curve needs at least 2 points");
  const auto& tp = curves.thresholds();
  const auto& params = curves.params();
  out << "p,u,v,u_p,v_p,lambda_star\n";
  for (int i = 0; i < n_points; ++i) {
    const double p = i == n_points - 1 ? 1.0 : static_cast<double>(i) / (n_points - 1);
    out << format_double(p) << ',' << format_double(curves.u(p)) << ','
        << format_double(curves.v(p)) << ',';
    if (p == tp.b1 || p == tp.b2) {
      out << ",,";
    } else {
      out << format_double(curves.u_prime(p, Side::kLeft)) << ','
          << format_double(curves.v_prime(p, Side::kLeft)) << ',';
    }
    out << format_double(p < tp.b2 ? params.lambda_hi : params.lambda_lo) << '\n';
  }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "value,b1_star,b2_star,certified,error\n";
  for (const auto& row : rows) {
    std::string err = row.error;
    for (char& ch : err) {
      if (ch == ',' || ch == '\n' || ch == '"') ch = ';';
    }
    out << format_double(row.value) << ',';
    if (row.error.empty()) {
      out << format_double(row.b1) << ',' << format_double(row.b2) << ','
          << (row.certified ? "true" : "false");
    } else {
      out << ",,false";
    }
    out << ',' << err << '\n';
  }
}

}  // namespace ghostgame
