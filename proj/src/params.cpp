#include "ghostgame/params.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ghostgame {

ExponentPair alpha(double level, double r) {
  if (!(level > 0.0) || !(r > 0.0)) {
    throw std::domain_error("alpha: level and r must be positive");
  }
  const double root = std::sqrt(8.0 * r / (level * level) + 1.0);
  return {0.5 + 0.5 * root, 0.5 - 0.5 * root};
}

Exponents exponents(const ModelParams& params) {
  const auto hi = alpha(params.lambda_hi, params.r);
  const auto lo = alpha(params.lambda_lo, params.r);
  return {hi.alpha1, hi.alpha2, lo.alpha1, lo.alpha2};
}

namespace {

InequalityCheck make_check(std::string name, std::string expression, double lhs,
                           double rhs, bool strict) {
  InequalityCheck check;
  check.name = std::move(name);
  check.expression = std::move(expression);
  check.lhs = lhs;
  check.rhs = rhs;
  check.strict = strict;
  check.margin = rhs - lhs;
  check.ok = strict ? (lhs < rhs) : (lhs <= rhs);
  return check;
}

}  // namespace

ValidationReport validate(const ModelParams& params) {
  ValidationReport report;
  const double lh = params.lambda_hi;
  const double ll = params.lambda_lo;
  const double c = params.c;
  const double r = params.r;

  auto& checks = report.checks;
  checks.push_back(make_check("model.lambda_order", "lambda_lo < lambda_hi", ll, lh, true));
  checks.push_back(make_check("model.lambda_lo_above_c", "c < lambda_lo", c, ll, true));
  checks.push_back(make_check("model.c_positive", "0 < c", 0.0, c, true));
  checks.push_back(make_check("model.r_positive", "0 < r", 0.0, r, true));
  report.model_ok = true;
  for (const auto& check : checks) report.model_ok = report.model_ok && check.ok;

  // The exponents need positive rates; without them the existence conditions
  // are reported as failed with NaN slack.
  const double nan = std::numeric_limits<double>::quiet_NaN();
  double a1_lo = nan;
  double a2_hi = nan;
  if (lh > 0.0 && ll > 0.0 && r > 0.0) {
    a1_lo = alpha(ll, r).alpha1;
    a2_hi = alpha(lh, r).alpha2;
  }

  const double gap = lh - ll;
  const double left_a = -a2_hi * (gap * gap / r - gap / (a1_lo * ll));
  const double middle_a = gap / ll;
  const double right_a = c / r;
  const auto a_left = make_check("cond_A.left",
                                 "-alpha2(lambda_hi)*((lambda_hi-lambda_lo)^2/r - "
                                 "(lambda_hi-lambda_lo)/(alpha1(lambda_lo)*lambda_lo)) < "
                                 "(lambda_hi-lambda_lo)/lambda_lo",
                                 left_a, middle_a, true);
  const auto a_right = make_check("cond_A.right", "(lambda_hi-lambda_lo)/lambda_lo < c/r",
                                  middle_a, right_a, true);
  report.cond_A_ok = a_left.ok && a_right.ok;
  checks.push_back(a_left);
  checks.push_back(a_right);

  const auto b_left = make_check("cond_B.left", "(lambda_hi-lambda_lo)^2 <= c", gap * gap, c,
                                 false);
  const auto b_right =
      make_check("cond_B.right",
                 "c <= (1-alpha1(lambda_lo))*lambda_hi + alpha1(lambda_lo)*lambda_lo", c,
                 (1.0 - a1_lo) * lh + a1_lo * ll, false);
  report.cond_B_ok = b_left.ok && b_right.ok;
  checks.push_back(b_left);
  checks.push_back(b_right);
  return report;
}

}  // namespace ghostgame
