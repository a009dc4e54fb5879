#include "ghostgame/closed_form.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ghostgame {

void check_thresholds(const ThresholdPair& tp) {
  if (!(tp.b1 > 0.0 && tp.b1 < tp.b2 && tp.b2 < 1.0)) {
    std::ostringstream msg;
    msg << "thresholds must satisfy 0 < b1 < b2 < 1 (got b1=" << tp.b1 << ", b2=" << tp.b2
        << ")";
    throw std::domain_error(msg.str());
  }
}

double log_odds_ratio(double p) { return std::log1p(-p) - std::log(p); }

namespace {

// ((1-p)/p)^a computed from log((1-p)/p).
inline double pow_ratio(double log_y, double a) { return std::exp(a * log_y); }

void check_unit(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    std::ostringstream msg;
    msg << "belief must lie in [0,1] (got " << p << ")";
    throw std::domain_error(msg.str());
  }
}

}  // namespace

ControllerCoefficients controller_coefficients(const ModelParams& params,
                                               const ThresholdPair& tp) {
  check_thresholds(tp);
  const auto e = exponents(params);
  const double gap = params.rate_gap();
  const double r = params.r;
  const double c = params.c;
  const double l1 = log_odds_ratio(tp.b1);
  const double l2 = log_odds_ratio(tp.b2);
  const double spread = e.alpha1_hi - e.alpha2_hi;
  const double jump = gap / (e.alpha1_lo * params.lambda_lo);

  ControllerCoefficients k;
  k.k4 = 0.0;
  k.k3 = -jump * pow_ratio(l2, -e.alpha1_lo);

  const double num = gap * gap / r - jump +
                     (c - gap * gap) / r * std::exp(e.alpha2_hi * (l2 - l1));
  const double den = pow_ratio(l2, e.alpha1_hi) - std::exp(spread * l1 + e.alpha2_hi * l2);
  if (den == 0.0 || !std::isfinite(den)) {
    throw std::domain_error("controller_coefficients: degenerate k1 denominator (b1 == b2?)");
  }
  k.k1 = num / den;
  k.k2 = (gap * gap - c) / r * pow_ratio(l1, -e.alpha2_hi) - k.k1 * pow_ratio(l1, spread);
  return k;
}

StopperCoefficients stopper_coefficients(const ModelParams& params, const ThresholdPair& tp) {
  check_thresholds(tp);
  const auto e = exponents(params);
  const double gap = params.rate_gap();
  const double r = params.r;
  const double c = params.c;
  const double b1 = tp.b1;
  const double l1 = log_odds_ratio(b1);
  const double l2 = log_odds_ratio(tp.b2);
  const double spread = e.alpha1_hi - e.alpha2_hi;
  const double stop_level = (b1 * params.lambda_hi - c) / (b1 * r);

  const double num = e.alpha1_lo * gap / r * pow_ratio(l2, -e.alpha2_hi) +
                     (e.alpha2_hi - e.alpha1_lo) * stop_level * pow_ratio(l1, -e.alpha2_hi);
  const double den_upper = (e.alpha1_hi - e.alpha1_lo) * pow_ratio(l2, spread);
  const double den_lower = (e.alpha2_hi - e.alpha1_lo) * pow_ratio(l1, spread);
  const double den = den_upper - den_lower;
  if (den == 0.0 || !std::isfinite(den)) {
    std::ostringstream msg;
    msg << "stopper_coefficients: c1 denominator vanishes: (alpha1(hi)-alpha1(lo))*y2^s = "
        << den_upper << ", (alpha2(hi)-alpha1(lo))*y1^s = " << den_lower;
    throw std::domain_error(msg.str());
  }

  StopperCoefficients s;
  s.c4 = 0.0;
  s.c1 = num / den;
  s.c2 = -stop_level * pow_ratio(l1, -e.alpha2_hi) - s.c1 * pow_ratio(l1, spread);
  s.c3 = (s.c1 * pow_ratio(l2, e.alpha1_hi) + s.c2 * pow_ratio(l2, e.alpha2_hi) + gap / r) *
         pow_ratio(l2, -e.alpha1_lo);
  return s;
}

ValueCurves::ValueCurves(const ModelParams& params, const ThresholdPair& tp)
    : params_(params),
      tp_(tp),
      exps_(exponents(params)),
      kc_(controller_coefficients(params, tp)),
      sc_(stopper_coefficients(params, tp)) {}

ValueCurves::Branch ValueCurves::branch(double p, Side side) const {
  if (p < tp_.b1) return Branch::kZero;
  if (p == tp_.b1) return side == Side::kLeft ? Branch::kZero : Branch::kMiddle;
  if (p < tp_.b2) return Branch::kMiddle;
  if (p == tp_.b2) return side == Side::kLeft ? Branch::kMiddle : Branch::kUpper;
  return Branch::kUpper;
}

double ValueCurves::v_middle(double log_y) const {
  const double gap = params_.rate_gap();
  return kc_.k1 * pow_ratio(log_y, exps_.alpha1_hi) + kc_.k2 * pow_ratio(log_y, exps_.alpha2_hi) +
         (params_.c - gap * gap) / params_.r;
}

double ValueCurves::v_upper(double log_y) const {
  return kc_.k3 * pow_ratio(log_y, exps_.alpha1_lo) + params_.c / params_.r;
}

double ValueCurves::v(double p) const {
  check_unit(p);
  if (p <= tp_.b1) return 0.0;
  if (p == 1.0) return params_.c / params_.r;
  const double log_y = log_odds_ratio(p);
  return p < tp_.b2 ? v_middle(log_y) : v_upper(log_y);
}

double ValueCurves::v_prime(double p, Side side) const {
  check_unit(p);
  switch (branch(p, side)) {
    case Branch::kZero:
      return 0.0;
    case Branch::kMiddle: {
      const double log_y = log_odds_ratio(p);
      const double scaled = -(exps_.alpha1_hi * kc_.k1 * pow_ratio(log_y, exps_.alpha1_hi) +
                              exps_.alpha2_hi * kc_.k2 * pow_ratio(log_y, exps_.alpha2_hi));
      return scaled / (p * (1.0 - p));
    }
    case Branch::kUpper: {
      if (p == 1.0) return 0.0;
      const double log_y = log_odds_ratio(p);
      const double scaled = -exps_.alpha1_lo * kc_.k3 * pow_ratio(log_y, exps_.alpha1_lo);
      return scaled / (p * (1.0 - p));
    }
  }
  return 0.0;
}

double ValueCurves::u(double p) const {
  check_unit(p);
  if (p <= tp_.b1) return 0.0;
  const double c = params_.c;
  const double r = params_.r;
  if (p == 1.0) return (params_.lambda_lo - c) / r;
  const double log_y = log_odds_ratio(p);
  if (p < tp_.b2) {
    return p * (sc_.c1 * pow_ratio(log_y, exps_.alpha1_hi) +
                sc_.c2 * pow_ratio(log_y, exps_.alpha2_hi)) +
           (p * params_.lambda_hi - c) / r;
  }
  return p * sc_.c3 * pow_ratio(log_y, exps_.alpha1_lo) + (p * params_.lambda_lo - c) / r;
}

double ValueCurves::u_prime(double p, Side side) const {
  check_unit(p);
  const double r = params_.r;
  switch (branch(p, side)) {
    case Branch::kZero:
      return 0.0;
    case Branch::kMiddle: {
      const double log_y = log_odds_ratio(p);
      const double a1 = exps_.alpha1_hi;
      const double a2 = exps_.alpha2_hi;
      if (p == tp_.b1) {
        return params_.c / (p * r) - (a1 * sc_.c1 * pow_ratio(log_y, a1) +
                                      a2 * sc_.c2 * pow_ratio(log_y, a2)) /
                                         (1.0 - p);
      }
      // d/dp [p y^a] = y^a (1 - p - a) / (1 - p)
      return (sc_.c1 * pow_ratio(log_y, a1) * (1.0 - p - a1) +
              sc_.c2 * pow_ratio(log_y, a2) * (1.0 - p - a2)) /
                 (1.0 - p) +
             params_.lambda_hi / r;
    }
    case Branch::kUpper: {
      if (p == 1.0) return params_.lambda_lo / r;
      const double log_y = log_odds_ratio(p);
      const double a = exps_.alpha1_lo;
      return sc_.c3 * pow_ratio(log_y, a) * (1.0 - p - a) / (1.0 - p) + params_.lambda_lo / r;
    }
  }
  return 0.0;
}

double ValueCurves::v_at_switch() const {
  return params_.c / params_.r - params_.rate_gap() / (exps_.alpha1_lo * params_.lambda_lo);
}

}  // namespace ghostgame
