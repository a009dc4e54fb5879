#pragma once

#include "ghostgame/params.hpp"

namespace ghostgame {

/// Candidate free boundaries: stop when the belief falls to b1, switch from
/// high to low effort at b2. Valid pairs satisfy 0 < b1 < b2 < 1.
struct ThresholdPair {
  double b1 = 0.0;
  double b2 = 0.0;
};

/// Throws std::domain_error unless 0 < b1 < b2 < 1.
void check_thresholds(const ThresholdPair& tp);

/// Coefficients of the controller value
///   v = k1 y^a1(hi) + k2 y^a2(hi) + (c - gap^2)/r   on (b1, b2)
///   v = k3 y^a1(lo) + k4 y^a2(lo) + c/r             on [b2, 1]
/// with y = (1-p)/p. k4 = 0 always.
struct ControllerCoefficients {
  double k1 = 0.0;
  double k2 = 0.0;
  double k3 = 0.0;
  double k4 = 0.0;
};

/// Coefficients of the stopper value
///   u = p (c1 y^a1(hi) + c2 y^a2(hi)) + (p lambda_hi - c)/r   on (b1, b2)
///   u = p (c3 y^a1(lo) + c4 y^a2(lo)) + (p lambda_lo - c)/r   on [b2, 1]
/// c4 = 0 always.
struct StopperCoefficients {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  double c4 = 0.0;
};

/// v(b1) = 0, v(1) = c/r, v continuous at b2 and the right derivative at b2
/// pinned to the indifference slope gap/(b2(1-b2) lambda_lo). Smoothness at
/// b2 from the left is NOT imposed; it only holds at the equilibrium b2.
ControllerCoefficients controller_coefficients(const ModelParams& params,
                                               const ThresholdPair& tp);

/// u(b1) = 0, u(1) = (lambda_lo - c)/r and u is C^1 at b2.
StopperCoefficients stopper_coefficients(const ModelParams& params, const ThresholdPair& tp);

/// log((1-p)/p), finite on (0,1).
double log_odds_ratio(double p);

enum class Side { kLeft, kRight };

/// Piecewise closed-form value functions bound to one (params, thresholds)
/// pair. Immutable; evaluation is O(1) and thread-safe.
class ValueCurves {
 public:
  ValueCurves(const ModelParams& params, const ThresholdPair& tp);

  const ModelParams& params() const { return params_; }
  const ThresholdPair& thresholds() const { return tp_; }
  const Exponents& exps() const { return exps_; }
  const ControllerCoefficients& controller() const { return kc_; }
  const StopperCoefficients& stopper() const { return sc_; }

  /// Controller value. Zero on [0, b1]. Throws std::domain_error off [0,1].
  double v(double p) const;
  /// One-sided derivative of v; `side` only matters at p = b1 or p = b2.
  double v_prime(double p, Side side) const;

  /// Stopper value. Zero on [0, b1]. Throws std::domain_error off [0,1].
  double u(double p) const;
  /// One-sided derivative of u. At p = b1 from the right this uses the
  /// reduced form c/(b1 r) - (a1 c1 y^a1 + a2 c2 y^a2)/(1 - b1).
  double u_prime(double p, Side side) const;

  /// v(b2+) = c/r - gap/(alpha1(lo) lambda_lo), independent of b1.
  double v_at_switch() const;

 private:
  enum class Branch { kZero, kMiddle, kUpper };
  Branch branch(double p, Side side) const;

  double v_middle(double log_y) const;
  double v_upper(double log_y) const;

  ModelParams params_;
  ThresholdPair tp_;
  Exponents exps_;
  ControllerCoefficients kc_;
  StopperCoefficients sc_;
};

}  // namespace ghostgame
