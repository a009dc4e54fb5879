#pragma once

#include <cmath>

#include "ghostgame/closed_form.hpp"
#include "ghostgame/params.hpp"

namespace ghostgame::testing {

/// The reference parameter set used across the suites.
inline ModelParams reference_params() { return {2.2, 1.4, 1.0, 0.2}; }

/// Reference thresholds and values from a 30-digit evaluation of the closed forms.
inline constexpr double kB1Star = 0.124798750831718125642552922239;
inline constexpr double kB2Star = 0.618435396776197660531231637812;

/// Left-hand side of the controller ODE on the branch containing p, with the
/// derivatives taken by central differences of step h.
inline double controller_ode_residual(const ValueCurves& curves, double p, double h) {
  const auto& prm = curves.params();
  const double lam = p < curves.thresholds().b2 ? prm.lambda_hi : prm.lambda_lo;
  const double v0 = curves.v(p);
  const double vp = (curves.v(p + h) - curves.v(p - h)) / (2.0 * h);
  const double vpp = (curves.v(p + h) - 2.0 * v0 + curves.v(p - h)) / (h * h);
  const double shirk = lam - prm.lambda_lo;
  const double q = p * (1.0 - p);
  return 0.5 * lam * lam * q * q * vpp + lam * lam * (1.0 - p) * q * vp - prm.r * v0 + prm.c -
         shirk * shirk;
}

/// Left-hand side of the stopper ODE on the branch containing p.
inline double stopper_ode_residual(const ValueCurves& curves, double p, double h) {
  const auto& prm = curves.params();
  const double lam = p < curves.thresholds().b2 ? prm.lambda_hi : prm.lambda_lo;
  const double u0 = curves.u(p);
  const double upp = (curves.u(p + h) - 2.0 * u0 + curves.u(p - h)) / (h * h);
  const double q = p * (1.0 - p);
  return 0.5 * lam * lam * q * q * upp - prm.r * u0 + p * lam - prm.c;
}

}  // namespace ghostgame::testing
