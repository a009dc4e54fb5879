#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "ghostgame/closed_form.hpp"
#include "ghostgame/params.hpp"

namespace ghostgame {

struct SolverOpts {
  double tol_b = 1e-10;        // terminal bisection bracket width
  double tol_f = 1e-8;         // smooth-fit residual tolerance
  double tol_g = 1e-8;         // indifference residual tolerance
  int scan_n = 10000;          // b2 scan points per b1
  int grid_n = 2001;           // certification grid on [0,1]
  double bracket_eps = 1e-6;   // guard at 0, 1 and b1 == b2
  int outer_n = 200;           // b1 scan points (uniform in log-odds)
};

/// f: u_p(b1+) (smooth fit), g: b2(1-b2) v_p(b2-) - gap/lambda_lo (indifference).
struct ResidualPair {
  double f_val = 0.0;
  double g_val = 0.0;
};

ResidualPair residuals(const ModelParams& params, const ThresholdPair& tp);

/// g(b1, .) with the b1-dependent powers hoisted; used by the b2 scan.
class IndifferenceResidual {
 public:
  IndifferenceResidual(const ModelParams& params, double b1);
  double operator()(double b2) const;

 private:
  double a1_, a2_;
  double target_;
  double num_const_, num_scale_;
  double y1_spread_;
  double k2_const_;
};

struct BisectionResult {
  double lo = 0.0;
  double hi = 0.0;
  int iterations = 0;
  double root() const { return lo + 0.5 * (hi - lo); }
};

/// Halves [lo, hi] until hi - lo <= tol. f(lo) and f(hi) must differ in sign;
/// `f_lo` is f(lo).
template <typename F>
BisectionResult bisect(F&& f, double lo, double hi, double f_lo, double tol) {
  BisectionResult out{lo, hi, 0};
  const bool lo_negative = f_lo < 0.0;
  while (out.hi - out.lo > tol) {
    const double mid = out.lo + 0.5 * (out.hi - out.lo);
    if (mid <= out.lo || mid >= out.hi) break;  // one ulp left
    const double f_mid = f(mid);
    if (f_mid == 0.0) return {mid, mid, out.iterations + 1};
    if ((f_mid < 0.0) == lo_negative) {
      out.lo = mid;
    } else {
      out.hi = mid;
    }
    ++out.iterations;
  }
  return out;
}

/// All roots of g(b1, .) on (b1 + eps, 1 - eps), ascending. Empty if the scan
/// sees no sign change. Throws std::invalid_argument if b1 >= 1 - 2 eps.
std::vector<double> solve_b2_given_b1(const ModelParams& params, double b1,
                                      const SolverOpts& opts = {});

struct ConditionCheck {
  bool ok = false;
  double worst_margin = 0.0;  // >= 0 when satisfied (> 0 for strict checks)
  double worst_p = 0.0;       // grid point attaining the worst margin
};

/// Equilibrium conditions on a uniform grid plus the structural properties
/// that hold at a genuine equilibrium.
struct ConditionReport {
  ConditionCheck stopper_value_nonnegative;  // (I) u >= -1e-9 on [0,1]
  ConditionCheck smooth_fit;                 // (II) |u_p(b1+)| <= tol_f
  ConditionCheck slope_decreasing;           // (III) p(1-p)v_p strictly decreasing on (b1,1)
  ConditionCheck indifference;               // (IV) |b2(1-b2)v_p(b2-) - gap/lambda_lo| <= tol_g
  ConditionCheck feasibility_window;         // gap/lambda_hi <= b2(1-b2)v_p(b2+-) <= gap/lambda_lo
  ConditionCheck v_below_cap;                // v < c/r on (b1,1)
  ConditionCheck v_increasing;               // v_p > 0 on (b1,1)
  ConditionCheck u_nonnegative;              // u >= 0 on [0,1], no slack
  ConditionCheck b1_below_bound;             // b1 < c/lambda_hi
  ConditionCheck v_smooth_at_switch;         // |v_p(b2-) - v_p(b2+)| <= 1e-6 (1 + |v_p(b2+)|)
  int grid_n = 0;

  bool equilibrium_ok() const {
    return stopper_value_nonnegative.ok && smooth_fit.ok && slope_decreasing.ok &&
           indifference.ok;
  }
};

ConditionReport certify(const ModelParams& params, const ThresholdPair& tp,
                        const SolverOpts& opts = {});

struct Candidate {
  ThresholdPair tp;
  ResidualPair residual;
  ConditionReport conditions;
};

struct EquilibriumCertificate {
  ThresholdPair star;
  ResidualPair residual;
  ConditionReport conditions;
  bool certified = false;
  bool best_effort = false;  // parameter conditions failed; search ran anyway
  ValidationReport validation;
  std::vector<Candidate> candidates;
};

/// One row of the b1 scan: the b2 roots found and f at each.
struct ScanRow {
  double b1 = 0.0;
  std::vector<double> b2_roots;
  std::vector<double> f_values;
};

class NoEquilibriumFound : public std::runtime_error {
 public:
  NoEquilibriumFound(const std::string& what, std::vector<ScanRow> table)
      : std::runtime_error(what), table_(std::move(table)) {}
  const std::vector<ScanRow>& table() const { return table_; }

 private:
  std::vector<ScanRow> table_;
};

/// Nested root finding: scan b1 in log-odds, solve g(b1, .) = 0 for b2 at each
/// point, bisect b1 on every sign change of f(b1, b2(b1)), then certify all
/// candidates. The primary pair is the first candidate passing (I)-(IV).
EquilibriumCertificate solve_equilibrium(const ModelParams& params, const SolverOpts& opts = {});

}  // namespace ghostgame
