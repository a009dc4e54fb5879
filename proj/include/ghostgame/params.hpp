#pragma once

#include <string>
#include <vector>

namespace ghostgame {

/// Model primitives: effort rates, salary rate and discount rate.
struct ModelParams {
  double lambda_hi = 0.0;  // high effort rate
  double lambda_lo = 0.0;  // low effort rate
  double c = 0.0;          // salary / cost rate
  double r = 0.0;          // discount rate

  double rate_gap() const { return lambda_hi - lambda_lo; }
};

/// Roots of alpha^2 - alpha - 2r/level^2 = 0, i.e. the exponents of the
/// homogeneous solutions ((1-p)/p)^alpha.
struct ExponentPair {
  double alpha1 = 0.0;  // > 1
  double alpha2 = 0.0;  // < 0
};

struct Exponents {
  double alpha1_hi = 0.0;
  double alpha2_hi = 0.0;
  double alpha1_lo = 0.0;
  double alpha2_lo = 0.0;
};

/// Throws std::domain_error unless level > 0 and r > 0.
ExponentPair alpha(double level, double r);

/// Exponents at both effort levels.
Exponents exponents(const ModelParams& params);

/// One elementary inequality `lhs < rhs` (or `<=`) with its signed slack.
struct InequalityCheck {
  std::string name;
  std::string expression;
  double lhs = 0.0;
  double rhs = 0.0;
  bool strict = true;
  double margin = 0.0;  // rhs - lhs
  bool ok = false;
};

struct ValidationReport {
  bool model_ok = false;
  bool cond_A_ok = false;
  bool cond_B_ok = false;
  std::vector<InequalityCheck> checks;

  bool all_ok() const { return model_ok && cond_A_ok && cond_B_ok; }
};

/// Checks the model ordering and both sufficient conditions for existence of
/// a threshold equilibrium. Never throws; failures are reported.
ValidationReport validate(const ModelParams& params);

}  // namespace ghostgame
