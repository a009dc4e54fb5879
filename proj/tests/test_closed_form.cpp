#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "ghostgame/closed_form.hpp"
#include "support.hpp"

namespace ghostgame {
namespace {

using testing::kB1Star;
using testing::kB2Star;
using testing::reference_params;

double ratio_pow(double p, double a) { return std::pow((1.0 - p) / p, a); }

// d/dp [p^(1-a) (1-p)^a]
double d_weighted(double p, double a) {
  return (1.0 - a) * std::pow(p, -a) * std::pow(1.0 - p, a) -
         a * std::pow(p, 1.0 - a) * std::pow(1.0 - p, a - 1.0);
}

// Coefficients recovered from the boundary conditions by a dense solve.
Eigen::Vector3d controller_by_solve(const ModelParams& m, double b1, double b2) {
  const auto e = exponents(m);
  const double gap = m.rate_gap();
  Eigen::Matrix3d a;
  Eigen::Vector3d rhs;
  // v(b1+) = 0
  a << ratio_pow(b1, e.alpha1_hi), ratio_pow(b1, e.alpha2_hi), 0.0,
      // v continuous at b2
      ratio_pow(b2, e.alpha1_hi), ratio_pow(b2, e.alpha2_hi), -ratio_pow(b2, e.alpha1_lo),
      // b2(1-b2) v_p(b2+) = gap / lambda_lo
      0.0, 0.0, -e.alpha1_lo * ratio_pow(b2, e.alpha1_lo);
  rhs << -(m.c - gap * gap) / m.r, m.c / m.r - (m.c - gap * gap) / m.r, gap / m.lambda_lo;
  return a.colPivHouseholderQr().solve(rhs);
}

Eigen::Vector3d stopper_by_solve(const ModelParams& m, double b1, double b2) {
  const auto e = exponents(m);
  Eigen::Matrix3d a;
  Eigen::Vector3d rhs;
  // u(b1+) = 0, u continuous at b2, u_p continuous at b2
  a << b1 * ratio_pow(b1, e.alpha1_hi), b1 * ratio_pow(b1, e.alpha2_hi), 0.0,
      b2 * ratio_pow(b2, e.alpha1_hi), b2 * ratio_pow(b2, e.alpha2_hi),
      -b2 * ratio_pow(b2, e.alpha1_lo),
      d_weighted(b2, e.alpha1_hi), d_weighted(b2, e.alpha2_hi), -d_weighted(b2, e.alpha1_lo);
  rhs << -(b1 * m.lambda_hi - m.c) / m.r, b2 * (m.lambda_lo - m.lambda_hi) / m.r,
      (m.lambda_lo - m.lambda_hi) / m.r;
  return a.colPivHouseholderQr().solve(rhs);
}

void expect_rel(double got, double want, double tol) {
  EXPECT_NEAR(got, want, tol * std::max(1.0, std::abs(want)));
}

TEST(Coefficients, AgreeWithDenseBoundaryValueSolve) {
  const auto m = reference_params();
  for (const auto& [b1, b2] : {std::pair{kB1Star, kB2Star}, std::pair{0.2, 0.7},
                               std::pair{0.05, 0.3}, std::pair{0.4, 0.95}}) {
    const auto k = controller_coefficients(m, {b1, b2});
    const auto ks = controller_by_solve(m, b1, b2);
    expect_rel(k.k1, ks(0), 1e-10);
    expect_rel(k.k2, ks(1), 1e-10);
    expect_rel(k.k3, ks(2), 1e-10);
    EXPECT_EQ(k.k4, 0.0);

    const auto s = stopper_coefficients(m, {b1, b2});
    const auto ss = stopper_by_solve(m, b1, b2);
    expect_rel(s.c1, ss(0), 1e-10);
    expect_rel(s.c2, ss(1), 1e-10);
    expect_rel(s.c3, ss(2), 1e-10);
    EXPECT_EQ(s.c4, 0.0);
  }
}

TEST(Coefficients, MatchHighPrecisionReference) {
  const auto m = reference_params();
  const auto k = controller_coefficients(m, {0.2, 0.7});
  const auto s = stopper_coefficients(m, {0.2, 0.7});
  expect_rel(k.k1, -0.993915563613818832699621880834509, 1e-12);
  expect_rel(k.k2, 2.91638295077133977215530049118383, 1e-12);
  expect_rel(k.k3, -1.31613029177013807527033760401591, 1e-12);
  expect_rel(s.c1, 3.88056343314040375381087597290441, 1e-12);
  expect_rel(s.c2, -3.63149179532951582869155877082762, 1e-12);
  expect_rel(s.c3, 4.54992178740320853889815412594047, 1e-12);
}

TEST(Coefficients, SwitchCoefficientHasClosedForm) {
  const auto m = reference_params();
  const double b2 = 0.55;
  const auto e = exponents(m);
  const auto k = controller_coefficients(m, {0.1, b2});
  const double want = -(m.rate_gap() / (e.alpha1_lo * m.lambda_lo)) * ratio_pow(b2, -e.alpha1_lo);
  expect_rel(k.k3, want, 1e-13);
}

TEST(Coefficients, RejectInvalidThresholds) {
  const auto m = reference_params();
  EXPECT_THROW(controller_coefficients(m, {0.5, 0.5}), std::domain_error);
  EXPECT_THROW(controller_coefficients(m, {0.6, 0.5}), std::domain_error);
  EXPECT_THROW(stopper_coefficients(m, {0.0, 0.5}), std::domain_error);
  EXPECT_THROW(stopper_coefficients(m, {0.1, 1.0}), std::domain_error);
  EXPECT_THROW(ValueCurves(m, {-0.1, 0.5}), std::domain_error);
}

TEST(ValueCurves, BoundaryValues) {
  const auto m = reference_params();
  const ValueCurves vc(m, {kB1Star, kB2Star});
  EXPECT_EQ(vc.v(1.0), m.c / m.r);
  EXPECT_EQ(vc.u(1.0), (m.lambda_lo - m.c) / m.r);
  EXPECT_NEAR(vc.v(1.0 - 1e-9), m.c / m.r, 1e-6);
  EXPECT_NEAR(vc.u(1.0 - 1e-9), (m.lambda_lo - m.c) / m.r, 1e-6);
  for (double p : {0.0, 0.01, 0.1, kB1Star}) {
    EXPECT_EQ(vc.v(p), 0.0);
    EXPECT_EQ(vc.u(p), 0.0);
  }
  EXPECT_NEAR(vc.v(std::nextafter(kB1Star, 1.0)), 0.0, 1e-9);
  EXPECT_NEAR(vc.u(std::nextafter(kB1Star, 1.0)), 0.0, 1e-9);
}

TEST(ValueCurves, MatchHighPrecisionReferenceAtEquilibrium) {
  const ValueCurves vc(reference_params(), {kB1Star, kB2Star});
  EXPECT_NEAR(vc.u(0.3), 0.199195798217234663094739452436, 1e-10);
  EXPECT_NEAR(vc.v(0.3), 3.21545172335318814354577532352, 1e-10);
  EXPECT_NEAR(vc.u(0.5), 0.587843435271071332019177312079, 1e-10);
  EXPECT_NEAR(vc.v(0.5), 4.1882988085095856728446676984, 1e-10);
  EXPECT_NEAR(vc.u(0.8), 1.27117158758137713439960563312, 1e-10);
  EXPECT_NEAR(vc.v(0.8), 4.83142080404841894465443668472, 1e-10);
}

TEST(ValueCurves, ContinuityAtSwitchForAnyPair) {
  const auto m = reference_params();
  for (const auto& tp : {ThresholdPair{0.2, 0.7}, ThresholdPair{kB1Star, kB2Star},
                         ThresholdPair{0.05, 0.35}}) {
    const ValueCurves vc(m, tp);
    const double below = std::nextafter(tp.b2, 0.0);
    EXPECT_NEAR(vc.v(below), vc.v(tp.b2), 1e-10);
    EXPECT_NEAR(vc.u(below), vc.u(tp.b2), 1e-10);
    EXPECT_NEAR(vc.v(tp.b2), vc.v_at_switch(), 1e-12);
    // u is C^1 at b2 by construction, v is pinned from the right.
    EXPECT_NEAR(vc.u_prime(tp.b2, Side::kLeft), vc.u_prime(tp.b2, Side::kRight), 1e-9);
    EXPECT_NEAR(tp.b2 * (1.0 - tp.b2) * vc.v_prime(tp.b2, Side::kRight),
                m.rate_gap() / m.lambda_lo, 1e-12);
  }
}

TEST(ValueCurves, SwitchValueIsIndependentOfB1) {
  const auto m = reference_params();
  const auto e = exponents(m);
  const double want = m.c / m.r - m.rate_gap() / (e.alpha1_lo * m.lambda_lo);
  EXPECT_NEAR(want, 4.5132, 1e-4);
  for (double b1 : {0.05, 0.1, 0.2}) {
    EXPECT_NEAR(ValueCurves(m, {b1, 0.6}).v(0.6), want, 1e-12);
  }
}

TEST(ValueCurves, DerivativesMatchCentralDifferences) {
  const ValueCurves vc(reference_params(), {0.2, 0.7});
  const double h = 1e-6;
  for (double p : {0.25, 0.4, 0.6, 0.69, 0.71, 0.8, 0.95}) {
    const double dv = (vc.v(p + h) - vc.v(p - h)) / (2 * h);
    const double du = (vc.u(p + h) - vc.u(p - h)) / (2 * h);
    EXPECT_NEAR(vc.v_prime(p, Side::kLeft), dv, 1e-6 * (1 + std::abs(dv))) << p;
    EXPECT_NEAR(vc.u_prime(p, Side::kLeft), du, 1e-6 * (1 + std::abs(du))) << p;
  }
  EXPECT_EQ(vc.v_prime(0.1, Side::kRight), 0.0);
  EXPECT_EQ(vc.u_prime(0.2, Side::kLeft), 0.0);
  EXPECT_EQ(vc.v_prime(1.0, Side::kLeft), 0.0);
}

TEST(ValueCurves, ReducedSmoothFitFormAgreesWithGenericBranch) {
  const ValueCurves vc(reference_params(), {0.2, 0.7});
  const double at = vc.u_prime(0.2, Side::kRight);
  const double near = vc.u_prime(0.2 + 1e-9, Side::kLeft);
  EXPECT_NEAR(at, near, 1e-6 * (1 + std::abs(at)));
}

TEST(ValueCurves, OdeResidualsVanishOnBothBranches) {
  const ValueCurves vc(reference_params(), {kB1Star, kB2Star});
  const double h = 1e-5;
  for (int i = 1; i < 400; ++i) {
    const double p = kB1Star + (1.0 - kB1Star) * i / 400.0;
    if (std::abs(p - kB2Star) < 2 * h || p + h >= 1.0) continue;
    EXPECT_LE(std::abs(testing::controller_ode_residual(vc, p, h)), 1e-4) << p;
    EXPECT_LE(std::abs(testing::stopper_ode_residual(vc, p, h)), 1e-4) << p;
  }
}

TEST(ValueCurves, RejectsBeliefsOutsideUnitInterval) {
  const ValueCurves vc(reference_params(), {0.2, 0.7});
  EXPECT_THROW(vc.v(-0.1), std::domain_error);
  EXPECT_THROW(vc.u(1.1), std::domain_error);
  EXPECT_THROW(vc.v_prime(std::nan(""), Side::kLeft), std::domain_error);
  EXPECT_THROW(vc.u_prime(2.0, Side::kRight), std::domain_error);
}

TEST(LogOddsRatio, IsAccurateNearTheEnds) {
  EXPECT_NEAR(log_odds_ratio(0.5), 0.0, 1e-16);
  EXPECT_NEAR(log_odds_ratio(1e-12), std::log((1 - 1e-12) / 1e-12), 1e-12);
  EXPECT_NEAR(log_odds_ratio(1.0 - 1e-12), -log_odds_ratio(1e-12), 1e-3);
}

}  // namespace
}  // namespace ghostgame
