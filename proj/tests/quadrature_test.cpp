#include "kpp/quadrature.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "kpp/util.hpp"

namespace {

TEST(AdaptiveGk, SmoothAndPeaked) {
  const auto r1 = kpp::adaptive_gk([](double x) { return std::sin(x); }, 0.0,
                                   kpp::kPi);
  EXPECT_NEAR(r1.value, 2.0, 1e-12);
  EXPECT_LT(r1.abs_error, 1e-10);
  // Narrow Gaussian needs subdivision; integral over [-1,1] is nearly erf-full.
  const double s = 1e-3;
  const auto r2 = kpp::adaptive_gk(
      [&](double x) { return std::exp(-x * x / (2 * s * s)); }, -1.0, 1.0);
  EXPECT_NEAR(r2.value, s * std::sqrt(2.0 * kpp::kPi), 1e-12);
  EXPECT_GT(r2.evaluations, 100);
}

TEST(AdaptiveGk, IntegrableEndpointSingularity) {
  // int_0^1 x^{-1/2} dx = 2.
  const auto r =
      kpp::adaptive_gk([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0,
                       1e-10, 1e-10);
  EXPECT_NEAR(r.value, 2.0, 1e-7);
}

TEST(SemiInfinite, ExponentialAndPowerTails) {
  const auto r1 = kpp::integrate_semi_infinite(
      [](double t) { return std::exp(-t); }, 0.0, 1e-14, 1e-12);
  EXPECT_NEAR(r1.value, 1.0, 1e-11);
  // int_1^inf t^{-2} dt = 1; power tail exercises many doubling blocks.
  const auto r2 = kpp::integrate_semi_infinite(
      [](double t) { return 1.0 / (t * t); }, 1.0, 1e-12, 1e-10);
  EXPECT_NEAR(r2.value, 1.0, 1e-8);
  // Integrand shape used by the tail completion of the time integrals.
  const auto r3 = kpp::integrate_semi_infinite(
      [](double t) { return std::exp(-0.01 * t) * std::pow(t, -1.5); }, 50.0,
      1e-16, 1e-10);
  EXPECT_GT(r3.value, 0.0);
  EXPECT_LT(r3.value, 2.0 / std::sqrt(50.0));
}

TEST(SemiInfinite, ThrowsWithoutDecay) {
  EXPECT_THROW(kpp::integrate_semi_infinite([](double) { return 1.0; }, 0.0,
                                            1e-12, 1e-12, 1.0, 20),
               std::runtime_error);
}

TEST(CompositeSimpson, ExactOnCubicsAndOddPatch) {
  auto fill = [](std::size_t n, double dx, auto f) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = f(dx * double(i));
    return v;
  };
  auto cubic = [](double x) { return x * x * x - x + 2.0; };
  // Even interval count: plain Simpson, exact for cubics.
  const double dx = 0.25;
  const auto v9 = fill(9, dx, cubic);
  EXPECT_NEAR(kpp::composite_simpson(v9, dx), 4.0 + 2.0 * 2.0 - 2.0, 1e-13);
  // Odd interval count takes the 3/8 patch; still exact for cubics.
  const auto v8 = fill(8, dx, cubic);
  const double a = 0.0, b = dx * 7.0;
  const double exact = (std::pow(b, 4) - std::pow(a, 4)) / 4.0 -
                       (b * b - a * a) / 2.0 + 2.0 * (b - a);
  EXPECT_NEAR(kpp::composite_simpson(v8, dx), exact, 1e-13);
  // Two nodes degrade to the trapezoid rule.
  const std::vector<double> v2 = {1.0, 3.0};
  EXPECT_NEAR(kpp::composite_simpson(v2, 0.5), 1.0, 1e-15);
}

TEST(RefinedSimpson, ConvergesToTolerance) {
  const double v = kpp::refined_simpson(
      [](double x) { return std::exp(x) * std::cos(3.0 * x); }, 0.0, 2.0,
      1e-12);
  const double exact =
      (std::exp(2.0) * (std::cos(6.0) + 3.0 * std::sin(6.0)) - 1.0) / 10.0;
  EXPECT_NEAR(v, exact, 1e-10);
}

TEST(Trapezoid, NonUniformGrid) {
  // f(t) = t on a deliberately uneven grid integrates exactly.
  const std::vector<double> t = {0.0, 0.1, 0.35, 1.0, 2.2};
  std::vector<double> f(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) f[i] = t[i];
  EXPECT_NEAR(kpp::trapezoid(t, f), 2.2 * 2.2 / 2.0, 1e-14);
}

TEST(TrapezoidEm, EndpointCorrectionBeatsPlainTrapezoid) {
  // Smooth integrand on a uniform grid: the Euler-Maclaurin h^2 correction
  // should cut the error by orders of magnitude.
  const std::size_t n = 101;
  const double h = 0.02;
  std::vector<double> t(n), f(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = h * double(i);
    f[i] = std::exp(-t[i]) * std::sin(2.0 * t[i]);
  }
  const double b = t.back();
  const double exact =
      (2.0 - std::exp(-b) * (std::sin(2.0 * b) * 1.0 + 2.0 * std::cos(2.0 * b))) /
      5.0;
  const double e_plain = std::fabs(kpp::trapezoid(t, f) - exact);
  const double e_em = std::fabs(kpp::trapezoid_em(t, f) - exact);
  // The corrected rule is left with the O(h^4) term from the finite
  // difference derivative estimates, about 5e-9 at this h.
  EXPECT_LT(e_em, e_plain / 50.0);
  EXPECT_LT(e_em, 1e-8);
}

TEST(TrapezoidEm, PiecewiseUniformBlocks) {
  // Cadence change mid-series (fine early grid, coarse later) must still get
  // per-block endpoint corrections. Integrand exp(-t/2) over [0, 8].
  std::vector<double> t, f;
  for (double x = 0.0; x < 2.0 - 1e-12; x += 0.01) t.push_back(x);
  for (double x = 2.0; x <= 8.0 + 1e-12; x += 0.1) t.push_back(x);
  f.resize(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) f[i] = std::exp(-0.5 * t[i]);
  const double exact = 2.0 * (1.0 - std::exp(-4.0));
  EXPECT_NEAR(kpp::trapezoid_em(t, f), exact, 5e-7);
  EXPECT_LT(std::fabs(kpp::trapezoid_em(t, f) - exact),
            std::fabs(kpp::trapezoid(t, f) - exact) / 30.0);
}

}  // namespace
