#include "kpp/model.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "kpp/quadrature.hpp"

namespace {

using kpp::InitialCondition;
using kpp::Nonlinearity;

TEST(Nonlinearity, QuadraticAndZero) {
  const auto q = Nonlinearity::quadratic();
  EXPECT_DOUBLE_EQ(q.F(0.5), 0.25);
  EXPECT_DOUBLE_EQ(q.G(0.5), 0.5);
  EXPECT_DOUBLE_EQ(q.p(), 1.0);
  EXPECT_NO_THROW(q.validate());
  const auto z = Nonlinearity::zero();
  EXPECT_TRUE(z.is_zero());
  EXPECT_EQ(z.F(0.7), 0.0);
  EXPECT_EQ(z.G(0.7), 0.0);
  EXPECT_NO_THROW(z.validate());
}

TEST(Nonlinearity, CustomCubicValidates) {
  const auto c = Nonlinearity::custom(
      [](double h) { return h * h * h; }, [](double h) { return h * h; }, 2.0);
  EXPECT_NO_THROW(c.validate());
  EXPECT_DOUBLE_EQ(c.p(), 2.0);
  EXPECT_DOUBLE_EQ(c.F(0.5), 0.125);
}

TEST(Nonlinearity, CustomConstructionRejectsBadF) {
  // custom() validates eagerly, so a bad F never leaves the factory.
  // F(1) != 1.
  EXPECT_THROW(Nonlinearity::custom([](double h) { return 0.5 * h * h; },
                                    [](double h) { return 0.5 * h; }, 1.0),
               std::invalid_argument);
  // F not below h on (0,1).
  EXPECT_THROW(Nonlinearity::custom([](double h) { return std::sqrt(h); },
                                    [](double h) { return 1.0; }, 1.0),
               std::invalid_argument);
  // Decreasing F.
  EXPECT_THROW(
      Nonlinearity::custom(
          [](double h) { return h < 0.5 ? h * h : h * h * (1.5 - h); },
          [](double h) { return h; }, 1.0),
      std::invalid_argument);
}

TEST(InitialCondition, StepAndTail) {
  const auto st = InitialCondition::step();
  EXPECT_DOUBLE_EQ(st.eval(-1e-9), 1.0);
  EXPECT_DOUBLE_EQ(st.eval(0.0), 0.5);
  EXPECT_DOUBLE_EQ(st.eval(1e-9), 0.0);
  EXPECT_EQ(st.gamma(), kpp::kInf);

  const auto et = InitialCondition::exp_tail(1.5);
  EXPECT_DOUBLE_EQ(et.eval(-2.0), 1.0);
  EXPECT_NEAR(et.eval(2.0), std::exp(-3.0), 1e-15);
  EXPECT_DOUBLE_EQ(et.gamma(), 1.5);
  EXPECT_THROW(InitialCondition::exp_tail(1.0), std::invalid_argument);
}

TEST(InitialCondition, StepBump) {
  // Triangular bump of height 0.3 on [1, 3].
  std::vector<double> samples;
  const int n = 41;
  for (int i = 0; i < n; ++i) {
    const double x = 1.0 + 2.0 * double(i) / double(n - 1);
    samples.push_back(0.3 * std::max(0.0, 1.0 - std::fabs(x - 2.0)));
  }
  const auto ic = InitialCondition::step_bump(samples, 1.0, 3.0);
  EXPECT_DOUBLE_EQ(ic.eval(-1.0), 1.0);
  EXPECT_DOUBLE_EQ(ic.eval(5.0), 0.0);
  EXPECT_NEAR(ic.eval(2.0), 0.3, 1e-12);
  EXPECT_NEAR(ic.bump(2.5), 0.15, 1e-10);
  EXPECT_EQ(ic.bump(10.0), 0.0);
  EXPECT_THROW(InitialCondition::step_bump({0.0, 0.0}, 0.0, 1.0),
               std::invalid_argument);
}

TEST(H0Moment, ClosedForms) {
  const auto st = InitialCondition::step();
  EXPECT_NEAR(kpp::h0_moment(st, 1.3).value(), 1.0 / 1.3, 1e-14);

  const auto et = InitialCondition::exp_tail(2.0);
  // int_{-inf}^0 e^{rx} dx + int_0^inf e^{-g0 x} e^{rx} dx = 1/r + 1/(g0-r).
  EXPECT_NEAR(kpp::h0_moment(et, 1.5).value(), 1.0 / 1.5 + 1.0 / 0.5, 1e-12);
  EXPECT_TRUE(std::isinf(kpp::h0_moment(et, 2.0).value()));
  EXPECT_TRUE(std::isinf(kpp::h0_moment(et, 2.5).value()));
}

TEST(H0Moment, StepBumpQuadrature) {
  // Rectangular-ish bump via dense samples of a smooth profile; compare the
  // moment against direct quadrature of eval().
  std::vector<double> samples;
  const int n = 201;
  for (int i = 0; i < n; ++i) {
    const double x = 0.5 + 2.0 * double(i) / double(n - 1);
    const double u = (x - 1.5) / 0.6;
    samples.push_back(0.4 * std::exp(-u * u));
  }
  const auto ic = InitialCondition::step_bump(samples, 0.5, 2.5);
  const double r = 1.2;
  const double direct =
      1.0 / r + kpp::refined_simpson(
                    [&](double x) { return ic.bump(x) * std::exp(r * x); }, 0.5,
                    2.5, 1e-12);
  EXPECT_NEAR(kpp::h0_moment(ic, r).value(), direct, 1e-9);
}

TEST(Tilt, GridAndValues) {
  const auto f = kpp::tilt(InitialCondition::step(), -40.0, 20.0, 0.02);
  EXPECT_DOUBLE_EQ(f.t, 0.0);
  EXPECT_DOUBLE_EQ(f.z_lo, -40.0);
  EXPECT_NEAR(f.z_hi(), 20.0, 1e-12);
  // w(z,0) = e^z h0(z): e^z left of the step, 0 to the right.
  const std::size_t n = f.size();
  for (std::size_t i = 0; i < n; i += 97) {
    const double z = f.z(i);
    const double expect = z < 0.0 ? std::exp(z) : (z == 0.0 ? 0.5 : 0.0);
    EXPECT_NEAR(f.w[i], expect, 1e-15) << "z=" << z;
  }
  EXPECT_NEAR(kpp::untilt_h(f, -5.0), 1.0, 1e-12);
  EXPECT_NEAR(kpp::untilt_h(f, 5.0), 0.0, 1e-12);
  EXPECT_THROW(kpp::untilt_h(f, 100.0), kpp::window_error);
}

TEST(Tilt, WindowPreconditions) {
  EXPECT_THROW(kpp::tilt(InitialCondition::step(), -20.0, 20.0, 0.02),
               kpp::window_error);
  EXPECT_THROW(kpp::tilt(InitialCondition::step(), -40.0, 5.0, 0.02),
               kpp::window_error);
  // Slow tail needs a wide window before e^{z}h0 has decayed.
  EXPECT_THROW(kpp::tilt(InitialCondition::exp_tail(1.05), -40.0, 100.0, 0.02),
               kpp::window_error);
  EXPECT_NO_THROW(kpp::tilt(InitialCondition::exp_tail(1.5), -40.0, 80.0, 0.02));
}

TEST(TiltedField, HelpersConsistent) {
  auto f = kpp::tilt(InitialCondition::step(), -40.0, 30.0, 0.05);
  f.t = 2.0;  // h(i) must not depend on t, only on z
  for (std::size_t i = 0; i < f.size(); i += 131) {
    EXPECT_NEAR(f.h(i), std::clamp(f.w[i] * std::exp(-f.z(i)), 0.0, 1.0),
                1e-12);
  }
  EXPECT_GT(f.max_w(), 0.0);
}

}  // namespace
