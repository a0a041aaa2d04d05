#include "kpp/solver.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

namespace {

using kpp::InitialCondition;
using kpp::Nonlinearity;
using kpp::ObserveConfig;
using kpp::SolverParams;

TEST(LinearStepW, ClosedFormProperties) {
  // t = 0 recovers the tilted step data.
  EXPECT_DOUBLE_EQ(kpp::linear_step_w(-3.0, 0.0), std::exp(-3.0));
  EXPECT_DOUBLE_EQ(kpp::linear_step_w(0.0, 0.0), 0.5);
  EXPECT_DOUBLE_EQ(kpp::linear_step_w(2.0, 0.0), 0.0);
  // Against a direct erfc evaluation at moderate argument.
  const double z = 1.0, t = 2.0;
  const double xi = (z + 2.0 * t) / (2.0 * std::sqrt(t));
  EXPECT_NEAR(kpp::linear_step_w(z, t),
              0.5 * std::exp(z + t) * std::erfc(xi), 1e-14);
  // Log-space branch joins the erfc branch at xi = 25 up to the truncation
  // of the asymptotic series there (15/(8 xi^6) ~ 8e-9). The probe points
  // must sit tight around the seam: d(log w)/dz = 1 - xi/sqrt(t) = -24, so
  // any spacing shows up multiplied by 24.
  const double tt = 1.0;
  auto z_of_xi = [&](double xi_q) { return 2.0 * std::sqrt(tt) * xi_q - 2.0 * tt; };
  const double lo = kpp::linear_step_w(z_of_xi(25.0 - 1e-12), tt);
  const double hi = kpp::linear_step_w(z_of_xi(25.0 + 1e-12), tt);
  EXPECT_NEAR(hi / lo, 1.0, 3e-8);
}

TEST(Stepper, RejectsBadTimeStep) {
  SolverParams p;
  p.dz = 0.02;
  p.dt = 0.05;  // dt > dz violates the accuracy contract
  EXPECT_THROW(kpp::Stepper(Nonlinearity::quadratic(), p),
               std::invalid_argument);
  p.dt = -0.01;
  EXPECT_THROW(kpp::Stepper(Nonlinearity::quadratic(), p),
               std::invalid_argument);
}

TEST(ObservationSteps, CadenceSchedule) {
  ObserveConfig obs;
  obs.cadence = 0.5;
  obs.cadence_early = 0.1;
  obs.t_early = 10.0;
  const auto steps = kpp::detail::observation_steps(obs, 0.01, 2000);
  ASSERT_FALSE(steps.empty());
  EXPECT_EQ(steps.front(), 0);
  EXPECT_EQ(steps.back(), 2000);
  EXPECT_TRUE(std::is_sorted(steps.begin(), steps.end()));
  EXPECT_EQ(std::adjacent_find(steps.begin(), steps.end()), steps.end());
  auto has = [&](long long s) {
    return std::find(steps.begin(), steps.end(), s) != steps.end();
  };
  EXPECT_TRUE(has(10));    // early cadence 0.1
  EXPECT_TRUE(has(1000));  // end of the early window
  EXPECT_TRUE(has(1050));  // main cadence resumes on its own grid
  EXPECT_FALSE(has(1010));
  EXPECT_TRUE(has(1500));
}

TEST(SnapshotSteps, GeometricWithDecadesAndZero) {
  SolverParams p;  // snapshot_from = 1, ratio = 1.15
  const auto steps = kpp::detail::snapshot_steps(p, 0.01, 10000);
  ASSERT_GE(steps.size(), 3u);
  EXPECT_EQ(steps.front(), 0);
  EXPECT_EQ(steps.back(), 10000);
  EXPECT_TRUE(std::is_sorted(steps.begin(), steps.end()));
  auto has = [&](long long s) {
    return std::find(steps.begin(), steps.end(), s) != steps.end();
  };
  EXPECT_TRUE(has(100));    // t = 1: first geometric snapshot
  EXPECT_TRUE(has(1000));   // decade t = 10
  // Later snapshot spacing stays geometric, never more than the ratio apart.
  for (std::size_t i = 2; i + 1 < steps.size(); ++i) {
    if (steps[i] < 200) continue;
    EXPECT_LT(double(steps[i + 1]) / double(steps[i]), 1.16);
  }
  SolverParams off = p;
  off.snapshots_on = false;
  EXPECT_TRUE(kpp::detail::snapshot_steps(off, 0.01, 10000).empty());
}

TEST(Evolve, LinearModeMatchesClosedForm) {
  SolverParams p;
  // dt = dz/8 keeps CN time dispersion below the sampled-step quadrature
  // dipole, which is the irreducible O(dz^2) error here and reaches 1e-4
  // about eight decades below the peak. Five decades is the checked range.
  p.dt = p.dz / 8.0;
  p.c_max = 2.5;
  p.left_boundary = [](double t) { return kpp::linear_step_w(-40.0, t); };
  ObserveConfig obs;
  obs.eps_list = {};
  obs.r_list = {};
  const auto run = kpp::evolve(InitialCondition::step(), Nonlinearity::zero(),
                               p, 10.0, obs);
  ASSERT_FALSE(run.snapshots.empty());
  const auto& snap = run.snapshots.back();
  EXPECT_NEAR(snap.t, 10.0, 1e-12);
  double ex_max = 0.0;
  for (std::size_t i = 0; i < snap.w.size(); ++i)
    ex_max = std::max(ex_max, kpp::linear_step_w(snap.z(i), snap.t));
  double worst5 = 0.0, worst8 = 0.0;
  for (std::size_t i = 0; i < snap.w.size(); ++i) {
    const double exact = kpp::linear_step_w(snap.z(i), snap.t);
    if (exact < 1e-8 * ex_max) continue;
    const double rel = std::fabs(snap.w[i] - exact) / exact;
    worst8 = std::max(worst8, rel);
    if (exact >= 1e-5 * ex_max) worst5 = std::max(worst5, rel);
  }
  EXPECT_LT(worst5, 1e-4);
  // The structural dipole tail error stays bounded well past the gate.
  EXPECT_LT(worst8, 5e-4);
}

TEST(Evolve, QuadraticFrontSanity) {
  SolverParams p;
  p.c_max = 2.5;
  ObserveConfig obs;
  obs.eps_list = {0.0};
  obs.r_list = {1.2};
  const auto run = kpp::evolve(InitialCondition::step(),
                               Nonlinearity::quadratic(), p, 20.0, obs);
  EXPECT_LE(run.max_h, 1.0 + 1e-8);
  EXPECT_LT(run.max_clamp_ratio, 1e-10);
  ASSERT_GE(run.t.size(), 10u);
  // mu increases and tracks 2t - (3/2) log t to within an O(1) shift.
  for (std::size_t i = 1; i < run.mu.size(); ++i)
    EXPECT_GT(run.mu[i], run.mu[i - 1] - 1e-9);
  const double t_end = run.t.back();
  EXPECT_NEAR(run.mu.back(), 2.0 * t_end - 1.5 * std::log(t_end), 5.0);
  // phi(0, t) settles to an O(1) positive level.
  const auto& phi0 = run.phi_series(0.0);
  EXPECT_GT(phi0.back(), 0.1);
  EXPECT_LT(phi0.back(), 10.0);
}

TEST(Evolve, WindowGrowsWithTime) {
  SolverParams p;
  p.c_max = 3.0;
  ObserveConfig obs;
  obs.eps_list = {};
  obs.r_list = {};
  const auto run = kpp::evolve(InitialCondition::step(),
                               Nonlinearity::quadratic(), p, 30.0, obs);
  ASSERT_FALSE(run.snapshots.empty());
  EXPECT_GE(run.snapshots.back().z_hi(), p.window_need(30.0) - 1e-9);
  EXPECT_LT(run.snapshots.front().z_hi(), run.snapshots.back().z_hi());
}

TEST(Evolve, DeterministicRerun) {
  SolverParams p;
  ObserveConfig obs;
  obs.eps_list = {0.1};
  obs.r_list = {1.1};
  const auto a = kpp::evolve(InitialCondition::step(),
                             Nonlinearity::quadratic(), p, 5.0, obs);
  const auto b = kpp::evolve(InitialCondition::step(),
                             Nonlinearity::quadratic(), p, 5.0, obs);
  ASSERT_EQ(a.t.size(), b.t.size());
  EXPECT_TRUE(a.mu == b.mu);  // bit-identical, not just close
  EXPECT_TRUE(a.phi == b.phi);
  EXPECT_TRUE(a.log_g == b.log_g);
  ASSERT_EQ(a.snapshots.size(), b.snapshots.size());
  for (std::size_t j = 0; j < a.snapshots.size(); ++j)
    EXPECT_TRUE(a.snapshots[j].w == b.snapshots[j].w);
}

TEST(Evolve, Preconditions) {
  SolverParams p;
  ObserveConfig obs;
  EXPECT_THROW(kpp::evolve(InitialCondition::step(), Nonlinearity::quadratic(),
                           p, 10.003, obs),
               std::invalid_argument);
  EXPECT_THROW(kpp::evolve(InitialCondition::step(), Nonlinearity::quadratic(),
                           p, -1.0, obs),
               std::invalid_argument);
}

}  // namespace
