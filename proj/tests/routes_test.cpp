#include "kpp/routes.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "kpp/solver.hpp"
#include "kpp/wave.hpp"

namespace {

using kpp::FkParams;
using kpp::FrontRun;
using kpp::InitialCondition;
using kpp::Nonlinearity;
using kpp::ObserveConfig;
using kpp::SolverParams;

TEST(Richardson, ExactOnPureSqrtSeries) {
  // v = A + B / sqrt(t): one elimination step lands exactly on A.
  std::vector<double> t, v;
  for (double tk = 1.0; tk <= 400.0; tk *= 1.3) {
    t.push_back(tk);
    v.push_back(0.75 - 2.0 / std::sqrt(tk));
  }
  const auto r = kpp::detail::richardson_sqrt_t(t, v);
  EXPECT_NEAR(r.value, 0.75, 1e-12);
  EXPECT_LT(r.uncertainty, 1e-10);
  EXPECT_GE(r.pairs, 2);
}

TEST(Richardson, BeatsRawTailOnMixedSeries) {
  std::vector<double> t, v;
  for (double tk = 2.0; tk <= 1000.0; tk *= 1.25) {
    t.push_back(tk);
    v.push_back(1.5 + 0.8 / std::sqrt(tk) + 3.0 / tk);
  }
  const auto r = kpp::detail::richardson_sqrt_t(t, v);
  const double raw_err = std::fabs(v.back() - 1.5);
  EXPECT_LT(std::fabs(r.value - 1.5), raw_err / 5.0);
  // The spread-based uncertainty should cover the actual error.
  EXPECT_LT(std::fabs(r.value - 1.5), 3.0 * r.uncertainty + 1e-6);
}

TEST(Richardson, RejectsShortSeries) {
  std::vector<double> t = {10.0};
  std::vector<double> v = {1.0};
  EXPECT_THROW(kpp::detail::richardson_sqrt_t(t, v), std::invalid_argument);
  std::vector<double> t2 = {10.0, 10.5};  // too close for a 1.8 chain
  std::vector<double> v2 = {1.0, 1.0};
  EXPECT_THROW(kpp::detail::richardson_sqrt_t(t2, v2), std::invalid_argument);
}

FrontRun linear_run(double c_max, double t_max, std::vector<double> r_list) {
  SolverParams p;
  p.c_max = c_max;
  p.left_boundary = [](double t) { return kpp::linear_step_w(-40.0, t); };
  ObserveConfig obs;
  obs.eps_list = {};
  obs.r_list = std::move(r_list);
  return kpp::evolve(InitialCondition::step(), Nonlinearity::zero(), p, t_max,
                     obs);
}

TEST(PhiRoutes, LinearModelHasKnownPrefactor) {
  // For F = 0 the prefactor is exactly 2/c: the moment series is constant
  // and the amplitude series is 2/c (1 - 2/(c^2 t)).
  const auto run = linear_run(3.0, 80.0, {1.25, 1.5});
  const double c = 3.0;
  const auto amp = kpp::phi_amplitude(run, c);
  EXPECT_NEAR(amp.value, 2.0 / c, 0.01 * 2.0 / c);
  EXPECT_FALSE(amp.flagged);
  const auto mom = kpp::phi_moment(run, c);
  EXPECT_NEAR(mom.value, 2.0 / c, 0.003 * 2.0 / c);
  const auto amp25 = kpp::phi_amplitude(run, 2.5);
  EXPECT_NEAR(amp25.value, 0.8, 0.01 * 0.8);
  EXPECT_THROW(kpp::phi_amplitude(run, 2.0), std::invalid_argument);
  EXPECT_THROW(kpp::phi_moment(run, 2.2), std::invalid_argument);  // no r = 1.1
}

TEST(FkRoute, ZeroKindIsExactWithZeroVariance) {
  const auto run = linear_run(2.5, 10.0, {});
  const auto ar = kpp::build_fk_archive(run);
  FkParams fp;
  fp.n_paths = 200;
  fp.ds = 0.05;
  const auto est = kpp::fk_phi(3.0, ar, Nonlinearity::zero(),
                               InitialCondition::step(), fp);
  EXPECT_DOUBLE_EQ(est.value, 2.0 / 3.0);
  EXPECT_EQ(est.uncertainty, 0.0);
  EXPECT_FALSE(est.flagged);
  EXPECT_EQ(est.n_used, 200);
}

TEST(FkRoute, DeterministicAndSeedSensitive) {
  SolverParams p;
  p.c_max = 2.6;
  ObserveConfig obs;
  const auto run = kpp::evolve(InitialCondition::step(),
                               Nonlinearity::quadratic(), p, 30.0, obs);
  const auto ar = kpp::build_fk_archive(run);
  const auto wave = kpp::solve_wave(Nonlinearity::quadratic());
  const auto mu_fit = kpp::ExpansionCoefficients::paper_default(0.0);
  FkParams fp;
  fp.n_paths = 500;
  fp.ds = 0.02;
  fp.seed = 77;
  const auto a = kpp::fk_phi(2.6, ar, Nonlinearity::quadratic(),
                             InitialCondition::step(), fp, &wave, &mu_fit);
  const auto b = kpp::fk_phi(2.6, ar, Nonlinearity::quadratic(),
                             InitialCondition::step(), fp, &wave, &mu_fit);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.uncertainty, b.uncertainty);
  FkParams fp2 = fp;
  fp2.seed = 78;
  const auto d = kpp::fk_phi(2.6, ar, Nonlinearity::quadratic(),
                             InitialCondition::step(), fp2, &wave, &mu_fit);
  EXPECT_NE(a.value, d.value);
  EXPECT_GT(a.uncertainty, 0.0);
}

TEST(FkRoute, Preconditions) {
  const auto run = linear_run(2.5, 10.0, {});
  const auto ar = kpp::build_fk_archive(run);
  FkParams fp;
  fp.n_paths = 200;
  EXPECT_THROW(kpp::fk_phi(1.9, ar, Nonlinearity::zero(),
                           InitialCondition::step(), fp),
               std::invalid_argument);
  fp.n_paths = 50;
  EXPECT_THROW(kpp::fk_phi(3.0, ar, Nonlinearity::zero(),
                           InitialCondition::step(), fp),
               std::invalid_argument);
  fp.n_paths = 200;
  EXPECT_THROW(kpp::fk_phi(3.0, ar, Nonlinearity::zero(),
                           InitialCondition::exp_tail(1.5), fp),
               std::invalid_argument);
}

TEST(FkArchive, RequiresInitialSnapshotAndTightCadence) {
  auto run = linear_run(2.5, 10.0, {});
  ASSERT_EQ(run.snapshots.front().t, 0.0);
  auto no_zero = run;
  no_zero.snapshots.erase(no_zero.snapshots.begin());
  EXPECT_THROW(kpp::build_fk_archive(no_zero), std::invalid_argument);
  // Drop a middle snapshot past t = 1 so the ratio check trips.
  auto gappy = run;
  std::vector<kpp::Snapshot> kept;
  for (const auto& s : gappy.snapshots)
    if (!(s.t > 2.0 && s.t < 6.0)) kept.push_back(s);
  gappy.snapshots = kept;
  EXPECT_THROW(kpp::build_fk_archive(gappy), std::invalid_argument);
  // The tilted h columns are the clamped untilt of the stored w.
  const auto ar = kpp::build_fk_archive(run);
  EXPECT_NEAR(ar.t_end, 10.0, 1e-9);
  EXPECT_DOUBLE_EQ(ar.h_tilted(0, -45.0), 1.0);
  EXPECT_DOUBLE_EQ(ar.h_tilted(0, 1e9), 0.0);
  const double h_mid = ar.h_tilted(ar.h.size() - 1, 0.0);
  EXPECT_GT(h_mid, 0.0);
}

double estimate_a(const FrontRun& run) {
  double sum = 0.0;
  int n = 0;
  for (std::size_t k = 0; k < run.t.size(); ++k) {
    if (run.t[k] < 0.7 * run.t_max) continue;
    sum += run.mu[k] - 2.0 * run.t[k] + 1.5 * std::log(run.t[k]);
    ++n;
  }
  return sum / double(n);
}

// One integration run feeding all four routes at c = 2.6; agreement here is
// the cheap rehearsal of the full acceptance criterion.
TEST(PhiRoutes, QuadraticRoutesAgreeLoosely) {
  SolverParams p;
  p.c_max = 2.6;
  p.snapshot_from = 0.05;
  p.snapshot_ratio = 1.05;
  ObserveConfig obs;
  obs.eps_list = {-0.25, 0.3};
  obs.r_list = {1.3};
  const auto run = kpp::evolve(InitialCondition::step(),
                               Nonlinearity::quadratic(), p, 200.0, obs);
  const auto wave = kpp::solve_wave(Nonlinearity::quadratic());
  const auto mu_fit = kpp::ExpansionCoefficients::paper_default(estimate_a(run));

  const double c = 2.6;
  const auto amp = kpp::phi_amplitude(run, c);
  const auto mom = kpp::phi_moment(run, c);
  const auto mag = kpp::phi_magical(run, 0.3, &wave, &mu_fit);
  const auto ar = kpp::build_fk_archive(run);
  FkParams fp;
  fp.n_paths = 4000;
  const auto fk = kpp::fk_phi(c, ar, Nonlinearity::quadratic(),
                              InitialCondition::step(), fp, &wave, &mu_fit);

  EXPECT_GT(amp.value, 0.0);
  const kpp::PhiEstimate all[] = {amp, mom, mag, fk};
  for (const auto& e1 : all) {
    for (const auto& e2 : all) {
      EXPECT_NEAR(e1.value, e2.value, 0.04 * std::fabs(e1.value))
          << kpp::route_name(e1.route) << " vs " << kpp::route_name(e2.route);
    }
  }
  EXPECT_LT(mag.tail_fraction, 0.01);  // e^{-eps^2 t_max} is ~1e-8 here
  // Richardson pair counts and FK paths are reported.
  EXPECT_GT(amp.n_used, 3);
  EXPECT_EQ(fk.n_used, 4000);

  // The magical relation residual for eps < 0 closes against the initial
  // moment without any Phi term.
  const double res = kpp::magical_residual(run, -0.25, &wave, &mu_fit);
  EXPECT_LT(std::fabs(res), 0.01);
  // For eps > 0 the residual needs an independent Phi estimate.
  EXPECT_THROW(kpp::magical_residual(run, 0.3, &wave, &mu_fit),
               std::invalid_argument);
  const double res_pos =
      kpp::magical_residual(run, 0.3, &wave, &mu_fit, &amp);
  EXPECT_LT(std::fabs(res_pos), 0.04 * std::fabs(amp.value) + 0.01);
}

TEST(PhiMagical, Preconditions) {
  const auto run = linear_run(2.5, 10.0, {});
  EXPECT_THROW(kpp::phi_magical(run, -0.1), std::invalid_argument);
  EXPECT_THROW(kpp::phi_magical(run, 0.6), std::invalid_argument);
  EXPECT_THROW(kpp::magical_residual(run, 0.0), std::invalid_argument);
}

}  // namespace
