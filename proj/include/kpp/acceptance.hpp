#pragma once
// Numbered acceptance checks, one printed line each.  Tolerances are fixed
// here on purpose: this file is the exit gate for the laboratory, not a
// configurable experiment.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "kpp/asymptotics.hpp"
#include "kpp/model.hpp"
#include "kpp/observables.hpp"
#include "kpp/routes.hpp"
#include "kpp/solver.hpp"
#include "kpp/wave.hpp"

namespace kpp::acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

namespace detail {
inline std::string fmt(const char* f, double a, double b = 0.0,
                       double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}
}  // namespace detail

// 1. Critical wave: ODE residual, midpoint value, tail fit quality, and
//    agreement of the slope coefficient across two disjoint fit windows.
inline CriterionResult crit1_wave() {
  CriterionResult r{1, "traveling_wave", false, ""};
  const Wave w = solve_wave(Nonlinearity::quadratic());
  const double res = max_ode_residual(w);
  const double mid = std::fabs(w.value(0.0) - 0.5);
  const double alt =
      std::fabs(w.alpha_tilde_alt - w.alpha_tilde) / std::fabs(w.alpha_tilde);
  const bool ok = res < 1e-8 && mid < 1e-10 && w.tail_fit_rms < 1e-6 &&
                  alt < 1e-5;
  r.pass = ok;
  r.detail = detail::fmt(
      "ode_residual=%.3g mid_dev=%.3g tail_rms=%.3g alpha_window_dev=%.3g",
      res, mid, w.tail_fit_rms, alt);
  return r;
}

// 2. Linear solver oracle: F = 0 with the step front has the closed form
//    w = (1/2) e^{z+t} erfc((z+2t)/(2 sqrt t)); the scheme must hit it to
//    1e-4 at t = 10 with dz = 0.02 and improve by ~4x under dz halving.
//    The comparison covers five decades below the peak. Deeper in the tail
//    the error is dominated by the dipole component of the sampled-step
//    quadrature defect, which no h0 in [0,1] can cancel and which is
//    amplified by z/2t; it stays O(dz^2), reaching ~1e-4 only eight decades
//    down. dt = dz/8 keeps the CN time dispersion subdominant; both error
//    terms scale as dz^2 under the coupled halving, giving ratio ~4.
inline CriterionResult crit2_linear_oracle() {
  CriterionResult r{2, "linear_solver_oracle", false, ""};
  auto field_error = [](double dz) {
    SolverParams sp;
    sp.dz = dz;
    sp.dt = dz / 8.0;
    sp.c_max = 2.5;
    sp.snapshot_from = 1e9;  // geometric schedule empty; final state kept
    const double z_lo = sp.z_lo;
    sp.left_boundary = [z_lo](double t) { return linear_step_w(z_lo, t); };
    ObserveConfig obs;
    obs.cadence = 5.0;
    FrontRun fr = evolve(InitialCondition::step(), Nonlinearity::zero(), sp,
                         10.0, obs);
    const Snapshot& sn = fr.snapshots.back();
    double ex_max = 0.0;
    for (std::size_t i = 0; i < sn.w.size(); ++i)
      ex_max = std::max(ex_max, linear_step_w(sn.z(i), sn.t));
    double worst = 0.0;
    for (std::size_t i = 0; i < sn.w.size(); ++i) {
      const double exact = linear_step_w(sn.z(i), sn.t);
      if (exact < 1e-5 * ex_max) continue;
      worst = std::max(worst, std::fabs(sn.w[i] - exact) / exact);
    }
    return worst;
  };
  const double err_coarse = field_error(0.02);
  const double err_fine = field_error(0.01);
  const double ratio = err_coarse / err_fine;
  r.pass = err_coarse < 1e-4 && ratio > 3.5 && ratio < 4.5;
  r.detail = detail::fmt("max_rel_err=%.3g halved=%.3g ratio=%.3g",
                         err_coarse, err_fine, ratio);
  return r;
}

// 3. Linear prefactor: with F = 0 the prefactor is exactly 2/c; amplitude
//    and moment routes must land within 1% at c in {2.5, 3, 4}.
inline CriterionResult crit3_phi_linear() {
  CriterionResult r{3, "linear_prefactor", false, ""};
  SolverParams sp;
  sp.c_max = 4.0;
  const double z_lo = sp.z_lo;
  sp.left_boundary = [z_lo](double t) { return linear_step_w(z_lo, t); };
  ObserveConfig obs;
  obs.cadence = 0.5;
  obs.r_list = {1.25, 1.5, 2.0};
  FrontRun fr = evolve(InitialCondition::step(), Nonlinearity::zero(), sp,
                       160.0, obs);
  bool all_ok = true;
  std::string det;
  for (const double c : {2.5, 3.0, 4.0}) {
    const auto amp = phi_amplitude(fr, c);
    const auto mom = phi_moment(fr, c);
    const double target = 2.0 / c;
    const double ea = std::fabs(amp.value - target) / target;
    const double em = std::fabs(mom.value - target) / target;
    all_ok = all_ok && ea < 0.01 && em < 0.01;
    det += detail::fmt("c=%.1f amp_dev=%.2e mom_dev=%.2e  ", c, ea, em);
  }
  r.pass = all_ok;
  r.detail = det;
  return r;
}

// Shared artifacts for the route-concordance check.
struct RouteArtifacts {
  FrontRun run;
  Wave wave;
  ExpansionCoefficients mu_fit;
};

inline RouteArtifacts make_route_run() {
  SolverParams sp;
  sp.c_max = 2.8;
  sp.snapshot_from = 0.05;
  sp.snapshot_ratio = 1.05;
  ObserveConfig obs;
  obs.cadence = 0.5;
  obs.eps_list = {-0.25, 0.15, 0.25, 0.4};
  obs.r_list = {1.15, 1.25, 1.4};
  RouteArtifacts ra{evolve(InitialCondition::step(), Nonlinearity::quadratic(),
                           sp, 1000.0, obs),
                    solve_wave(Nonlinearity::quadratic()),
                    ExpansionCoefficients{}};
  ra.mu_fit = fit_mu(ra.run.t, ra.run.mu, 50.0);
  return ra;
}

// 4. Route concordance at c in {2.3, 2.5, 2.8}: deterministic routes agree
//    pairwise within 2%; pairs involving the Monte Carlo route may instead
//    pass on 3 combined standard errors.
inline CriterionResult crit4_routes() {
  CriterionResult r{4, "route_concordance", false, ""};
  RouteArtifacts ra = make_route_run();
  const FkArchive archive = build_fk_archive(ra.run);
  bool all_ok = true;
  std::string det;
  for (const double c : {2.3, 2.5, 2.8}) {
    std::vector<PhiEstimate> est;
    est.push_back(phi_amplitude(ra.run, c));
    est.push_back(phi_moment(ra.run, c));
    est.push_back(phi_magical(ra.run, 0.5 * c - 1.0, &ra.wave, &ra.mu_fit));
    FkParams fp;
    fp.n_paths = 100000;
    fp.seed = 6021023;
    est.push_back(fk_phi(c, archive, ra.run.nl, ra.run.ic, fp, &ra.wave,
                         &ra.mu_fit));
    double worst_rel = 0.0;
    bool ok_c = true;
    for (std::size_t i = 0; i < est.size(); ++i)
      for (std::size_t j = i + 1; j < est.size(); ++j) {
        const double diff = std::fabs(est[i].value - est[j].value);
        const double scale = 0.5 * (std::fabs(est[i].value) +
                                    std::fabs(est[j].value));
        const bool has_fk = est[i].route == PhiRoute::feynman_kac ||
                            est[j].route == PhiRoute::feynman_kac;
        const double stat = 3.0 * (est[i].uncertainty + est[j].uncertainty);
        const bool pair_ok =
            diff <= 0.02 * scale || (has_fk && diff <= stat);
        ok_c = ok_c && pair_ok;
        worst_rel = std::max(worst_rel, diff / scale);
      }
    all_ok = all_ok && ok_c;
    det += detail::fmt("c=%.1f amp=%.4f mom=%.4f ", c, est[0].value,
                       est[1].value);
    det += detail::fmt("mag=%.4f fk=%.4f ", est[2].value, est[3].value);
    det += detail::fmt("worst_pair=%.2e  ", worst_rel);
  }
  r.pass = all_ok;
  r.detail = det;
  return r;
}

// Shared long front run for the expansion-level checks (5, 6, 8).
struct FrontArtifacts {
  FrontRun run;
  Wave wave;
  ExpansionCoefficients mu_fit;
};

inline FrontArtifacts make_front_run() {
  SolverParams sp;
  sp.c_max = 2.4;
  ObserveConfig obs;
  obs.cadence = 0.5;
  // {-0.1, 0, 0.1} feed the phi-convergence check; {0.025, 0.05, 0.1, 0.2}
  // feed the magical route behind the Phi(2+eps) comparison at eps = 2*that.
  obs.eps_list = {-0.1, 0.0, 0.025, 0.05, 0.1, 0.2};
  obs.r_list = {1.025, 1.05, 1.1, 1.2};
  FrontArtifacts fa{evolve(InitialCondition::step(), Nonlinearity::quadratic(),
                           sp, 2000.0, obs),
                    solve_wave(Nonlinearity::quadratic()),
                    ExpansionCoefficients{}};
  // Full six-term basis: the series genuinely contains 1/t and t^{-3/2}
  // terms with coefficients of order 10, and on a t <= 2000 window they bias
  // any shorter fit (three-term fit: b off 17%, c off 5x; four-term: c still
  // off 2.7x).  With both pairs modelled, b and c land within 0.1% and 4% of
  // their closed forms.
  fa.mu_fit = fit_mu(fa.run.t, fa.run.mu, 100.0, true, true, true);
  return fa;
}

// 5. Front-position expansion: fitted 1/sqrt(t) coefficient within 10% of
//    -3 sqrt(pi), fitted (log t)/t coefficient within 30% of 0.94626, and
//    the residual against the three-term expansion decays like 1/t (log-log
//    slope -1 +- 0.3).  The higher-order terms are in the fit for bias
//    control only; mu_expansion keeps the asymptotic form, so its residual
//    is the genuine O(1/t) remainder.
inline CriterionResult crit5_expansion(const FrontArtifacts& fa) {
  CriterionResult r{5, "front_expansion", false, ""};
  const ExpansionCoefficients& ec = fa.mu_fit;
  const double b_ref = ExpansionCoefficients::default_b();
  const double c_ref = ExpansionCoefficients::default_c();
  const double b_dev = std::fabs(ec.b - b_ref) / std::fabs(b_ref);
  const double c_dev = std::fabs(ec.c - c_ref) / c_ref;

  // Residual slope on geometric times in [100, 1600].
  std::vector<double> X, y, w1;
  double t_pick = 100.0;
  for (std::size_t k = 0; k < fa.run.t.size(); ++k) {
    const double t = fa.run.t[k];
    if (t < t_pick || t > 1600.0) continue;
    t_pick *= 1.12;
    const double res = std::fabs(fa.run.mu[k] - mu_expansion(t, ec));
    if (res < 1e-12) continue;
    X.push_back(1.0);
    X.push_back(std::log(t));
    y.push_back(std::log(res));
    w1.push_back(1.0);
  }
  double slope = 0.0;
  if (X.size() >= 12) {
    const auto fit = least_squares(X, y, w1, 2);
    slope = fit.coeff[1];
  }
  const bool ok = b_dev < 0.10 && c_dev < 0.30 && slope > -1.3 && slope < -0.7;
  r.pass = ok;
  r.detail = detail::fmt("b=%.4f (dev %.2e) ", ec.b, b_dev) +
             detail::fmt("c=%.4f (dev %.2e) ", ec.c, c_dev) +
             detail::fmt("residual_slope=%.3f", slope);
  return r;
}

// 6. Main expansion of Phi(2+eps): with (alpha, beta) taken from the wave
//    tail shifted by the fitted a, the remainder against the third-order
//    expansion stays O(eps^3) across a decade of eps (ratio varies by less
//    than 5x), while dropping the eps^3 log terms degrades the remainder by
//    more than 10x at small eps.
//
//    The measured side is the magical route: of the estimators available at
//    t_max = 2000 it is the only one still converged at eps = 0.05.  The
//    amplitude route needs (eps/2) sqrt(t) >> 1 (0.8 here) and the moment
//    route converges like e^{-eps^2 t/4} (only e^{-1.25} here); both leave
//    errors of order 1e-2, fatal against the eps^3 = 1.25e-4 yardstick.
//    The magical route integrates a recorded e^{-eps^2 t/4}-damped integrand
//    over the whole run and completes the small analytic tail, so its error
//    stays at the grid-systematic level across the decade.
inline CriterionResult crit6_main_theorem(const FrontArtifacts& fa) {
  CriterionResult r{6, "main_expansion", false, ""};
  const auto [alpha, beta] = shift_coeffs(fa.wave.alpha_tilde,
                                          fa.wave.beta_tilde, fa.mu_fit.a);
  const std::vector<double> eps_set = {0.4, 0.2, 0.1, 0.05};
  std::vector<double> with_logs, sans_logs;
  std::string det = detail::fmt("alpha=%.5f beta=%.5f ", alpha, beta);
  for (const double eps : eps_set) {
    const auto meas = phi_magical(fa.run, 0.5 * eps, &fa.wave, &fa.mu_fit);
    const double e3 = eps * eps * eps;
    const double full = std::fabs(meas.value -
                                  main_expansion(eps, alpha, beta, true)) / e3;
    const double bare = std::fabs(meas.value -
                                  main_expansion(eps, alpha, beta, false)) / e3;
    with_logs.push_back(full);
    sans_logs.push_back(bare);
    det += detail::fmt("eps=%.2f R=%.3g R0=%.3g ", eps, full, bare);
  }
  const double var_full = *std::max_element(with_logs.begin(), with_logs.end()) /
                          *std::min_element(with_logs.begin(), with_logs.end());
  double degrade = 0.0;
  for (std::size_t i = 0; i < eps_set.size(); ++i)
    degrade = std::max(degrade, sans_logs[i] / with_logs[i]);
  r.pass = var_full < 5.0 && degrade > 10.0;
  r.detail = det + detail::fmt("variation=%.2f degrade=%.1f", var_full, degrade);
  return r;
}

// 7. Incomplete-gamma expansion: quadrature minus singular part is smooth
//    (cubic fit residual < 1e-4 on |eps| <= 0.2) for the three special
//    cases, and the integration-by-parts recursion holds to 1e-10.
//
//    The fit gate is unreachable for the half-integer cases as pinned: the
//    exact remainder inherits a simple pole at eps = -1/3 from the
//    1/(1 - alpha - beta eps) factor in the recursion, so on a grid of
//    radius 0.2 (60% of the convergence radius) the best cubic leaves
//    ~0.12 for (3/2,3/2) and the log case, ~1.6e-3 for (2,3/2).  Those are
//    properties of the integrals themselves: the quadrature here matches
//    30-digit reference values to 4e-16 (see the unit suite), and the
//    recursion identity holds to 3e-16.  The check reports the honest
//    per-case numbers and fails.
inline CriterionResult crit7_lemma42() {
  CriterionResult r{7, "lemma42", false, ""};
  struct Case {
    double alpha, beta;
    bool with_log;
  };
  const std::vector<Case> cases = {{1.5, 1.5, false},
                                   {2.0, 1.5, false},
                                   {2.5, 1.5, true}};
  double worst_fit = 0.0;
  std::string per_case;
  for (const auto& cs : cases) {
    std::vector<double> X, y, w1;
    for (int k = -10; k <= 10; ++k) {
      if (k == 0) continue;
      const double eps = 0.02 * k;
      const double smooth = lemma42_integral(cs.alpha, cs.beta, eps,
                                             cs.with_log) -
                            lemma42_singular(cs.alpha, cs.beta, eps,
                                             cs.with_log);
      X.push_back(1.0);
      X.push_back(eps);
      X.push_back(eps * eps);
      X.push_back(eps * eps * eps);
      y.push_back(smooth);
      w1.push_back(1.0);
    }
    const auto fit = least_squares(X, y, w1, 4);
    double case_fit = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double model = fit.coeff[0] + fit.coeff[1] * X[4 * i + 1] +
                           fit.coeff[2] * X[4 * i + 2] +
                           fit.coeff[3] * X[4 * i + 3];
      case_fit = std::max(case_fit, std::fabs(y[i] - model));
    }
    per_case += std::string(cs.with_log ? "log_" : "") +
                detail::fmt("fit(%.1f,%.1f)=%.3g ", cs.alpha, cs.beta,
                            case_fit);
    worst_fit = std::max(worst_fit, case_fit);
  }
  double worst_rec = 0.0;
  for (const double alpha : {1.5, 2.0, 2.5})
    for (const double eps : {-0.15, -0.05, 0.08, 0.2}) {
      const double lhs = (1.0 - alpha - 1.5 * eps) *
                         lemma42_integral(alpha, 1.5, eps) -
                         eps * eps * lemma42_integral(alpha - 1.0, 1.5, eps);
      worst_rec = std::max(worst_rec,
                           std::fabs(lhs + std::exp(-eps * eps)));
    }
  r.pass = worst_fit < 1e-4 && worst_rec < 1e-10;
  r.detail = per_case + detail::fmt("recursion_dev=%.3g", worst_rec);
  return r;
}

// 8. Technical condition: t |phi(eps,t) - phi_hat(eps)| stays bounded on
//    t in [50, 1000] (max at most twice the median) for eps in {-0.1, 0, 0.1}.
inline CriterionResult crit8_technical(const FrontArtifacts& fa) {
  CriterionResult r{8, "technical_condition", false, ""};
  bool all_ok = true;
  std::string det;
  for (const double eps : {-0.1, 0.0, 0.1}) {
    const double ph = phi_hat(fa.wave, eps);
    const auto& series = fa.run.phi_series(eps);
    std::vector<double> dev;
    for (std::size_t k = 0; k < fa.run.t.size(); ++k) {
      const double t = fa.run.t[k];
      if (t < 50.0 || t > 1000.0) continue;
      dev.push_back(t * std::fabs(series[k] - ph));
    }
    std::sort(dev.begin(), dev.end());
    const double mx = dev.back();
    const double med = dev[dev.size() / 2];
    all_ok = all_ok && mx <= 2.0 * med;
    det += detail::fmt("eps=%.2f max=%.3g median=%.3g  ", eps, mx, med);
  }
  r.pass = all_ok;
  r.detail = det;
  return r;
}

// 9. Exponential moment bounds: pointwise
//    h(x,t) <= e^{(1+r^2)t} g(r,0) e^{-rx} / sqrt(4 pi t) and integrated
//    g(r,t) <= e^{(1+r^2)t} g(r,0), sampled on t in [1, 100], slack >= 0 up
//    to roundoff.
inline CriterionResult crit9_bounds() {
  CriterionResult r{9, "moment_bounds", false, ""};
  SolverParams sp;
  sp.c_max = 3.0;
  ObserveConfig obs;
  obs.cadence = 1.0;
  obs.r_list = {0.5, 1.0, 1.5};
  FrontRun fr = evolve(InitialCondition::step(), Nonlinearity::quadratic(),
                       sp, 100.0, obs);
  const std::vector<double> rs = {0.5, 1.0, 1.5};
  double min_point_slack = kInf;   // in log-units where the bound is tight
  double min_int_slack = kInf;
  for (const Snapshot& sn : fr.snapshots) {
    if (sn.t < 1.0) continue;
    for (const double rr : rs) {
      const double log_g0 = -std::log(rr);  // step initial condition
      for (std::size_t i = 0; i < sn.w.size(); i += 5) {
        if (!(sn.w[i] > 0.0)) continue;
        const double z = sn.z(i);
        const double log_h = std::log(sn.w[i]) - z;
        if (log_h < std::log(1e-8)) continue;
        const double x = z + 2.0 * sn.t;
        const double log_bound = (1.0 + rr * rr) * sn.t + log_g0 - rr * x -
                                 0.5 * std::log(4.0 * kPi * sn.t);
        if (log_bound > 1.0) continue;  // h <= 1 + 1e-8 << bound
        const double slack = std::exp(log_bound) - std::exp(log_h);
        min_point_slack = std::min(min_point_slack, slack);
      }
    }
  }
  for (std::size_t j = 0; j < rs.size(); ++j) {
    const auto& lg = fr.log_g_series(rs[j]);
    for (std::size_t k = 0; k < fr.t.size(); ++k) {
      if (fr.t[k] < 1.0) continue;
      const double slack_log =
          (1.0 + rs[j] * rs[j]) * fr.t[k] - std::log(rs[j]) - lg[k];
      min_int_slack = std::min(min_int_slack, slack_log);
    }
  }
  r.pass = min_point_slack >= -1e-12 && min_int_slack >= -1e-12;
  r.detail = detail::fmt("min_pointwise_slack=%.3g min_integrated_log_slack=%.3g",
                         min_point_slack, min_int_slack);
  return r;
}

// Groups map onto ctest entries; "all" runs everything. Criterion 7 sits in
// its own group so the one check that fails by construction (see the note
// above crit7_lemma42) is named in the test report instead of colouring the
// rest of the fast group.
inline std::vector<CriterionResult> run_group(const std::string& group) {
  std::vector<CriterionResult> out;
  const bool all = group == "all";
  if (all || group == "fast") {
    out.push_back(crit1_wave());
    out.push_back(crit2_linear_oracle());
    out.push_back(crit9_bounds());
  }
  if (all || group == "lemma42") out.push_back(crit7_lemma42());
  if (all || group == "linear") out.push_back(crit3_phi_linear());
  if (all || group == "routes") out.push_back(crit4_routes());
  if (all || group == "front") {
    FrontArtifacts fa = make_front_run();
    out.push_back(crit5_expansion(fa));
    out.push_back(crit6_main_theorem(fa));
    out.push_back(crit8_technical(fa));
  }
  std::sort(out.begin(), out.end(),
            [](const CriterionResult& a, const CriterionResult& b) {
              return a.id < b.id;
            });
  return out;
}

inline int print_and_score(const std::vector<CriterionResult>& results) {
  int failures = 0;
  for (const auto& cr : results) {
    std::printf("criterion %d (%s): %s  [%s]\n", cr.id, cr.name.c_str(),
                cr.pass ? "PASS" : "FAIL", cr.detail.c_str());
    if (!cr.pass) ++failures;
  }
  return failures;
}

}  // namespace kpp::acceptance
