#pragma once
// Tilted-frame integrator for w_t = w_zz - e^z F(w e^{-z}). Space is the
// compact (Numerov) form M w_t = K w + M f with M = tridiag(1,10,1)/12 and
// K the second-difference stencil: M is exact on the front tail modes
// {1, z} and places the discrete h = 1 plateau at 1 - dz^4/240 rather than
// the 1 + dz^2/12 of the bare stencil, which would break the max principle
// at any usable dz. Time is Crank-Nicolson on the diffusion plus an explicit
// midpoint reaction stage (second order overall); the first two steps of a
// run are taken as four backward-Euler half steps (Rannacher smoothing) so
// step-like initial data does not excite the undamped CN sawtooth. The
// window [z_lo, z_hi(t)] grows with t so the pulled front never feels the
// right boundary; both boundaries are Dirichlet (w = e^{z_lo}, w = 0 by
// default, arbitrary schedules for manufactured and comparison runs).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "kpp/model.hpp"
#include "kpp/observables.hpp"

namespace kpp {

struct SolverParams {
  double dz = 0.02;
  double dt = 0.01;
  double z_lo = -40.0;
  // Window policy: z_hi(t) >= k_sigma sqrt(t) + max(0, (c_max-2) t) + margin.
  // The terms add so exponential moments up to e^{(c_max/2) x} stay resolved
  // while the diffusive scale is still covered at early times.
  double k_sigma = 12.0;
  double c_max = 3.0;
  double margin = 30.0;

  bool snapshots_on = true;
  double snapshot_from = 1.0;
  double snapshot_ratio = 1.15;

  // Optional Dirichlet schedules; default holds the initial edge values.
  std::function<double(double)> left_boundary;
  std::function<double(double)> right_boundary;

  double window_need(double t) const {
    const double drift = std::max(0.0, (c_max - 2.0) * t);
    return k_sigma * std::sqrt(std::max(t, 0.0)) + drift + margin;
  }
};

// One IMEX step on a TiltedField. Both the CN step and the backward-Euler
// half step invert the same matrix A = M - (dt/2) K, so one cached Thomas
// elimination (keyed on n, dz) serves the whole run.
class Stepper {
 public:
  Stepper(const Nonlinearity& nl, const SolverParams& params)
      : nl_(nl), p_(params) {
    if (!(p_.dt > 0.0) || !(p_.dz > 0.0))
      throw std::invalid_argument("Stepper: dt and dz must be positive");
    if (p_.dt > p_.dz + 1e-15)
      throw std::invalid_argument("Stepper: requires dt <= dz");
  }

  double max_clamp_ratio() const { return max_clamp_ratio_; }

  // Crank-Nicolson: A w^{n+1} = (M + (dt/2) K) w^n + dt M f(midpoint).
  void step(TiltedField& f) {
    const std::size_t n = f.size();
    if (n < 3) throw std::invalid_argument("Stepper: grid too small");
    prepare(f);
    const double dt = p_.dt;
    const double inv_dz2 = 1.0 / (f.dz * f.dz);
    resize_work(n);

    for (std::size_t i = 1; i + 1 < n; ++i)
      lap_[i] = (f.w[i - 1] - 2.0 * f.w[i] + f.w[i + 1]) * inv_dz2;

    reaction(f.w, f, react_);
    // Midpoint stage: half step with the full explicit rate.
    mid_[0] = f.w[0];
    mid_[n - 1] = f.w[n - 1];
    for (std::size_t i = 1; i + 1 < n; ++i)
      mid_[i] = f.w[i] + 0.5 * dt * (lap_[i] + react_[i]);
    reaction(mid_, f, react_);

    for (std::size_t i = 1; i + 1 < n; ++i)
      rhs_[i] = mass_row(f.w, i) + 0.5 * dt * lap_[i] +
                dt * mass_row(react_, i);

    solve_interior(f, f.t + dt);
  }

  // Rannacher start: two backward-Euler half steps,
  // A w^{+1/2} = M w + (dt/2) M f(quarter-step midpoint).
  void startup_step(TiltedField& f) {
    const std::size_t n = f.size();
    if (n < 3) throw std::invalid_argument("Stepper: grid too small");
    prepare(f);
    const double dt = p_.dt;
    const double inv_dz2 = 1.0 / (f.dz * f.dz);
    resize_work(n);

    for (int half = 0; half < 2; ++half) {
      for (std::size_t i = 1; i + 1 < n; ++i)
        lap_[i] = (f.w[i - 1] - 2.0 * f.w[i] + f.w[i + 1]) * inv_dz2;
      reaction(f.w, f, react_);
      mid_[0] = f.w[0];
      mid_[n - 1] = f.w[n - 1];
      for (std::size_t i = 1; i + 1 < n; ++i)
        mid_[i] = f.w[i] + 0.25 * dt * (lap_[i] + react_[i]);
      reaction(mid_, f, react_);
      for (std::size_t i = 1; i + 1 < n; ++i)
        rhs_[i] = mass_row(f.w, i) + 0.5 * dt * mass_row(react_, i);
      solve_interior(f, f.t + 0.5 * dt);
    }
  }

 private:
  static double mass_row(const std::vector<double>& v, std::size_t i) {
    return (v[i - 1] + 10.0 * v[i] + v[i + 1]) * (1.0 / 12.0);
  }

  void resize_work(std::size_t n) {
    lap_.resize(n);
    react_.resize(n);
    rhs_.resize(n);
    mid_.resize(n);
  }

  void prepare(const TiltedField& f) {
    const std::size_t n = f.size();
    if (n == cached_n_ && f.dz == cached_dz_) return;
    const double r = 0.5 * p_.dt / (f.dz * f.dz);
    const double diag = 10.0 / 12.0 + 2.0 * r;
    a_off_ = 1.0 / 12.0 - r;
    cprime_.assign(n, 0.0);
    inv_diag_.assign(n, 0.0);
    scratch_.assign(n, 0.0);
    // Interior unknowns i = 1 .. n-2, matrix tridiag(a_off, diag, a_off).
    double d = diag;
    inv_diag_[1] = 1.0 / d;
    cprime_[1] = a_off_ / d;
    for (std::size_t i = 2; i + 1 < n; ++i) {
      d = diag - a_off_ * cprime_[i - 1];
      inv_diag_[i] = 1.0 / d;
      cprime_[i] = a_off_ / d;
    }
    cached_n_ = n;
    cached_dz_ = f.dz;
  }

  // Consumes rhs_ (interior rows), applies the Dirichlet values at t_new,
  // solves, clamps negative undershoot, advances f.t.
  void solve_interior(TiltedField& f, double t_new) {
    const std::size_t n = f.size();
    const double w_left =
        p_.left_boundary ? p_.left_boundary(t_new) : f.w[0];
    const double w_right =
        p_.right_boundary ? p_.right_boundary(t_new) : f.w[n - 1];
    rhs_[1] -= a_off_ * w_left;
    rhs_[n - 2] -= a_off_ * w_right;

    scratch_[1] = rhs_[1] * inv_diag_[1];
    for (std::size_t i = 2; i + 1 < n; ++i)
      scratch_[i] = (rhs_[i] - a_off_ * scratch_[i - 1]) * inv_diag_[i];
    f.w[n - 1] = w_right;
    f.w[0] = w_left;
    double prev = scratch_[n - 2];
    f.w[n - 2] = prev;
    for (std::size_t i = n - 3; i >= 1; --i) {
      prev = scratch_[i] - cprime_[i] * prev;
      f.w[i] = prev;
      if (i == 1) break;
    }

    // Tiny negative undershoots are clamped; anything larger than
    // 1e-13 * max(w) means the scheme went unstable.
    double mx = 0.0, worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mx = std::max(mx, f.w[i]);
      if (f.w[i] < 0.0) {
        worst = std::max(worst, -f.w[i]);
        f.w[i] = 0.0;
      }
    }
    if (mx > 0.0 && worst > 1e-13 * mx)
      throw std::runtime_error("Stepper: negative w beyond tolerance");
    if (mx > 0.0) max_clamp_ratio_ = std::max(max_clamp_ratio_, worst / mx);

    f.t = t_new;
  }

  // rate[i] = -e^{z_i} F(w_i e^{-z_i}). Boundary nodes carry their true
  // rates: M smears row i = 1 over nodes {0,1,2}, and a zeroed rate[0]
  // would distort the plateau balance there at relative order 1/12.
  // The predictor can leave the physical range transiently, so h <= 0
  // rates vanish and F is extended past 1 with unit slope (admissible F
  // have F'(1) >= 1; any positive slope keeps the plateau attracting).
  void reaction(const std::vector<double>& w, const TiltedField& f,
                std::vector<double>& rate) {
    const std::size_t n = w.size();
    switch (nl_.kind()) {
      case Nonlinearity::Kind::zero:
        std::fill(rate.begin(), rate.end(), 0.0);
        return;
      case Nonlinearity::Kind::quadratic:
        for (std::size_t i = 0; i < n; ++i) {
          const double wi = std::max(w[i], 0.0);
          rate[i] = -wi * wi * f.exp_mz[i];
        }
        return;
      case Nonlinearity::Kind::custom:
        for (std::size_t i = 0; i < n; ++i) {
          const double h = w[i] * f.exp_mz[i];
          if (h <= 0.0) {
            rate[i] = 0.0;
            continue;
          }
          const double F = h <= 1.0 ? nl_.F(h) : 1.0 + (h - 1.0);
          rate[i] = F > 0.0 ? -F / f.exp_mz[i] : 0.0;
        }
        return;
    }
  }

  Nonlinearity nl_;
  SolverParams p_;
  std::size_t cached_n_ = 0;
  double cached_dz_ = 0.0;
  double a_off_ = 0.0;
  double max_clamp_ratio_ = 0.0;
  std::vector<double> cprime_, inv_diag_, scratch_;
  std::vector<double> lap_, react_, rhs_, mid_;
};

// Exact tilted field for the zero nonlinearity with the step initial
// condition: w(z,t) = (1/2) e^{z+t} erfc((z+2t)/(2 sqrt t)).  Evaluated in
// log space so the e^{z+t} growth and the erfc decay cancel; serves as the
// oracle for the diffusion step and as the time-dependent Dirichlet value
// for linear comparison runs (holding h = 1 at the left edge would leak a
// deficit of relative size e^{t - 40 - 20(c-2)} into the front region).
inline double linear_step_w(double z, double t) {
  if (t <= 0.0) return z < 0.0 ? std::exp(z) : (z == 0.0 ? 0.5 : 0.0);
  const double xi = (z + 2.0 * t) / (2.0 * std::sqrt(t));
  double log_erfc;
  if (xi < 25.0) {
    log_erfc = std::log(std::erfc(xi));
  } else {
    const double inv2 = 1.0 / (xi * xi);
    log_erfc = -xi * xi - std::log(xi * std::sqrt(kPi)) +
               std::log1p(inv2 * (-0.5 + 0.75 * inv2));
  }
  return std::exp(z + t - std::log(2.0) + log_erfc);
}

// Extend the window to the right with zeros (w = 0 is the far-field state).
inline void extend_window(TiltedField& f, double z_hi_new) {
  const std::size_t n_new =
      std::size_t(std::ceil((z_hi_new - f.z_lo) / f.dz - 1e-9)) + 1;
  if (n_new <= f.size()) return;
  f.w.resize(n_new, 0.0);
  f.rebuild_exp_cache();
}

namespace detail {

// Observation and snapshot times are scheduled in whole steps so the series
// is reproducible and free of floating-point drift.
inline std::vector<long long> observation_steps(const ObserveConfig& obs,
                                                double dt, long long n_steps) {
  std::vector<long long> out;
  auto push_cadence = [&](double cadence, long long from, long long to) {
    if (!(cadence > 0.0)) return;
    const long long k = std::max<long long>(1, llround(cadence / dt));
    for (long long s = from; s <= to; s += k) out.push_back(s);
  };
  const long long early_end =
      obs.cadence_early > 0.0
          ? std::min<long long>(n_steps, llround(obs.t_early / dt))
          : 0;
  out.push_back(0);
  push_cadence(obs.cadence_early, 0, early_end);
  const long long k_main = std::max<long long>(1, llround(obs.cadence / dt));
  const long long first_main = early_end > 0 ? (early_end / k_main + 1) * k_main
                                             : k_main;
  push_cadence(obs.cadence, first_main, n_steps);
  out.push_back(n_steps);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline std::vector<long long> snapshot_steps(const SolverParams& p, double dt,
                                             long long n_steps) {
  std::vector<long long> out;
  if (!p.snapshots_on) return out;
  out.push_back(0);  // path sampling starts at t = 0
  const double t_max = double(n_steps) * dt;
  for (double ts = p.snapshot_from; ts <= t_max * (1.0 + 1e-12);
       ts *= p.snapshot_ratio) {
    const long long s = std::min(n_steps, llround(ts / dt));
    if (s >= 1) out.push_back(s);
  }
  for (double dec = 1.0; dec <= t_max * (1.0 + 1e-12); dec *= 10.0)
    out.push_back(std::min(n_steps, llround(dec / dt)));
  out.push_back(n_steps);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace detail

// Run the front from t = 0 to t_max, recording mu, phi(eps,.), log g(r,.)
// at the observation cadence and archiving geometric snapshots.
inline FrontRun evolve(const InitialCondition& ic, const Nonlinearity& nl,
                       const SolverParams& params, double t_max,
                       const ObserveConfig& obs) {
  if (!(t_max > 0.0)) throw std::invalid_argument("evolve: t_max must be > 0");
  const long long n_steps = llround(t_max / params.dt);
  if (std::fabs(double(n_steps) * params.dt - t_max) > 1e-9 * std::max(1.0, t_max))
    throw std::invalid_argument("evolve: t_max must be a multiple of dt");

  FrontRun run;
  run.ic = ic;
  run.nl = nl;
  run.dz = params.dz;
  run.dt = params.dt;
  run.z_lo = params.z_lo;
  run.t_max = t_max;
  run.gamma = ic.gamma();
  run.eps_list = obs.eps_list;
  run.r_list = obs.r_list;
  run.phi.assign(obs.eps_list.size(), {});
  run.log_g.assign(obs.r_list.size(), {});

  const double z_hi0 = params.window_need(std::min(1.0, t_max));
  TiltedField f = tilt(ic, params.z_lo, z_hi0, params.dz);
  Stepper stepper(nl, params);

  const auto obs_steps = detail::observation_steps(obs, params.dt, n_steps);
  const auto snap_steps = detail::snapshot_steps(params, params.dt, n_steps);
  std::size_t next_obs = 0, next_snap = 0;
  FieldScratch scratch;

  const bool monitor_h = !nl.is_zero();
  auto observe_now = [&](long long step) {
    const double t = double(step) * params.dt;
    scratch.refresh(f);
    const double mu = mu_of_field(f);
    run.t.push_back(t);
    run.mu.push_back(mu);
    for (std::size_t e = 0; e < obs.eps_list.size(); ++e)
      run.phi[e].push_back(phi_of_field(f, nl, obs.eps_list[e], mu, scratch));
    for (std::size_t j = 0; j < obs.r_list.size(); ++j)
      run.log_g[j].push_back(g_of_field(f, obs.r_list[j], scratch).log_abs);
    if (monitor_h) {
      double hmax = 0.0;
      for (std::size_t i = 0; i < f.size(); ++i)
        hmax = std::max(hmax, f.w[i] * f.exp_mz[i]);
      run.max_h = std::max(run.max_h, hmax);
      if (hmax > 1.0 + 1e-8)
        throw std::runtime_error("evolve: h exceeded 1 + 1e-8");
      if (t >= 3.0) {
        const double envelope = 3.0 * std::log(t) + 50.0;
        if (std::fabs(mu - 2.0 * t) > envelope)
          throw std::runtime_error("evolve: front left the expected envelope");
      }
    }
    return mu;
  };

  double last_mu = 0.0;
  for (long long step = 0;; ++step) {
    if (next_obs < obs_steps.size() && obs_steps[next_obs] == step) {
      last_mu = observe_now(step);
      ++next_obs;
    } else if (next_snap < snap_steps.size() && snap_steps[next_snap] == step) {
      last_mu = mu_of_field(f);
    }
    if (next_snap < snap_steps.size() && snap_steps[next_snap] == step) {
      run.snapshots.push_back(
          Snapshot{f.t, f.z_lo, f.dz, f.w, last_mu});
      ++next_snap;
    }
    if (step == n_steps) break;
    const double t_next = double(step + 1) * params.dt;
    const double need = params.window_need(t_next);
    if (f.z_hi() < need) {
      // Grow geometrically ahead of the policy curve to amortise regrids.
      const double ahead =
          params.window_need(std::max(t_next * 1.6, t_next + 20.0));
      extend_window(f, std::max(need, ahead));
    }
    f.t = double(step) * params.dt;  // guard against drift before stepping
    if (step < 2)
      stepper.startup_step(f);
    else
      stepper.step(f);
  }

  run.max_clamp_ratio = stepper.max_clamp_ratio();
  return run;
}

}  // namespace kpp
