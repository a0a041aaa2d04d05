#pragma once
// Field-level readouts of the tilted solution: front position mu_t (largest
// x with h = 1/2), the front-centred reaction moment phi(eps,t), and the
// exponential moment g(r,t) = integral h e^{rx} dx. All exponentially scaled
// sums are accumulated in log space with analytic completion of the h = 1
// plateau to the left of the window. FrontRun is the recorded time series a
// single evolution produces.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kpp/interp.hpp"
#include "kpp/model.hpp"
#include "kpp/util.hpp"

namespace kpp {

// Simpson quadrature weights matching composite_simpson (3/8 patch at the
// end when the interval count is odd).
inline std::vector<double> simpson_weights(std::size_t n, double dx) {
  std::vector<double> w(n, 0.0);
  if (n < 2) return w;
  if (n == 2) {
    w[0] = w[1] = 0.5 * dx;
    return w;
  }
  std::size_t last = n - 1;
  if (last % 2 != 0) {
    const double c = dx * 3.0 / 8.0;
    w[n - 4] += c;
    w[n - 3] += 3.0 * c;
    w[n - 2] += 3.0 * c;
    w[n - 1] += c;
    last = n - 4;
  }
  for (std::size_t i = 0; i + 2 <= last; i += 2) {
    w[i] += dx / 3.0;
    w[i + 1] += 4.0 * dx / 3.0;
    w[i + 2] += dx / 3.0;
  }
  return w;
}

// log( sum_i weight_i * exp(logs_i) ); -inf entries are skipped.
inline double log_weighted_sum(std::span<const double> logs,
                               std::span<const double> weights) {
  double mx = kNegInf;
  for (double v : logs) mx = std::max(mx, v);
  if (mx == kNegInf) return kNegInf;
  double s = 0.0;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    const double d = logs[i] - mx;
    if (d > -60.0) s += weights[i] * std::exp(d);
  }
  return s > 0.0 ? mx + std::log(s) : kNegInf;
}

// Per-observation caches shared by the extractors below.
struct FieldScratch {
  std::vector<double> log_w;
  std::vector<double> weights;
  std::vector<double> terms;
  double cached_dz = 0.0;

  void refresh(const TiltedField& f) {
    const std::size_t n = f.size();
    log_w.resize(n);
    terms.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      log_w[i] = f.w[i] > 0.0 ? std::log(f.w[i]) : kNegInf;
    if (weights.size() != n || cached_dz != f.dz) {
      weights = simpson_weights(n, f.dz);
      cached_dz = f.dz;
    }
  }
};

// Largest x with h(x,t) = 1/2, located by a shape-preserving cubic on the
// tilted grid, scanning from the right. Throws if no crossing is in window.
inline double mu_of_field(const TiltedField& f) {
  const std::size_t n = f.size();
  if (n < 4) throw std::invalid_argument("mu_of_field: grid too small");
  auto h = [&](std::size_t i) { return f.w[i] * f.exp_mz[i]; };
  for (std::size_t i = n - 1;; --i) {
    if (h(i) >= 0.5) {
      if (i == n - 1)
        throw window_error("mu_of_field: h >= 1/2 at the right edge");
      const double y0 = h(i), y1 = h(i + 1);
      const double dm = i > 0 ? (y0 - h(i - 1)) / f.dz : (y1 - y0) / f.dz;
      const double d0 = (y1 - y0) / f.dz;
      const double dp =
          i + 2 < n ? (h(i + 2) - y1) / f.dz : d0;
      const double m0 = monotone_slope(dm, d0);
      const double m1 = monotone_slope(d0, dp);
      const double u = hermite_root(y0, y1, m0, m1, f.dz, 0.5);
      return 2.0 * f.t + f.z(i) + u * f.dz;
    }
    if (i == 0) break;
  }
  throw window_error("mu_of_field: no h = 1/2 crossing in window");
}

// phi(eps,t) = integral F[h(mu_t + u, t)] e^{(1+eps)u} du. Evaluated on the
// tilted grid (u = zeta - (mu_t - 2t)) with the h = 1 plateau completed
// analytically to the left of the window: integral_{-inf}^{z_lo} e^{(1+eps)z}
// = e^{(1+eps) z_lo}/(1+eps).
inline double phi_of_field(const TiltedField& f, const Nonlinearity& nl,
                           double eps, double mu, FieldScratch& scratch) {
  const double pmax = std::min(nl.p(), 1.0) - 1e-3;
  if (!(eps > -0.9 && eps <= pmax))
    throw std::invalid_argument("phi_of_field: eps outside (-0.9, min(p,1))");
  if (nl.is_zero()) return 0.0;

  const std::size_t n = f.size();
  if (scratch.log_w.size() != n)
    throw std::logic_error("phi_of_field: scratch not refreshed for this field");
  const double k = 1.0 + eps;
  auto& terms = scratch.terms;
  if (nl.kind() == Nonlinearity::Kind::quadratic) {
    // F(h) e^{(1+eps)z} = w^2 e^{(eps-1)z}
    for (std::size_t i = 0; i < n; ++i)
      terms[i] = 2.0 * scratch.log_w[i] + (eps - 1.0) * f.z(i);
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const double h = f.w[i] * f.exp_mz[i];
      const double F = h > 0.0 ? nl.F(std::min(h, 1.0)) : 0.0;
      terms[i] = F > 0.0 ? std::log(F) + k * f.z(i) : kNegInf;
    }
  }

  const double interior = log_weighted_sum(terms, scratch.weights);
  // Right-edge resolution check: the integrand must have decayed.
  double edge = kNegInf;
  for (std::size_t i = n >= 4 ? n - 4 : 0; i < n; ++i)
    edge = std::max(edge, terms[i] + std::log(std::max(f.dz, 1e-300)));
  const double completion = k * f.z_lo - std::log(k);
  const LogValue total = LogValue::from_log(interior) + LogValue::from_log(completion);
  if (edge > total.log_abs + std::log(1e-9))
    throw window_error("phi_of_field: window too short for this eps");
  return std::exp(-k * (mu - 2.0 * f.t) + total.log_abs);
}

// g(r,t) = integral h e^{rx} dx as (log, sign), sign always +1. Tilted form:
// e^{2rt} [ integral w e^{(r-1)z} dz + e^{r z_lo}/r ] with the h = 1 plateau
// completion. Throws window_error when the right edge is not resolved.
inline LogValue g_of_field(const TiltedField& f, double r,
                           FieldScratch& scratch) {
  if (!(r > 0.0)) throw std::invalid_argument("g_of_field: need r > 0");
  const std::size_t n = f.size();
  if (scratch.log_w.size() != n)
    throw std::logic_error("g_of_field: scratch not refreshed for this field");
  auto& terms = scratch.terms;
  for (std::size_t i = 0; i < n; ++i)
    terms[i] = scratch.log_w[i] + (r - 1.0) * f.z(i);
  const double interior = log_weighted_sum(terms, scratch.weights);
  const double completion = r * f.z_lo - std::log(r);
  const LogValue spatial =
      LogValue::from_log(interior) + LogValue::from_log(completion);
  double edge = kNegInf;
  for (std::size_t i = n >= 4 ? n - 4 : 0; i < n; ++i)
    edge = std::max(edge, terms[i] + std::log(std::max(f.dz, 1e-300)));
  if (edge > spatial.log_abs + std::log(1e-12))
    throw window_error("g_of_field: window too short for this r");
  return LogValue::from_log(2.0 * r * f.t + spatial.log_abs);
}

// Frozen copy of the field at one time, with the front position cached.
struct Snapshot {
  double t = 0.0;
  double z_lo = 0.0;
  double dz = 0.0;
  std::vector<double> w;
  double mu = 0.0;

  double z(std::size_t i) const { return z_lo + dz * double(i); }
  double z_hi() const { return z(w.size() - 1); }
};

struct ObserveConfig {
  double cadence = 0.5;
  double cadence_early = 0.1;  // finer sampling while t <= t_early; 0 = off
  double t_early = 10.0;
  std::vector<double> eps_list;
  std::vector<double> r_list;
};

// Recorded series of one evolution.
struct FrontRun {
  InitialCondition ic = InitialCondition::step();
  Nonlinearity nl = Nonlinearity::quadratic();
  double dz = 0.0, dt = 0.0, z_lo = 0.0, t_max = 0.0;
  double gamma = kInf;  // moment abscissa of the initial condition

  std::vector<double> t;
  std::vector<double> mu;
  std::vector<double> eps_list;
  std::vector<std::vector<double>> phi;    // phi[e][k], e indexes eps_list
  std::vector<double> r_list;
  std::vector<std::vector<double>> log_g;  // log_g[j][k], j indexes r_list
  std::vector<Snapshot> snapshots;

  double max_clamp_ratio = 0.0;  // largest |negative w| / max w seen
  double max_h = 0.0;            // largest h seen (monitor: <= 1 + 1e-8)

  bool eps_present(double eps) const {
    for (const double e : eps_list)
      if (std::fabs(e - eps) < 1e-12) return true;
    return false;
  }
  std::size_t eps_index(double eps) const {
    for (std::size_t i = 0; i < eps_list.size(); ++i)
      if (std::fabs(eps_list[i] - eps) < 1e-12) return i;
    throw std::invalid_argument("FrontRun: eps not recorded");
  }
  std::size_t r_index(double r) const {
    for (std::size_t i = 0; i < r_list.size(); ++i)
      if (std::fabs(r_list[i] - r) < 1e-12) return i;
    throw std::invalid_argument("FrontRun: r not recorded");
  }
  const std::vector<double>& phi_series(double eps) const {
    return phi[eps_index(eps)];
  }
  const std::vector<double>& log_g_series(double r) const {
    return log_g[r_index(r)];
  }
};

}  // namespace kpp
