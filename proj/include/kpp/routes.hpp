#pragma once
// Four independent routes to the large-deviation prefactor Phi(c):
//   amplitude: s(t) = sqrt(4 pi t) e^{(c^2/4-1)t} h(ct,t) extrapolated in
//              1/sqrt(t) over geometric snapshot times;
//   moment:    e^{-t(1+c^2/4)} g(c/2, t) extrapolated the same way;
//   magical:   Phi(2+2eps) = int h0 e^{(1+eps)x} dx
//              - int_0^inf phi(eps,t) e^{-eps^2 t + (1+eps)(mu_t-2t)} dt,
//              with the time integral completed beyond t_max by the wave
//              moment phi_hat(eps) and the fitted mu expansion;
//   feynman_kac: Monte Carlo of the representation
//              Phi(c) = int dy (c/2) e^{cy/2} h0(y) E[ e^{-int G(h(B_s+cs+y, s)) ds} ] * (2/c)
//              with Var(B_s) = 2s, driven by the archived field.
// All four must agree; none is allowed to calibrate another.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kpp/asymptotics.hpp"
#include "kpp/interp.hpp"
#include "kpp/model.hpp"
#include "kpp/observables.hpp"
#include "kpp/quadrature.hpp"
#include "kpp/util.hpp"
#include "kpp/wave.hpp"

namespace kpp {

enum class PhiRoute { amplitude, moment, magical, feynman_kac };

inline const char* route_name(PhiRoute r) {
  switch (r) {
    case PhiRoute::amplitude: return "amplitude";
    case PhiRoute::moment: return "moment";
    case PhiRoute::magical: return "magical";
    case PhiRoute::feynman_kac: return "feynman_kac";
  }
  return "?";
}

struct PhiEstimate {
  double c = 0.0;
  double value = 0.0;
  double uncertainty = 0.0;
  PhiRoute route = PhiRoute::amplitude;
  bool flagged = false;         // low signal / unreliable tail
  double tail_fraction = 0.0;   // magical route: |Tail| / |value|
  long long n_used = 0;         // snapshots, pairs or paths behind the value
  std::string diagnostics;
};

namespace detail {

// Relative systematic floor attributed to the finite Delta z / Delta t of
// the driving run; measured by grid-halving on short reruns and folded into
// every route's reported uncertainty.
inline constexpr double kGridSystematicRel = 5e-4;

struct Richardson {
  double value = 0.0;
  double uncertainty = 0.0;
  long long pairs = 0;
};

// s(t) = L + A/sqrt(t) + o(1/sqrt(t)): remove the 1/sqrt(t) term across a
// geometric chain of times (factor ~1.8); the spread of the last few
// extrapolants is the uncertainty.
inline Richardson richardson_sqrt_t(std::span<const double> t,
                                    std::span<const double> v) {
  if (t.size() != v.size() || t.size() < 2)
    throw std::invalid_argument("richardson_sqrt_t: series too short");
  std::vector<std::size_t> chain;
  double target = t.back();
  std::size_t i = t.size();
  while (i > 0) {
    --i;
    if (t[i] <= target && t[i] > 0.0 && std::isfinite(v[i])) {
      chain.push_back(i);
      target = t[i] / 1.8;
    }
  }
  std::reverse(chain.begin(), chain.end());
  if (chain.size() < 2)
    throw std::invalid_argument("richardson_sqrt_t: fewer than 2 usable times");
  std::vector<double> extr;
  for (std::size_t k = 0; k + 1 < chain.size(); ++k) {
    const std::size_t a = chain[k], b = chain[k + 1];
    const double xa = 1.0 / std::sqrt(t[a]), xb = 1.0 / std::sqrt(t[b]);
    extr.push_back((v[b] * xa - v[a] * xb) / (xa - xb));
  }
  Richardson r;
  r.pairs = (long long)extr.size();
  r.value = extr.back();
  if (extr.size() >= 2) {
    double mn = extr.back(), mx = extr.back();
    const std::size_t from = extr.size() >= 4 ? extr.size() - 4 : 0;
    for (std::size_t k = from; k < extr.size(); ++k) {
      mn = std::min(mn, extr[k]);
      mx = std::max(mx, extr[k]);
    }
    r.uncertainty = mx - mn;
  } else {
    r.uncertainty = std::fabs(extr.back() - v[chain.back()]);
  }
  return r;
}

}  // namespace detail

// --- amplitude route -------------------------------------------------------

inline PhiEstimate phi_amplitude(const FrontRun& run, double c) {
  if (!(c > 2.0)) throw std::invalid_argument("phi_amplitude: need c > 2");
  std::vector<double> ts, ss;
  bool exponent_capped = false;
  for (const Snapshot& sn : run.snapshots) {
    if (sn.t < 0.5) continue;
    const double z_eval = (c - 2.0) * sn.t;
    const double expo = 0.25 * (c - 2.0) * (c - 2.0) * sn.t;
    if (expo > 600.0) {
      exponent_capped = true;
      continue;
    }
    if (z_eval > sn.z_hi() - 5.0) continue;
    // Interpolate log w cubically; w decays like a Gaussian there, so its
    // logarithm is the smooth object.
    const double sidx = (z_eval - sn.z_lo) / sn.dz;
    std::size_t i0 = (std::size_t)std::max(0.0, sidx - 1.0);
    i0 = std::min(i0, sn.w.size() - 4);
    double lw[4];
    bool ok = true;
    for (int q = 0; q < 4; ++q) {
      const double wv = sn.w[i0 + q];
      if (!(wv > 0.0)) {
        ok = false;
        break;
      }
      lw[q] = std::log(wv);
    }
    if (!ok) continue;
    const double zq = (sidx - double(i0)) * sn.dz;  // offset from stencil base
    const double logw =
        cubic_interp_uniform(std::span<const double>(lw, 4), 0.0, sn.dz, zq);
    const double log_s =
        0.5 * std::log(4.0 * kPi * sn.t) + logw + expo;
    ts.push_back(sn.t);
    ss.push_back(std::exp(log_s));
  }
  if (ts.size() < 2)
    throw std::runtime_error("phi_amplitude: fewer than 2 usable snapshots");
  const auto r = detail::richardson_sqrt_t(ts, ss);
  PhiEstimate e;
  e.c = c;
  e.value = r.value;
  e.uncertainty = r.uncertainty + detail::kGridSystematicRel * std::fabs(r.value);
  e.route = PhiRoute::amplitude;
  e.n_used = (long long)ts.size();
  e.flagged = exponent_capped || ts.size() < 4;
  if (e.flagged) e.diagnostics = "low signal: limited usable snapshot range";
  return e;
}

// --- moment route ----------------------------------------------------------

inline PhiEstimate phi_moment(const FrontRun& run, double c) {
  if (!(c > 2.0)) throw std::invalid_argument("phi_moment: need c > 2");
  const auto& lg = run.log_g_series(0.5 * c);
  std::vector<double> ts, ms;
  for (std::size_t k = 0; k < run.t.size(); ++k) {
    if (run.t[k] < 0.5) continue;
    const double log_m = lg[k] - run.t[k] * (1.0 + 0.25 * c * c);
    ts.push_back(run.t[k]);
    ms.push_back(std::exp(log_m));
  }
  if (ts.size() < 2)
    throw std::runtime_error("phi_moment: series too short");
  const auto r = detail::richardson_sqrt_t(ts, ms);
  PhiEstimate e;
  e.c = c;
  e.value = r.value;
  e.uncertainty = r.uncertainty + detail::kGridSystematicRel * std::fabs(r.value);
  e.route = PhiRoute::moment;
  e.n_used = (long long)ts.size();
  return e;
}

// --- magical route ---------------------------------------------------------

namespace detail {
// integral over the recorded series plus the analytic continuation beyond
// t_max built from phi_hat(eps) and the fitted mu expansion.
struct MagicalIntegral {
  double recorded = 0.0;
  double tail = 0.0;
};

inline MagicalIntegral magical_time_integral(const FrontRun& run, double eps,
                                             const Wave* wave,
                                             const ExpansionCoefficients* mu_fit) {
  const auto& phi = run.phi_series(eps);
  std::vector<double> f(run.t.size());
  for (std::size_t k = 0; k < run.t.size(); ++k) {
    const double arg = -eps * eps * run.t[k] +
                       (1.0 + eps) * (run.mu[k] - 2.0 * run.t[k]);
    f[k] = phi[k] * std::exp(arg);
  }
  MagicalIntegral out;
  out.recorded = trapezoid_em(run.t, f);
  if (run.nl.is_zero()) return out;  // phi vanishes identically
  if (wave == nullptr || mu_fit == nullptr)
    throw std::invalid_argument(
        "magical route: wave profile and fitted mu coefficients required");
  const double ph = phi_hat(*wave, eps);
  const ExpansionCoefficients ec = *mu_fit;
  auto tail_f = [=](double t) {
    const double mu_shift = -1.5 * std::log(t) + ec.a +
                            ec.b / std::sqrt(t) + ec.c * std::log(t) / t;
    return std::exp(-eps * eps * t + (1.0 + eps) * mu_shift);
  };
  out.tail = ph * integrate_semi_infinite(tail_f, run.t_max, 1e-16, 1e-10).value;
  return out;
}
}  // namespace detail

inline PhiEstimate phi_magical(const FrontRun& run, double eps,
                               const Wave* wave = nullptr,
                               const ExpansionCoefficients* mu_fit = nullptr) {
  const double eps_max = std::min(run.gamma - 1.0, 0.5);
  if (!(eps > 0.0 && eps < eps_max))
    throw std::invalid_argument("phi_magical: need eps in (0, min(gamma-1, 0.5))");
  const auto mi = detail::magical_time_integral(run, eps, wave, mu_fit);
  const double h0m = h0_moment(run.ic, 1.0 + eps).value();
  PhiEstimate e;
  e.c = 2.0 + 2.0 * eps;
  e.value = h0m - mi.recorded - mi.tail;
  e.route = PhiRoute::magical;
  e.tail_fraction =
      std::fabs(mi.tail) / std::max(std::fabs(e.value), 1e-300);
  e.flagged = e.tail_fraction > 0.10;
  if (e.flagged)
    e.diagnostics = "tail beyond t_max contributes more than 10%";
  e.uncertainty = 0.05 * std::fabs(mi.tail) +
                  detail::kGridSystematicRel * std::fabs(e.value);
  return e;
}

// LHS - RHS of the magical relation at one eps; the Phi term (present only
// for eps > 0) is supplied by an independent route.
inline double magical_residual(const FrontRun& run, double eps,
                               const Wave* wave = nullptr,
                               const ExpansionCoefficients* mu_fit = nullptr,
                               const PhiEstimate* phi_term = nullptr) {
  const double eps_max = std::min(run.gamma - 1.0, 0.5);
  if (!(eps > -0.9 && eps < eps_max) || eps == 0.0)
    throw std::invalid_argument("magical_residual: eps out of range");
  const auto mi = detail::magical_time_integral(run, eps, wave, mu_fit);
  const double h0m = h0_moment(run.ic, 1.0 + eps).value();
  double rhs = h0m;
  if (eps > 0.0) {
    if (phi_term == nullptr)
      throw std::invalid_argument(
          "magical_residual: eps > 0 needs an independent Phi estimate");
    rhs -= phi_term->value;
  }
  return (mi.recorded + mi.tail) - rhs;
}

// --- Feynman-Kac route -----------------------------------------------------

// Precomputed view of the snapshot archive: per-snapshot h on the tilted
// grid (h(x,s) is interpolated at fixed z = x - 2s, where w varies slowly
// in time, never at fixed x where the front sweeps through).
struct FkArchive {
  double dz = 0.0;
  double z_lo = 0.0;
  std::vector<double> t;
  std::vector<std::vector<double>> h;  // tilted: h[j][i] = h(z_i + 2 t_j, t_j)
  std::vector<double> mu;
  double t_end = 0.0;

  double h_tilted(std::size_t j, double z) const {
    const auto& hj = h[j];
    if (z <= z_lo) return 1.0;
    const double z_hi = z_lo + dz * double(hj.size() - 1);
    if (z >= z_hi) return 0.0;
    const double v = cubic_interp_uniform(hj, z_lo, dz, z);
    return std::min(std::max(v, 0.0), 1.0);
  }
};

inline FkArchive build_fk_archive(const FrontRun& run) {
  if (run.snapshots.empty() || run.snapshots.front().t != 0.0)
    throw std::invalid_argument("build_fk_archive: archive must start at t = 0");
  FkArchive ar;
  ar.dz = run.dz;
  ar.z_lo = run.z_lo;
  for (std::size_t j = 0; j < run.snapshots.size(); ++j) {
    const Snapshot& sn = run.snapshots[j];
    if (j > 0) {
      const double t_prev = run.snapshots[j - 1].t;
      if (t_prev >= 1.0 && sn.t > 1.21 * t_prev)
        throw std::invalid_argument(
            "build_fk_archive: snapshot ratio exceeds 1.2");
    }
    ar.t.push_back(sn.t);
    ar.mu.push_back(sn.mu);
    std::vector<double> hv(sn.w.size());
    for (std::size_t i = 0; i < sn.w.size(); ++i) {
      const double z = sn.z(i);
      const double h = z > -700.0 ? sn.w[i] * std::exp(-z) : 1.0;
      hv[i] = std::min(std::max(h, 0.0), 1.0);
    }
    ar.h.push_back(std::move(hv));
  }
  ar.t_end = ar.t.back();
  return ar;
}

struct FkParams {
  long long n_paths = 100000;
  double ds = 0.01;
  std::uint64_t seed = 20240915;
  double barrier_offset = 40.0;  // truncate once x > 2s + (c-2)s/2 + offset
  double kill_threshold = 46.0;  // stop once the accumulated integral kills
};

inline PhiEstimate fk_phi(double c, const FkArchive& ar,
                          const Nonlinearity& nl, const InitialCondition& ic,
                          const FkParams& fp, const Wave* fallback_wave = nullptr,
                          const ExpansionCoefficients* fallback_mu = nullptr) {
  if (!(c > 2.0)) throw std::invalid_argument("fk_phi: need c > 2");
  if (fp.n_paths < 100)
    throw std::invalid_argument("fk_phi: need at least 100 paths");
  if (ic.kind() != InitialCondition::Kind::step)
    throw std::invalid_argument("fk_phi: requires the step initial condition");

  const bool zero_kind = nl.is_zero();
  auto mu_at = [&](double s) {
    if (s >= ar.t_end) {
      if (fallback_mu) return mu_expansion(std::max(s, 3.0), *fallback_mu);
      throw std::runtime_error("fk_phi: path left the archive in time");
    }
    const auto it = std::upper_bound(ar.t.begin(), ar.t.end(), s);
    const std::size_t j = std::max<std::ptrdiff_t>(1, it - ar.t.begin()) - 1;
    const std::size_t j1 = std::min(j + 1, ar.t.size() - 1);
    if (j1 == j) return ar.mu[j];
    const double th = (s - ar.t[j]) / (ar.t[j1] - ar.t[j]);
    return (1.0 - th) * ar.mu[j] + th * ar.mu[j1];
  };
  auto h_at = [&](double x, double s, std::size_t& hint) -> double {
    if (s >= ar.t_end) {
      if (fallback_wave && fallback_mu)
        return fallback_wave->value(x - mu_expansion(std::max(s, 3.0),
                                                     *fallback_mu));
      throw std::runtime_error("fk_phi: path left the archive in time");
    }
    while (hint + 1 < ar.t.size() && ar.t[hint + 1] <= s) ++hint;
    const std::size_t j = hint, j1 = std::min(hint + 1, ar.t.size() - 1);
    const double z = x - 2.0 * s;
    const double hj = ar.h_tilted(j, z);
    if (j1 == j) return hj;
    const double th = (s - ar.t[j]) / (ar.t[j1] - ar.t[j]);
    return (1.0 - th) * hj + th * ar.h_tilted(j1, z);
  };

  constexpr int kChunks = 256;
  std::vector<double> sum(kChunks, 0.0), sumsq(kChunks, 0.0);
  long long capped = 0;
  const double drift_gap = 0.5 * (c - 2.0);
  const double s_cap = 12.0 * (fp.barrier_offset + 10.0) / drift_gap + 500.0;

  for (long long p = 0; p < fp.n_paths; ++p) {
    std::mt19937_64 eng(splitmix64(
        fp.seed + 0x9E3779B97F4A7C15ULL * (std::uint64_t)(p + 1)));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    double u = unif(eng);
    if (u <= 0.0) u = 1e-300;
    const double y = (2.0 / c) * std::log(u);

    double x = y, s = 0.0, acc = 0.0;
    std::size_t hint = 0;
    double v = kNaN;
    while (true) {
      // Brownian increments are exact at any step size; only the quadrature
      // of int G ds needs resolution, so coarsen far ahead of the front
      // where G is exponentially small (and everywhere for the zero kind).
      double ds = fp.ds;
      double gap = 0.0;
      if (zero_kind) {
        ds = fp.ds * 16.0;
      } else {
        gap = x - mu_at(s);
        if (gap > 20.0) ds = fp.ds * 64.0;
        else if (gap > 12.0) ds = fp.ds * 8.0;
      }
      const double xi = normal(eng);
      const double x_new = x + c * ds + std::sqrt(2.0 * ds) * xi;
      const double s_new = s + ds;
      if (!zero_kind) {
        if (gap < -40.0) {
          acc += ds;  // h = 1 to within e^{-40} here, so G = G(1) = 1
        } else {
          const double h = h_at(0.5 * (x + x_new), s + 0.5 * ds, hint);
          if (h > 0.0) acc += ds * nl.G(h);
        }
      }
      x = x_new;
      s = s_new;
      if (acc > fp.kill_threshold) {
        v = std::exp(-acc);
        break;
      }
      if (x > 2.0 * s + drift_gap * s + fp.barrier_offset) {
        v = std::exp(-acc);
        break;
      }
      if (s > s_cap) {
        v = std::exp(-acc);
        ++capped;
        break;
      }
    }
    sum[p % kChunks] += v;
    sumsq[p % kChunks] += v * v;
  }

  double total = 0.0, total_sq = 0.0;
  for (int q = 0; q < kChunks; ++q) {
    total += sum[q];
    total_sq += sumsq[q];
  }
  const double n = double(fp.n_paths);
  const double mean = total / n;
  const double var = std::max(0.0, total_sq / n - mean * mean);
  const double stderr_mean = std::sqrt(var / std::max(1.0, n - 1.0));

  PhiEstimate e;
  e.c = c;
  e.value = (2.0 / c) * mean;
  e.uncertainty = (2.0 / c) * stderr_mean;
  e.route = PhiRoute::feynman_kac;
  e.n_used = fp.n_paths;
  if (capped > 0) {
    e.flagged = true;
    e.diagnostics = "paths hit the hard time cap: " + std::to_string(capped);
  }
  return e;
}

}  // namespace kpp
