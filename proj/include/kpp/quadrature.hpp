#pragma once
// Quadrature: adaptive Gauss-Kronrod (G7,K15) on finite and semi-infinite
// intervals, composite Simpson for uniformly sampled integrands, and
// trapezoidal integration of recorded time series with Euler-Maclaurin
// endpoint corrections on piecewise-uniform cadences.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "kpp/util.hpp"

namespace kpp {

namespace detail {
// K15 abscissae (non-negative half) and weights; G7 shares the odd nodes.
inline constexpr double kGK15X[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kGK15WK[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kGK15WG[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
}  // namespace detail

struct QuadResult {
  double value = 0.0;
  double abs_error = 0.0;
  long evaluations = 0;
};

// One (G7,K15) panel on [a,b]; err is the standard |K15-G7| estimate.
template <class F>
inline QuadResult gk15_panel(F&& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double k15 = 0.0, g7 = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double x = detail::kGK15X[i] * h;
    const double fv = i == 7 ? f(c) : f(c - x) + f(c + x);
    k15 += detail::kGK15WK[i] * fv;
    if (i % 2 == 1) g7 += detail::kGK15WG[i / 2] * fv;  // odd nodes = G7 rule
  }
  QuadResult r;
  r.value = k15 * h;
  r.abs_error = std::fabs(k15 - g7) * std::fabs(h);
  r.evaluations = 15;
  return r;
}

// Globally adaptive bisection; worst-interval-first.
template <class F>
inline QuadResult adaptive_gk(F&& f, double a, double b, double abs_tol = 1e-12,
                              double rel_tol = 1e-12, int max_panels = 4000) {
  struct Seg {
    double a, b, value, err;
  };
  auto panel = [&](double x0, double x1) {
    QuadResult p = gk15_panel(f, x0, x1);
    return Seg{x0, x1, p.value, p.abs_error};
  };
  std::vector<Seg> segs{panel(a, b)};
  long evals = 15;
  for (int it = 0; it < max_panels; ++it) {
    double total = 0.0, err = 0.0;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < segs.size(); ++i) {
      total += segs[i].value;
      err += segs[i].err;
      if (segs[i].err > segs[worst].err) worst = i;
    }
    if (err <= std::max(abs_tol, rel_tol * std::fabs(total)) ||
        segs[worst].err == 0.0)
      return {total, err, evals};
    Seg s = segs[worst];
    const double m = 0.5 * (s.a + s.b);
    if (m <= s.a || m >= s.b)  // interval exhausted at double resolution
      return {total, err, evals};
    segs[worst] = panel(s.a, m);
    segs.push_back(panel(m, s.b));
    evals += 30;
  }
  double total = 0.0, err = 0.0;
  for (const auto& s : segs) {
    total += s.value;
    err += s.err;
  }
  return {total, err, evals};
}

// integral_a^inf f, for integrands with (eventual) rapid decay: geometric
// blocks [a+L*(2^k-1), a+L*(2^{k+1}-1)] until a block is negligible.
template <class F>
inline QuadResult integrate_semi_infinite(F&& f, double a, double abs_tol = 1e-12,
                                          double rel_tol = 1e-12,
                                          double first_block = 1.0,
                                          int max_blocks = 200) {
  QuadResult total;
  double lo = a, len = first_block;
  int negligible = 0;
  for (int k = 0; k < max_blocks; ++k) {
    QuadResult blk =
        adaptive_gk(f, lo, lo + len, abs_tol * 0.25, rel_tol * 0.25);
    total.value += blk.value;
    total.abs_error += blk.abs_error;
    total.evaluations += blk.evaluations;
    const double cut = std::max(abs_tol, rel_tol * std::fabs(total.value));
    negligible = std::fabs(blk.value) < 0.25 * cut ? negligible + 1 : 0;
    if (negligible >= 2) return total;
    lo += len;
    len *= 2.0;
  }
  throw std::runtime_error("integrate_semi_infinite: no decay detected");
}

// Composite Simpson on uniform samples (3/8 rule patch when n is even).
inline double composite_simpson(std::span<const double> v, double dx) {
  const std::size_t n = v.size();
  if (n < 2) return 0.0;
  if (n == 2) return 0.5 * dx * (v[0] + v[1]);
  double s = 0.0;
  std::size_t last = n - 1;  // index of the final node of the Simpson part
  // If the interval count is odd, peel off a 3/8 panel at the end.
  if (last % 2 != 0) {
    s += dx * 3.0 / 8.0 * (v[n - 4] + 3 * v[n - 3] + 3 * v[n - 2] + v[n - 1]);
    last = n - 4;
  }
  for (std::size_t i = 0; i + 2 <= last; i += 2)
    s += dx / 3.0 * (v[i] + 4 * v[i + 1] + v[i + 2]);
  return s;
}

// Composite Simpson of f on [a,b], refining until two successive levels
// agree to tol (absolute, with a relative floor). Smooth integrands only.
template <class F>
inline double refined_simpson(F&& f, double a, double b, double tol = 1e-10) {
  if (!(b > a)) return 0.0;
  double prev = kNaN, cur = 0.0;
  for (std::size_t n = 129; n <= 66049; n = 2 * n - 1) {
    std::vector<double> v(n);
    const double dx = (b - a) / double(n - 1);
    for (std::size_t i = 0; i < n; ++i) v[i] = f(a + dx * double(i));
    cur = composite_simpson(v, dx);
    if (!std::isnan(prev) &&
        std::fabs(cur - prev) < tol * std::max(1.0, std::fabs(cur)))
      break;
    prev = cur;
  }
  return cur;
}

// Trapezoid over a sampled series with arbitrary node positions.
inline double trapezoid(std::span<const double> t, std::span<const double> f) {
  if (t.size() != f.size()) throw std::invalid_argument("trapezoid: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i)
    s += 0.5 * (t[i + 1] - t[i]) * (f[i] + f[i + 1]);
  return s;
}

namespace detail {
// One-sided 3-point derivative at block edges (uniform spacing h inside).
inline double fd3_forward(double f0, double f1, double f2, double h) {
  return (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h);
}
inline double fd3_backward(double f0, double f1, double f2, double h) {
  return (3.0 * f2 - 4.0 * f1 + f0) / (2.0 * h);
}
}  // namespace detail

// Trapezoid with Euler-Maclaurin endpoint corrections, applied per uniform
// cadence block. For piecewise-uniform sampling the composite-trapezoid error
// telescopes to -(h^2/12) f' jumps at block edges; correcting them upgrades
// the rule to O(h^4), which the recorded-series time integrals need.
inline double trapezoid_em(std::span<const double> t, std::span<const double> f) {
  const std::size_t n = t.size();
  double s = trapezoid(t, f);
  if (n < 3) return s;
  std::size_t i = 0;
  while (i + 1 < n) {
    const double h = t[i + 1] - t[i];
    std::size_t j = i + 1;  // extend block of (nearly) equal spacing
    while (j + 1 < n && std::fabs((t[j + 1] - t[j]) - h) < 1e-9 * std::fabs(h))
      ++j;
    if (j - i >= 2) {
      const double d_lo = detail::fd3_forward(f[i], f[i + 1], f[i + 2], h);
      const double d_hi = detail::fd3_backward(f[j - 2], f[j - 1], f[j], h);
      s -= h * h / 12.0 * (d_hi - d_lo);
    }
    i = j;
  }
  return s;
}

}  // namespace kpp
