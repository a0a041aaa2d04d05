#pragma once
// Interpolation kernels: 4-point Lagrange on uniform grids and
// shape-preserving (Fritsch-Carlson family) cubics with root finding,
// used for front localisation h = 1/2 and snapshot readouts.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>

namespace kpp {

// Cubic Lagrange interpolation at x on the uniform grid x0 + i*dx.
// Near the ends it degrades gracefully to the one-sided 4-point stencil.
inline double cubic_interp_uniform(std::span<const double> v, double x0,
                                   double dx, double x) {
  const std::size_t n = v.size();
  if (n < 2) throw std::invalid_argument("cubic_interp_uniform: need >= 2 nodes");
  if (n < 4) {  // fall back to linear
    double u = std::clamp((x - x0) / dx, 0.0, double(n - 1));
    std::size_t j = std::min<std::size_t>(std::size_t(u), n - 2);
    double t = u - double(j);
    return v[j] * (1.0 - t) + v[j + 1] * t;
  }
  double u = (x - x0) / dx;
  // stencil start: nodes [j, j+3] with x ideally between j+1 and j+2
  long j = long(std::floor(u)) - 1;
  j = std::clamp(j, 0l, long(n) - 4);
  const double t = u - double(j);  // in node units relative to stencil start
  const double w0 = -(t - 1) * (t - 2) * (t - 3) / 6.0;
  const double w1 = t * (t - 2) * (t - 3) / 2.0;
  const double w2 = -t * (t - 1) * (t - 3) / 2.0;
  const double w3 = t * (t - 1) * (t - 2) / 6.0;
  return w0 * v[j] + w1 * v[j + 1] + w2 * v[j + 2] + w3 * v[j + 3];
}

// Shape-preserving slope at an interior node from the two one-sided
// differences (weighted harmonic mean; zero across local extrema). The
// resulting Hermite segment is monotone wherever the data are.
inline double monotone_slope(double d_left, double d_right) {
  if (d_left * d_right <= 0.0) return 0.0;
  return 2.0 * d_left * d_right / (d_left + d_right);
}

// Value of the cubic Hermite segment with endpoint values y0,y1 and slopes
// m0,m1 on [x0, x0+dx], evaluated at parameter u in [0,1].
inline double hermite_eval(double y0, double y1, double m0, double m1,
                           double dx, double u) {
  const double u2 = u * u, u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * dx * m0 +
         (-2 * u3 + 3 * u2) * y1 + (u3 - u2) * dx * m1;
}

// Root of hermite(u) = target on a segment known to be monotone.
// Bisection with Newton acceleration; returns parameter u in [0,1].
inline double hermite_root(double y0, double y1, double m0, double m1,
                           double dx, double target) {
  if ((y0 - target) * (y1 - target) > 0.0)
    throw std::invalid_argument("hermite_root: target not bracketed");
  double lo = 0.0, hi = 1.0, u = 0.5;
  for (int it = 0; it < 100; ++it) {
    const double f = hermite_eval(y0, y1, m0, m1, dx, u) - target;
    if (f == 0.0) break;
    const bool rising = y1 > y0;
    if ((f > 0.0) == rising) hi = u; else lo = u;
    const double u2 = u * u;
    const double df = (6 * u2 - 6 * u) * y0 + (3 * u2 - 4 * u + 1) * dx * m0 +
                      (-6 * u2 + 6 * u) * y1 + (3 * u2 - 2 * u) * dx * m1;
    double un = df != 0.0 ? u - f / df : 0.5 * (lo + hi);
    if (!(un > lo && un < hi)) un = 0.5 * (lo + hi);
    if (std::fabs(un - u) < 1e-15) { u = un; break; }
    u = un;
  }
  return std::clamp(u, 0.0, 1.0);
}

}  // namespace kpp
