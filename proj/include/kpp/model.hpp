#pragma once
// Model layer: admissible reaction nonlinearities F, front-like initial data
// h0, and the tilted field w(z,t) = h(z+2t,t) e^z. In the tilted frame the
// PDE h_t = h_xx + h - F(h) becomes w_t = w_zz - e^z F(w e^{-z}); the linear
// growth and the speed-2 drift are absorbed into the tilt.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kpp/interp.hpp"
#include "kpp/quadrature.hpp"
#include "kpp/util.hpp"

namespace kpp {

// Thrown when a readout is requested outside the computational window.
// Callers decide on a tail completion explicitly; nothing extrapolates.
struct window_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Reaction term F with F(0)=0, F(1)=1, F nondecreasing, F(h) < h on (0,1),
// F'(h) = O(h^p) near 0; G(h) = F(h)/h with G(0)=0, 0 <= G <= 1.
// Kind `zero` (F identically 0) is the linear comparison equation used by
// solver oracles; the saturation conditions do not apply to it.
class Nonlinearity {
 public:
  enum class Kind { quadratic, custom, zero };

  static Nonlinearity quadratic() {
    Nonlinearity n;
    n.kind_ = Kind::quadratic;
    n.p_ = 1.0;
    return n;
  }
  static Nonlinearity zero() {
    Nonlinearity n;
    n.kind_ = Kind::zero;
    n.p_ = 1.0;
    return n;
  }
  static Nonlinearity custom(std::function<double(double)> F,
                             std::function<double(double)> G, double p) {
    Nonlinearity n;
    n.kind_ = Kind::custom;
    n.F_ = std::move(F);
    n.G_ = std::move(G);
    n.p_ = p;
    n.validate();
    return n;
  }

  Kind kind() const { return kind_; }
  bool is_zero() const { return kind_ == Kind::zero; }
  double p() const { return p_; }

  double F(double h) const {
    switch (kind_) {
      case Kind::quadratic: return h * h;
      case Kind::zero: return 0.0;
      default: return F_(h);
    }
  }
  double G(double h) const {
    switch (kind_) {
      case Kind::quadratic: return h;
      case Kind::zero: return 0.0;
      default: return G_(h);
    }
  }

  // Sampled check of the admissibility conditions; throws on violation.
  void validate(int samples = 2048) const {
    if (kind_ == Kind::zero) return;
    if (F(0.0) != 0.0) throw std::invalid_argument("Nonlinearity: F(0) != 0");
    if (std::fabs(F(1.0) - 1.0) > 1e-12)
      throw std::invalid_argument("Nonlinearity: F(1) != 1");
    if (G(0.0) != 0.0) throw std::invalid_argument("Nonlinearity: G(0) != 0");
    double prev = 0.0;
    for (int i = 1; i <= samples; ++i) {
      const double h = double(i) / samples;
      const double f = F(h), g = G(h);
      if (f < prev - 1e-12)
        throw std::invalid_argument("Nonlinearity: F not nondecreasing");
      if (h < 1.0 && f >= h)
        throw std::invalid_argument("Nonlinearity: F(h) < h violated");
      if (g < -1e-12 || g > 1.0 + 1e-12)
        throw std::invalid_argument("Nonlinearity: G outside [0,1]");
      prev = f;
    }
    // F'(h) = O(h^p): the ratio F(h)/h^{1+p} should stay of one order of
    // magnitude across two decades near zero.
    const double r1 = F(1e-2) / std::pow(1e-2, 1.0 + p_);
    const double r2 = F(1e-4) / std::pow(1e-4, 1.0 + p_);
    if (r1 > 0.0 && (r2 / r1 > 30.0 || r2 / r1 < 1.0 / 30.0))
      throw std::invalid_argument("Nonlinearity: F'(h) != O(h^p) near 0");
  }

 private:
  Kind kind_ = Kind::quadratic;
  std::function<double(double)> F_, G_;
  double p_ = 1.0;
};

// Front-like initial data: h0 in [0,1], h0 -> 1 to the left. gamma() is the
// supremum of r with finite exponential moment; +inf for compact-support
// perturbations of the step.
class InitialCondition {
 public:
  enum class Kind { step, step_bump, exp_tail };

  static InitialCondition step() { return InitialCondition(Kind::step); }

  static InitialCondition exp_tail(double gamma0) {
    if (!(gamma0 > 1.0))
      throw std::invalid_argument("exp_tail: need gamma0 > 1");
    InitialCondition ic(Kind::exp_tail);
    ic.gamma0_ = gamma0;
    return ic;
  }

  // Bounded perturbation of the step, given as samples on [x_lo, x_hi]:
  // h0(x) = clamp(1_{x<0} + bump(x), 0, 1), bump = 0 outside the support.
  static InitialCondition step_bump(std::vector<double> samples, double x_lo,
                                    double x_hi) {
    if (samples.size() < 4 || !(x_hi > x_lo))
      throw std::invalid_argument("step_bump: need >= 4 samples, x_hi > x_lo");
    InitialCondition ic(Kind::step_bump);
    ic.bump_ = std::move(samples);
    ic.bump_lo_ = x_lo;
    ic.bump_hi_ = x_hi;
    for (double b : ic.bump_)
      if (!std::isfinite(b))
        throw std::invalid_argument("step_bump: non-finite sample");
    return ic;
  }

  Kind kind() const { return kind_; }
  double gamma() const { return kind_ == Kind::exp_tail ? gamma0_ : kInf; }
  double gamma0() const { return gamma0_; }
  double bump_lo() const { return bump_lo_; }
  double bump_hi() const { return bump_hi_; }
  const std::vector<double>& bump_samples() const { return bump_; }

  // Pointwise value; the step carries the half-value convention at its jump
  // so that sampled quadratures and the front position see the transition
  // centred at x = 0.
  double eval(double x) const {
    switch (kind_) {
      case Kind::step:
        return x < 0.0 ? 1.0 : (x > 0.0 ? 0.0 : 0.5);
      case Kind::exp_tail:
        return x <= 0.0 ? 1.0 : std::exp(-gamma0_ * x);
      case Kind::step_bump: {
        double v = x < 0.0 ? 1.0 : (x > 0.0 ? 0.0 : 0.5);
        v += bump(x);
        return std::clamp(v, 0.0, 1.0);
      }
    }
    return 0.0;
  }

  double bump(double x) const {
    if (kind_ != Kind::step_bump || x < bump_lo_ || x > bump_hi_) return 0.0;
    const double dx = (bump_hi_ - bump_lo_) / double(bump_.size() - 1);
    return cubic_interp_uniform(bump_, bump_lo_, dx, x);
  }

 private:
  explicit InitialCondition(Kind k) : kind_(k) {}
  Kind kind_;
  double gamma0_ = kInf;
  std::vector<double> bump_;
  double bump_lo_ = 0.0, bump_hi_ = 0.0;
};

// g(r,0) = integral h0(x) e^{rx} dx as a signed log value; +inf log_abs when
// the moment diverges (r >= gamma). Requires r > 0.
inline LogValue h0_moment(const InitialCondition& ic, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("h0_moment: need r > 0");
  switch (ic.kind()) {
    case InitialCondition::Kind::step:
      return LogValue::from(1.0 / r);
    case InitialCondition::Kind::exp_tail: {
      if (r >= ic.gamma0()) return LogValue{kInf, 1};
      return LogValue::from(1.0 / r + 1.0 / (ic.gamma0() - r));
    }
    case InitialCondition::Kind::step_bump: {
      // Step part analytic. The compact correction h0 - 1_{x<0} may jump at
      // x = 0 (bump(0) != 0), so integrate the two sides separately.
      auto left = [&](double x) {
        return (std::clamp(1.0 + ic.bump(x), 0.0, 1.0) - 1.0) * std::exp(r * x);
      };
      auto right = [&](double x) {
        return std::clamp(ic.bump(x), 0.0, 1.0) * std::exp(r * x);
      };
      double corr = 0.0;
      if (ic.bump_lo() < 0.0)
        corr += refined_simpson(left, ic.bump_lo(), std::min(0.0, ic.bump_hi()));
      if (ic.bump_hi() > 0.0)
        corr += refined_simpson(right, std::max(0.0, ic.bump_lo()), ic.bump_hi());
      return LogValue::from(1.0 / r + corr);
    }
  }
  return LogValue::zero();
}

// The moving-frame field w on a uniform grid z_lo + i*dz, i = 0..n-1.
// Far left w = e^{z} (h = 1); far right w decays to 0. The left boundary
// node is held at its initial value by the solver.
struct TiltedField {
  double t = 0.0;
  double z_lo = 0.0;
  double dz = 0.0;
  std::vector<double> w;
  std::vector<double> exp_mz;  // cached e^{-z_i}, rebuilt on regrid

  std::size_t size() const { return w.size(); }
  double z(std::size_t i) const { return z_lo + dz * double(i); }
  double z_hi() const { return z(size() - 1); }
  double h(std::size_t i) const { return w[i] * exp_mz[i]; }

  void rebuild_exp_cache() {
    exp_mz.resize(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) exp_mz[i] = std::exp(-z(i));
  }

  double max_w() const {
    double m = 0.0;
    for (double x : w) m = std::max(m, x);
    return m;
  }
};

// Samples h0 onto the tilted grid. Throws if the window cannot contain the
// transition region of h0 (step at 0, bump support, or the exponential tail
// not yet decayed at the right edge).
inline TiltedField tilt(const InitialCondition& ic, double z_lo, double z_hi,
                        double dz) {
  if (!(dz > 0.0) || !(z_hi > z_lo)) throw std::invalid_argument("tilt: bad grid");
  if (z_lo > -30.0)
    throw window_error("tilt: z_lo must be <= -30 so the h=1 plateau is resolved");
  double need_hi = 10.0;
  if (ic.kind() == InitialCondition::Kind::step_bump)
    need_hi = std::max(need_hi, ic.bump_hi() + 5.0);
  if (ic.kind() == InitialCondition::Kind::exp_tail)
    need_hi = std::max(need_hi, 30.0 / (ic.gamma0() - 1.0));
  if (z_hi < need_hi)
    throw window_error("tilt: window too narrow for the transition of h0");

  TiltedField f;
  f.t = 0.0;
  f.z_lo = z_lo;
  f.dz = dz;
  const std::size_t n = std::size_t(std::llround((z_hi - z_lo) / dz)) + 1;
  f.w.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = f.z(i);
    f.w[i] = ic.eval(z) * std::exp(z);
  }
  // Sampling the step against smooth test functions carries an
  // Euler-Maclaurin defect (dz^2/12)(phi(0) + phi'(0)). Lowering the jump
  // node by dz/12 cancels the monopole part; the dipole part cannot be
  // cancelled by any sampling that keeps h0 in [0,1] (the step saturates
  // both bounds) and stays as an O(dz^2) term in the solution's far tail.
  if (ic.kind() == InitialCondition::Kind::step) {
    const double i_jump = -z_lo / dz;
    const auto i0 = std::size_t(std::llround(i_jump));
    if (i0 < n && std::fabs(i_jump - double(i0)) < 1e-9)
      f.w[i0] = 0.5 - dz / 12.0;
  }
  f.rebuild_exp_cache();
  return f;
}

// h(x,t) read back from the tilted field; clamped to [0,1]. Outside the
// window this throws window_error rather than extrapolating.
inline double untilt_h(const TiltedField& f, double x) {
  const double z = x - 2.0 * f.t;
  if (z < f.z_lo - 1e-12 || z > f.z_hi() + 1e-12)
    throw window_error("untilt_h: x outside the computational window");
  const double wv = cubic_interp_uniform(f.w, f.z_lo, f.dz, z);
  return std::clamp(wv * std::exp(-z), 0.0, 1.0);
}

}  // namespace kpp
