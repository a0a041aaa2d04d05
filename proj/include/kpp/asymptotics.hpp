#pragma once
// Special-function layer and the small-eps expansion machinery: Gamma and
// its derivative, the incomplete-gamma-type integrals
//   A_{alpha,beta}(eps) = integral_1^inf e^{-eps^2 t} t^{-(alpha+beta eps)} dt
// with their singular parts, the front-position expansion
//   mu_t = 2t - (3/2) log t + a + b/sqrt(t) + c (log t)/t
// and its least-squares fitter, and the expansion of the large-deviation
// prefactor Phi(2+eps) near the critical velocity.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "kpp/quadrature.hpp"
#include "kpp/util.hpp"

namespace kpp {

// Lanczos approximation (g = 7, 9 terms), relative error ~1e-14 on the real
// axis away from poles; reflection formula for x < 1/2.
inline double gamma_fn(double x) {
  static const double kCoef[9] = {
      0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
      771.32342877765313,      -176.61502916214059,   12.507343278686905,
      -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};
  if (x == std::floor(x) && x <= 0.0)
    throw std::domain_error("gamma_fn: pole at nonpositive integer");
  if (x < 0.5) return kPi / (std::sin(kPi * x) * gamma_fn(1.0 - x));
  x -= 1.0;
  double a = kCoef[0];
  for (int i = 1; i < 9; ++i) a += kCoef[i] / (x + double(i));
  const double t = x + 7.5;
  return std::sqrt(2.0 * kPi) * std::pow(t, x + 0.5) * std::exp(-t) * a;
}

// Digamma via the recurrence to x >= 10 plus the Bernoulli asymptotic
// series; reflection for x < 0.
inline double digamma(double x) {
  if (x == std::floor(x) && x <= 0.0)
    throw std::domain_error("digamma: pole at nonpositive integer");
  if (x < 0.0) return digamma(1.0 - x) - kPi / std::tan(kPi * x);
  double res = 0.0;
  while (x < 10.0) {
    res -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x, inv2 = inv * inv;
  double series = std::log(x) - 0.5 * inv;
  series -= inv2 * (1.0 / 12 + inv2 * (-1.0 / 120 + inv2 * (1.0 / 252 +
            inv2 * (-1.0 / 240 + inv2 * (1.0 / 132 +
            inv2 * (-691.0 / 32760 + inv2 * (1.0 / 12)))))));
  return res + series;
}

inline std::pair<double, double> gamma_and_derivative(double x) {
  const double g = gamma_fn(x);
  return {g, g * digamma(x)};
}

namespace detail {
inline void check_lemma42_args(double alpha, double beta, double eps) {
  if (!(std::fabs(eps) < 0.5))
    throw std::invalid_argument("lemma42: need |eps| < 0.5");
  (void)alpha;
  (void)beta;
}
}  // namespace detail

// The integral A_{alpha,beta}(eps) (log-t variant on request) by adaptive
// quadrature, split at t = 1/eps^2 where the exponential takes over from the
// power law. This is the oracle side; eps = 0 is allowed when alpha > 1.
inline double lemma42_integral(double alpha, double beta, double eps,
                               bool with_log = false) {
  detail::check_lemma42_args(alpha, beta, eps);
  if (eps == 0.0) {
    if (!(alpha > 1.0))
      throw std::invalid_argument("lemma42_integral: eps = 0 needs alpha > 1");
    const double d = alpha - 1.0;
    return with_log ? 1.0 / (d * d) : 1.0 / d;
  }
  const double s = alpha + beta * eps;
  const double e2 = eps * eps;
  auto f = [=](double t) {
    const double v = std::exp(-e2 * t - s * std::log(t));
    return with_log ? v * std::log(t) : v;
  };
  const double split = std::max(2.0, 1.0 / e2);
  double total = adaptive_gk(f, 1.0, split, 1e-13, 1e-13).value;
  total += integrate_semi_infinite(f, split, 1e-14, 1e-13).value;
  return total;
}

// The singular (non-analytic in eps) part of A_{alpha,beta}:
//   |eps|^{2 alpha - 2 + 2 beta eps} Gamma(1 - alpha - beta eps)
// plus 1/(beta eps) when alpha = 1; the log-t variant replaces the Gamma
// factor by [-2 log|eps| Gamma(.) + Gamma'(.)] and the pole by 1/(beta eps)^2.
// Undefined when 1 - alpha - beta eps hits a Gamma pole with no beta to
// move it (alpha a positive integer and beta = 0).
inline double lemma42_singular(double alpha, double beta, double eps,
                               bool with_log = false) {
  detail::check_lemma42_args(alpha, beta, eps);
  if (eps == 0.0)
    throw std::invalid_argument("lemma42_singular: eps must be nonzero");
  if (beta == 0.0 && alpha == std::floor(alpha) && alpha >= 1.0)
    throw std::invalid_argument(
        "lemma42_singular: alpha in {1,2,...} with beta = 0 not admissible");
  const double arg = 1.0 - alpha - beta * eps;
  const double ae = std::fabs(eps);
  const double pw = std::exp((2.0 * alpha - 2.0 + 2.0 * beta * eps) *
                             std::log(ae));
  double out;
  if (!with_log) {
    out = pw * gamma_fn(arg);
    if (alpha == 1.0) out += 1.0 / (beta * eps);
  } else {
    const auto [g, gp] = gamma_and_derivative(arg);
    out = pw * (-2.0 * std::log(ae) * g + gp);
    if (alpha == 1.0) out += 1.0 / (beta * eps * beta * eps);
  }
  return out;
}

// Exponent pair of one A_{alpha,beta} term, bundled with its evaluators.
struct SingularPart {
  double alpha = 0.0;
  double beta = 0.0;

  SingularPart(double a, double b) : alpha(a), beta(b) {
    if (beta == 0.0 && alpha == std::floor(alpha) && alpha >= 1.0)
      throw std::invalid_argument(
          "SingularPart: alpha in {1,2,...} needs beta != 0");
  }
  double integral(double eps, bool with_log = false) const {
    return lemma42_integral(alpha, beta, eps, with_log);
  }
  double singular(double eps, bool with_log = false) const {
    return lemma42_singular(alpha, beta, eps, with_log);
  }
  double analytic_remainder(double eps, bool with_log = false) const {
    return integral(eps, with_log) - singular(eps, with_log);
  }
};

// Coefficients of the front-position expansion. The closed-form values
// b = (3/2) Gamma(-1/2) = -3 sqrt(pi) and c = (9/8)(5 - 6 log 2) are always
// computed from primitives.
struct ExpansionCoefficients {
  enum class Provenance { paper_default, fitted };
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = kNaN;  // optional 1/t coefficient when fitted with that basis
  double e = kNaN;  // optional t^{-3/2} coefficient
  double f = kNaN;  // optional (log t) t^{-3/2} coefficient
  Provenance provenance = Provenance::paper_default;
  std::vector<double> cov;  // row-major covariance of the fitted coefficients
  double residual_rms = 0.0;

  static double default_b() { return -3.0 * std::sqrt(kPi); }
  static double default_c() { return 9.0 / 8.0 * (5.0 - 6.0 * std::log(2.0)); }
  static ExpansionCoefficients paper_default(double a = 0.0) {
    ExpansionCoefficients ec;
    ec.a = a;
    ec.b = default_b();
    ec.c = default_c();
    return ec;
  }
};

inline double mu_expansion(double t, const ExpansionCoefficients& ec) {
  if (!(t >= 3.0)) throw std::invalid_argument("mu_expansion: need t >= 3");
  return 2.0 * t - 1.5 * std::log(t) + ec.a + ec.b / std::sqrt(t) +
         ec.c * std::log(t) / t;
}

// Least squares of mu_t - 2t + (3/2) log t against {1, t^{-1/2}, (log t)/t}
// and optionally {1/t} and the next-order pair {t^{-3/2}, (log t) t^{-3/2}}.
// Weights 1/t make geometric sampling effectively uniform in log t so late
// times do not dominate; togglable.
//
// The optional terms are there for bias control, not because their
// coefficients are wanted: on any window reachable by t_max ~ 2000 the tail
// basis functions are nearly collinear, and a genuine O(1/t) remainder with
// a coefficient of order 10 leaks into b and c when not modelled (b off by
// ~25%, c by several times itself).  Each added pair soaks up one more order
// and leaves (a, b, c) clean.
inline ExpansionCoefficients fit_mu(std::span<const double> t,
                                    std::span<const double> mu, double t_min,
                                    bool include_inv_t = false,
                                    bool log_t_weights = true,
                                    bool include_t32 = false) {
  if (t.size() != mu.size())
    throw std::invalid_argument("fit_mu: series length mismatch");
  if (!(t_min >= 50.0)) throw std::invalid_argument("fit_mu: need t_min >= 50");
  if (include_t32 && !include_inv_t)
    throw std::invalid_argument("fit_mu: t^{-3/2} terms require the 1/t term");
  double t_max = 0.0;
  for (double tk : t) t_max = std::max(t_max, tk);
  if (!(t_max >= 20.0 * t_min))
    throw std::invalid_argument("fit_mu: need t_max >= 20 t_min");

  const std::size_t k = 3 + (include_inv_t ? 1 : 0) + (include_t32 ? 2 : 0);
  std::vector<double> X, y, w;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double tk = t[i];
    if (tk < t_min) continue;
    X.push_back(1.0);
    X.push_back(1.0 / std::sqrt(tk));
    X.push_back(std::log(tk) / tk);
    if (include_inv_t) X.push_back(1.0 / tk);
    if (include_t32) {
      const double t32 = 1.0 / (tk * std::sqrt(tk));
      X.push_back(t32);
      X.push_back(std::log(tk) * t32);
    }
    y.push_back(mu[i] - 2.0 * tk + 1.5 * std::log(tk));
    w.push_back(log_t_weights ? 1.0 / tk : 1.0);
  }
  if (y.size() < k + 4)
    throw std::invalid_argument("fit_mu: too few samples above t_min");
  const auto fit = least_squares(X, y, w, k);

  ExpansionCoefficients ec;
  ec.a = fit.coeff[0];
  ec.b = fit.coeff[1];
  ec.c = fit.coeff[2];
  if (include_inv_t) ec.d = fit.coeff[3];
  if (include_t32) {
    ec.e = fit.coeff[4];
    ec.f = fit.coeff[5];
  }
  ec.provenance = ExpansionCoefficients::Provenance::fitted;
  ec.cov = fit.cov;
  ec.residual_rms = fit.rms;
  return ec;
}

namespace detail {
// Shared bracket of the I(eps) expansion with the absolute value
// substitutable: abs_eps = |eps| gives I_singular, abs_eps = -eps gives the
// continuation that is smooth for eps < 0.
inline double i_singular_bracket(double eps, double abs_eps,
                                 const ExpansionCoefficients& ec) {
  static const double gm12 = gamma_fn(-0.5);
  static const double gpm12 = gamma_and_derivative(-0.5).second;
  static const double gm32 = gamma_fn(-1.5);
  const double la = std::log(std::fabs(eps));
  const double a3 = abs_eps * abs_eps * abs_eps;
  return gm12 * abs_eps + (2.0 * ec.b / 3.0) * eps +
         ec.b * (kEulerGamma - 1.0 / 3.0) * eps * eps -
         1.5 * gpm12 * eps * abs_eps - 2.0 * ec.c * gm32 * a3 * la;
}
inline double i_singular_prefactor(double eps,
                                   const ExpansionCoefficients& ec) {
  return std::exp((1.0 + eps) * ec.a + 3.0 * eps * std::log(std::fabs(eps)));
}
}  // namespace detail

// Singular content of I(eps) = integral_1^inf e^{-eps^2 t + (1+eps)(mu_t-2t)} dt:
//   e^{(1+eps)a} |eps|^{3 eps} [ Gamma(-1/2)|eps| + (2b/3) eps
//     + b(gamma_E - 1/3) eps^2 - (3/2) Gamma'(-1/2) eps |eps|
//     - 2 c Gamma(-3/2) |eps|^3 log|eps| ].
// With the default b the |eps| and eps leading terms cancel for eps < 0, and
// with the default c the eps^3 log|eps| terms cancel there too, so the
// function is smooth on the negative side and kinked on the positive side.
inline double I_singular(double eps, const ExpansionCoefficients& ec) {
  if (!(eps != 0.0 && std::fabs(eps) < 0.3))
    throw std::invalid_argument("I_singular: need 0 < |eps| < 0.3");
  return detail::i_singular_prefactor(eps, ec) *
         detail::i_singular_bracket(eps, std::fabs(eps), ec);
}

// The continuation of I_singular smooth at eps = 0 (|eps| replaced by -eps).
inline double I_singular_smooth(double eps, const ExpansionCoefficients& ec) {
  if (!(eps != 0.0 && std::fabs(eps) < 0.3))
    throw std::invalid_argument("I_singular_smooth: need 0 < |eps| < 0.3");
  return detail::i_singular_prefactor(eps, ec) *
         detail::i_singular_bracket(eps, -eps, ec);
}

// For eps > 0, I_singular minus its smooth continuation reduces to the
// kinked bracket e^{(1+eps)a} eps^{3 eps} [ 2 Gamma(-1/2) eps
//   - 3 Gamma'(-1/2) eps^2 - 4 c Gamma(-3/2) eps^3 log eps ].
inline double I_singular_kink(double eps, const ExpansionCoefficients& ec) {
  if (!(eps > 0.0 && eps < 0.3))
    throw std::invalid_argument("I_singular_kink: need 0 < eps < 0.3");
  static const double gm12 = gamma_fn(-0.5);
  static const double gpm12 = gamma_and_derivative(-0.5).second;
  static const double gm32 = gamma_fn(-1.5);
  const double le = std::log(eps);
  return detail::i_singular_prefactor(eps, ec) *
         (2.0 * gm12 * eps - 3.0 * gpm12 * eps * eps -
          4.0 * ec.c * gm32 * eps * eps * eps * le);
}

// Phi(2+eps) through O(eps^3), the main expansion:
//   sqrt(pi) (alpha - (beta/2) eps) [ 2 eps + 3 eps^2 log eps
//     - 3 (1 - gamma_E/2) eps^2 + (9/4) eps^3 log^2 eps
//     + (3/4)(3 gamma_E - 6 log 2 - 1) eps^3 log eps ].
// with_eps3_logs = false drops the two eps^3 log terms (used to show they
// are load-bearing).
inline double main_expansion(double eps, double alpha, double beta,
                             bool with_eps3_logs = true) {
  if (!(eps > 0.0 && eps < 0.5))
    throw std::invalid_argument("main_expansion: need 0 < eps < 0.5");
  const double le = std::log(eps);
  double bracket = 2.0 * eps + 3.0 * eps * eps * le -
                   3.0 * (1.0 - kEulerGamma / 2.0) * eps * eps;
  if (with_eps3_logs) {
    bracket += 2.25 * eps * eps * eps * le * le +
               0.75 * (3.0 * kEulerGamma - 6.0 * std::log(2.0) - 1.0) *
                   eps * eps * eps * le;
  }
  return std::sqrt(kPi) * (alpha - 0.5 * beta * eps) * bracket;
}

// The same result in the C(rho) normalisation, C(1+eps) =
// (1+eps) Phi(2+2eps) / (2 sqrt(pi)):
//   (alpha - beta eps)[ 2 eps + 6 eps^2 log eps + (3 gamma_E + 6 log 2 - 4)
//     eps^2 + 9 eps^3 log^2 eps + 3 (3 gamma_E + 1) eps^3 log eps ].
inline double c_form(double eps, double alpha, double beta) {
  if (!(eps > 0.0 && eps < 0.25))
    throw std::invalid_argument("c_form: need 0 < eps < 0.25");
  const double le = std::log(eps);
  const double e2 = eps * eps, e3 = e2 * eps;
  return (alpha - beta * eps) *
         (2.0 * eps + 6.0 * e2 * le +
          (3.0 * kEulerGamma + 6.0 * std::log(2.0) - 4.0) * e2 +
          9.0 * e3 * le * le + 3.0 * (3.0 * kEulerGamma + 1.0) * e3 * le);
}

}  // namespace kpp
