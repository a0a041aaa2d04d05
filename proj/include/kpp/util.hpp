#pragma once
// Shared numeric utilities: signed log-space values, stable log-sum-exp,
// seed derivation, and the small dense least-squares solver used by the
// handful of fits in the library (front-position expansion, wave tail).

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace kpp {

inline constexpr double kPi = 3.14159265358979323846;
// Euler-Mascheroni constant, 17 significant digits.
inline constexpr double kEulerGamma = 0.57721566490153286;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// A real number carried as (log|x|, sign). Exponentials like e^{(1+r^2)t}
// overflow doubles near t ~ 350, so every exponentially scaled quantity
// travels in this form until the final O(1) combination.
struct LogValue {
  double log_abs = kNegInf;
  int sign = 0;  // -1, 0, +1

  static LogValue zero() { return {}; }
  static LogValue from(double x) {
    if (x == 0.0 || std::isnan(x)) return {x == 0.0 ? kNegInf : kNaN, 0};
    return {std::log(std::fabs(x)), x > 0 ? 1 : -1};
  }
  static LogValue from_log(double lg, int s = 1) {
    return {lg, lg == kNegInf ? 0 : s};
  }

  bool is_zero() const { return sign == 0; }
  double value() const { return sign == 0 ? 0.0 : sign * std::exp(log_abs); }

  LogValue operator*(const LogValue& o) const {
    if (sign == 0 || o.sign == 0) return {};
    return {log_abs + o.log_abs, sign * o.sign};
  }
  LogValue operator/(const LogValue& o) const {
    if (o.sign == 0) throw std::domain_error("LogValue: division by zero");
    if (sign == 0) return {};
    return {log_abs - o.log_abs, sign * o.sign};
  }
  LogValue operator-() const { return {log_abs, -sign}; }

  // |this + o| via the larger magnitude; exact cancellation yields zero().
  LogValue operator+(const LogValue& o) const {
    if (sign == 0) return o;
    if (o.sign == 0) return *this;
    const LogValue& big = log_abs >= o.log_abs ? *this : o;
    const LogValue& small = log_abs >= o.log_abs ? o : *this;
    const double r = std::exp(small.log_abs - big.log_abs);  // in [0, 1]
    const double m = 1.0 + (big.sign == small.sign ? r : -r);
    if (m <= 0.0) return {};  // cancellation at or below log precision
    return {big.log_abs + std::log(m), big.sign};
  }
  LogValue operator-(const LogValue& o) const { return *this + (-o); }
};

// log(sum_i exp(logs[i])) for arbitrary magnitudes; -inf entries are skipped.
inline double log_sum_exp(std::span<const double> logs) {
  double mx = kNegInf;
  for (double v : logs) mx = std::max(mx, v);
  if (mx == kNegInf) return kNegInf;
  double s = 0.0;
  for (double v : logs)
    if (v != kNegInf) s += std::exp(v - mx);
  return mx + std::log(s);
}

// Streaming variant: terms more than `drop` below the running max are ignored
// (their total relative contribution is < n * exp(-drop)).
class LogSumAccumulator {
 public:
  explicit LogSumAccumulator(double drop = 60.0) : drop_(drop) {}
  void add_log(double lg) {
    if (lg == kNegInf) return;
    if (lg > mx_) {
      if (mx_ != kNegInf && lg - mx_ < drop_) s_ = s_ * std::exp(mx_ - lg) + 1.0;
      else s_ = 1.0;
      mx_ = lg;
    } else if (lg - mx_ > -drop_) {
      s_ += std::exp(lg - mx_);
    }
  }
  double log_total() const { return mx_ == kNegInf ? kNegInf : mx_ + std::log(s_); }

 private:
  double drop_, mx_ = kNegInf, s_ = 0.0;
};

// SplitMix64; used to derive independent per-task RNG seeds from one run seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

struct LeastSquaresFit {
  std::vector<double> coeff;
  std::vector<double> cov;       // k*k, row-major; sigma^2 (X'WX)^{-1}
  std::vector<double> residual;  // per-point, unweighted
  double rms = 0.0;              // weighted RMS residual
};

// Weighted linear least squares via normal equations with column scaling.
// X is row-major n x k. Small k only (<= 8); throws on rank deficiency.
inline LeastSquaresFit least_squares(std::span<const double> X,
                                     std::span<const double> y,
                                     std::span<const double> w, std::size_t k) {
  const std::size_t n = y.size();
  if (k == 0 || n < k || X.size() != n * k || (!w.empty() && w.size() != n))
    throw std::invalid_argument("least_squares: bad shapes");

  std::vector<double> scale(k, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j)
      scale[j] = std::max(scale[j], std::fabs(X[i * k + j]));
  for (auto& s : scale)
    if (s == 0.0) s = 1.0;

  std::vector<double> A(k * k, 0.0), b(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    for (std::size_t p = 0; p < k; ++p) {
      const double xp = X[i * k + p] / scale[p];
      b[p] += wi * xp * y[i];
      for (std::size_t q = p; q < k; ++q)
        A[p * k + q] += wi * xp * (X[i * k + q] / scale[q]);
    }
  }
  for (std::size_t p = 0; p < k; ++p)
    for (std::size_t q = 0; q < p; ++q) A[p * k + q] = A[q * k + p];

  // Gauss-Jordan with partial pivoting; also produces the inverse for cov.
  std::vector<double> inv(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i) inv[i * k + i] = 1.0;
  std::vector<double> M = A;
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < k; ++r)
      if (std::fabs(M[r * k + col]) > std::fabs(M[piv * k + col])) piv = r;
    if (std::fabs(M[piv * k + col]) < 1e-14)
      throw std::runtime_error("least_squares: singular normal matrix");
    if (piv != col)
      for (std::size_t j = 0; j < k; ++j) {
        std::swap(M[piv * k + j], M[col * k + j]);
        std::swap(inv[piv * k + j], inv[col * k + j]);
      }
    const double d = M[col * k + col];
    for (std::size_t j = 0; j < k; ++j) {
      M[col * k + j] /= d;
      inv[col * k + j] /= d;
    }
    for (std::size_t r = 0; r < k; ++r) {
      if (r == col) continue;
      const double f = M[r * k + col];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < k; ++j) {
        M[r * k + j] -= f * M[col * k + j];
        inv[r * k + j] -= f * inv[col * k + j];
      }
    }
  }

  LeastSquaresFit fit;
  fit.coeff.assign(k, 0.0);
  for (std::size_t p = 0; p < k; ++p) {
    double c = 0.0;
    for (std::size_t q = 0; q < k; ++q) c += inv[p * k + q] * b[q];
    fit.coeff[p] = c / scale[p];
  }

  fit.residual.assign(n, 0.0);
  double wss = 0.0, wtot = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double pred = 0.0;
    for (std::size_t j = 0; j < k; ++j) pred += X[i * k + j] * fit.coeff[j];
    fit.residual[i] = y[i] - pred;
    const double wi = w.empty() ? 1.0 : w[i];
    wss += wi * fit.residual[i] * fit.residual[i];
    wtot += wi;
  }
  fit.rms = std::sqrt(wss / std::max(wtot, 1e-300));

  const double dof = static_cast<double>(n > k ? n - k : 1);
  const double sigma2 = wss / dof;
  fit.cov.assign(k * k, 0.0);
  for (std::size_t p = 0; p < k; ++p)
    for (std::size_t q = 0; q < k; ++q)
      fit.cov[p * k + q] = sigma2 * inv[p * k + q] / (scale[p] * scale[q]);
  return fit;
}

}  // namespace kpp
