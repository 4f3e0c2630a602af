#pragma once

// Scaled arithmetic for products that span hundreds of orders of magnitude.

#include <complex>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace rigidlab {

using cplx = std::complex<double>;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Log-magnitudes carry 64 mantissa bits on x86-64 so that exp() of a
// magnitude near e^600 still round-trips to ~1e-16 relative.
using logmag_t = long double;
inline constexpr logmag_t kLogZero = -std::numeric_limits<logmag_t>::infinity();

/// Wraps an angle into (-pi, pi].
double wrap_phase(double phase);

/// Complex number stored as natural log of its modulus plus a phase.
/// Zero is log_mag == -inf (phase 0).
struct LogComplex {
  logmag_t log_mag = kLogZero;
  double phase = 0.0;

  static LogComplex zero() { return {}; }
  static LogComplex one() { return {0.0, 0.0}; }
  static LogComplex from(cplx z);

  bool is_zero() const { return log_mag == kLogZero; }
  cplx to_complex() const;
  LogComplex conj() const { return {log_mag, is_zero() ? 0.0 : wrap_phase(-phase)}; }

  friend LogComplex operator*(const LogComplex& a, const LogComplex& b);
  friend LogComplex operator/(const LogComplex& a, const LogComplex& b);
  friend LogComplex operator+(const LogComplex& a, const LogComplex& b);
  friend LogComplex operator-(const LogComplex& a, const LogComplex& b);
  LogComplex operator-() const;
};

/// Signed real stored as log|x| and sign in {-1, 0, +1}.
struct LogReal {
  logmag_t log_mag = kLogZero;
  int sign = 0;

  static LogReal zero() { return {}; }
  static LogReal one() { return {0.0, 1}; }
  static LogReal from(double x);
  static LogReal from_log(logmag_t log_value) {
    return log_value == kLogZero ? LogReal{} : LogReal{log_value, 1};
  }

  bool is_zero() const { return sign == 0; }
  double to_double() const;
  /// log|x| as a double (-inf for zero).
  double log() const { return static_cast<double>(log_mag); }

  friend LogReal operator*(const LogReal& a, const LogReal& b);
  friend LogReal operator/(const LogReal& a, const LogReal& b);
  friend LogReal operator+(const LogReal& a, const LogReal& b);
  friend LogReal operator-(const LogReal& a, const LogReal& b);
  LogReal operator-() const { return {log_mag, -sign}; }
};

/// Complex mantissa with a separate binary exponent: value = mant * 2^exp.
/// Cheaper than LogComplex for long accumulation loops (no transcendental
/// calls per operation). The mantissa is kept with max(|re|,|im|) in [0.5, 1).
struct ExtComplex {
  cplx mant{0.0, 0.0};
  std::int64_t exp = 0;

  static ExtComplex from(cplx z);
  static ExtComplex from(const LogComplex& z);
  bool is_zero() const { return mant == cplx(0.0, 0.0); }
  LogComplex to_log() const;
  cplx to_complex() const;
  double log_abs() const;

  ExtComplex& operator+=(const ExtComplex& other);
  ExtComplex& operator*=(cplx factor);
  ExtComplex& operator*=(const ExtComplex& other);
  friend ExtComplex operator*(ExtComplex a, const ExtComplex& b) { return a *= b; }
  friend ExtComplex operator+(ExtComplex a, const ExtComplex& b) { return a += b; }

 private:
  void normalize();
};

/// Open disk centred at the origin. Points with |z| == radius are outside.
struct DiskDomain {
  double radius = 1.0;

  explicit DiskDomain(double r = 1.0);
  bool contains(cplx z) const { return std::abs(z) < radius; }
};

/// log prod_{i<j} |p_i - p_j|^2. Coincident points give LogReal::zero().
LogReal vandermonde_sq_log(std::span<const cplx> points);

/// log prod_{i,j} |alpha_i - beta_j|^2.
LogReal cross_product_log(std::span<const cplx> alpha, std::span<const cplx> beta);

/// log(C(n,k) * k!) = log(n! / (n-k)!). Throws DomainError unless 0 <= k <= n.
double log_binom_factorial(int n, int k);

/// Log-sum-exp of a list of log-values; -inf entries are ignored.
double log_sum_exp(std::span<const double> logs);

}  // namespace rigidlab
