#include "rigidlab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rigidlab/errors.hpp"

namespace rigidlab {

namespace {

constexpr long double kLn2 = 0.693147180559945309417232121458176568L;

// Products of squared distances are folded into a log once they leave this
// band, so the running double never overflows.
constexpr double kFoldHigh = 1e150;
constexpr double kFoldLow = 1e-150;

}  // namespace

double wrap_phase(double phase) {
  double w = std::remainder(phase, 2.0 * std::numbers::pi);
  if (w <= -std::numbers::pi) w = std::numbers::pi;
  return w;
}

// ---------------------------------------------------------------- LogComplex

LogComplex LogComplex::from(cplx z) {
  if (z == cplx(0.0, 0.0)) return zero();
  const long double mag = std::hypot(static_cast<long double>(z.real()),
                                     static_cast<long double>(z.imag()));
  return {std::log(mag), wrap_phase(std::arg(z))};
}

cplx LogComplex::to_complex() const {
  if (is_zero()) return {0.0, 0.0};
  const double mag = static_cast<double>(std::exp(log_mag));
  return std::polar(mag, phase);
}

LogComplex operator*(const LogComplex& a, const LogComplex& b) {
  if (a.is_zero() || b.is_zero()) return LogComplex::zero();
  return {a.log_mag + b.log_mag, wrap_phase(a.phase + b.phase)};
}

LogComplex operator/(const LogComplex& a, const LogComplex& b) {
  if (b.is_zero()) throw DomainError("LogComplex: division by zero");
  if (a.is_zero()) return LogComplex::zero();
  return {a.log_mag - b.log_mag, wrap_phase(a.phase - b.phase)};
}

LogComplex operator+(const LogComplex& a, const LogComplex& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  const LogComplex& big = a.log_mag >= b.log_mag ? a : b;
  const LogComplex& small = a.log_mag >= b.log_mag ? b : a;
  // big * (1 + rel), |rel| <= 1
  const double r = static_cast<double>(std::exp(small.log_mag - big.log_mag));
  const double theta = small.phase - big.phase;
  const double re = r * std::cos(theta);
  const double im = r * std::sin(theta);
  const long double arg = 2.0L * re + static_cast<long double>(r) * r;
  if (arg <= -1.0L) return LogComplex::zero();
  const long double log_w = 0.5L * std::log1p(arg);
  return {big.log_mag + log_w, wrap_phase(big.phase + std::atan2(im, 1.0 + re))};
}

LogComplex LogComplex::operator-() const {
  if (is_zero()) return *this;
  return {log_mag, wrap_phase(phase + std::numbers::pi)};
}

LogComplex operator-(const LogComplex& a, const LogComplex& b) { return a + (-b); }

// ------------------------------------------------------------------- LogReal

LogReal LogReal::from(double x) {
  if (x == 0.0) return zero();
  return {std::log(static_cast<long double>(std::fabs(x))), x > 0 ? 1 : -1};
}

double LogReal::to_double() const {
  if (sign == 0) return 0.0;
  return sign * static_cast<double>(std::exp(log_mag));
}

LogReal operator*(const LogReal& a, const LogReal& b) {
  if (a.is_zero() || b.is_zero()) return LogReal::zero();
  return {a.log_mag + b.log_mag, a.sign * b.sign};
}

LogReal operator/(const LogReal& a, const LogReal& b) {
  if (b.is_zero()) throw DomainError("LogReal: division by zero");
  if (a.is_zero()) return LogReal::zero();
  return {a.log_mag - b.log_mag, a.sign * b.sign};
}

LogReal operator+(const LogReal& a, const LogReal& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  const LogReal& big = a.log_mag >= b.log_mag ? a : b;
  const LogReal& small = a.log_mag >= b.log_mag ? b : a;
  const long double r = std::exp(small.log_mag - big.log_mag);
  if (big.sign == small.sign) return {big.log_mag + std::log1p(r), big.sign};
  if (r >= 1.0L) return LogReal::zero();
  return {big.log_mag + std::log1p(-r), big.sign};
}

LogReal operator-(const LogReal& a, const LogReal& b) { return a + (-b); }

// ---------------------------------------------------------------- ExtComplex

void ExtComplex::normalize() {
  const double s = std::max(std::fabs(mant.real()), std::fabs(mant.imag()));
  if (s == 0.0) {
    mant = {0.0, 0.0};
    exp = 0;
    return;
  }
  int e = 0;
  std::frexp(s, &e);
  mant = {std::ldexp(mant.real(), -e), std::ldexp(mant.imag(), -e)};
  exp += e;
}

ExtComplex ExtComplex::from(cplx z) {
  ExtComplex out;
  out.mant = z;
  out.normalize();
  return out;
}

ExtComplex ExtComplex::from(const LogComplex& z) {
  if (z.is_zero()) return {};
  const long double e = std::floor(z.log_mag / kLn2);
  ExtComplex out;
  out.mant = std::polar(static_cast<double>(std::exp(z.log_mag - e * kLn2)), z.phase);
  out.exp = static_cast<std::int64_t>(e);
  out.normalize();
  return out;
}

LogComplex ExtComplex::to_log() const {
  if (is_zero()) return LogComplex::zero();
  const long double mag = std::hypot(static_cast<long double>(mant.real()),
                                     static_cast<long double>(mant.imag()));
  return {std::log(mag) + static_cast<long double>(exp) * kLn2, wrap_phase(std::arg(mant))};
}

cplx ExtComplex::to_complex() const {
  if (exp > 2000) return {std::ldexp(mant.real(), 2000), std::ldexp(mant.imag(), 2000)};
  if (exp < -2000) return {0.0, 0.0};
  const int e = static_cast<int>(exp);
  return {std::ldexp(mant.real(), e), std::ldexp(mant.imag(), e)};
}

double ExtComplex::log_abs() const {
  if (is_zero()) return kNegInf;
  return std::log(std::abs(mant)) + static_cast<double>(exp) * static_cast<double>(kLn2);
}

ExtComplex& ExtComplex::operator+=(const ExtComplex& other) {
  if (other.is_zero()) return *this;
  if (is_zero()) return *this = other;
  const std::int64_t d = exp - other.exp;
  if (d >= 0) {
    if (d < 1100) {
      const int s = static_cast<int>(-d);
      mant += cplx(std::ldexp(other.mant.real(), s), std::ldexp(other.mant.imag(), s));
    }
  } else {
    if (-d < 1100) {
      const int s = static_cast<int>(d);
      mant = cplx(std::ldexp(mant.real(), s), std::ldexp(mant.imag(), s)) + other.mant;
    } else {
      mant = other.mant;
    }
    exp = other.exp;
  }
  normalize();
  return *this;
}

ExtComplex& ExtComplex::operator*=(cplx factor) {
  mant *= factor;
  normalize();
  return *this;
}

ExtComplex& ExtComplex::operator*=(const ExtComplex& other) {
  mant *= other.mant;
  exp += other.exp;
  normalize();
  return *this;
}

// ------------------------------------------------------------------- Domains

DiskDomain::DiskDomain(double r) : radius(r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("DiskDomain: radius must be positive");
}

// ---------------------------------------------------------------- Products

LogReal vandermonde_sq_log(std::span<const cplx> points) {
  long double acc = 0.0L;
  double prod = 1.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double d2 = std::norm(points[i] - points[j]);
      if (d2 == 0.0) return LogReal::zero();
      prod *= d2;
      if (prod > kFoldHigh || prod < kFoldLow) {
        acc += std::log(static_cast<long double>(prod));
        prod = 1.0;
      }
    }
  }
  acc += std::log(static_cast<long double>(prod));
  return {acc, 1};
}

LogReal cross_product_log(std::span<const cplx> alpha, std::span<const cplx> beta) {
  long double acc = 0.0L;
  double prod = 1.0;
  for (const cplx a : alpha) {
    for (const cplx b : beta) {
      const double d2 = std::norm(a - b);
      if (d2 == 0.0) return LogReal::zero();
      prod *= d2;
      if (prod > kFoldHigh || prod < kFoldLow) {
        acc += std::log(static_cast<long double>(prod));
        prod = 1.0;
      }
    }
  }
  acc += std::log(static_cast<long double>(prod));
  return {acc, 1};
}

double log_binom_factorial(int n, int k) {
  if (n < 0 || k < 0 || k > n) throw DomainError("log_binom_factorial: need 0 <= k <= n");
  long double acc = 0.0L;
  for (int i = n - k + 1; i <= n; ++i) acc += std::log(static_cast<long double>(i));
  return static_cast<double>(acc);
}

double log_sum_exp(std::span<const double> logs) {
  double peak = kNegInf;
  for (double v : logs) peak = std::max(peak, v);
  if (peak == kNegInf) return kNegInf;
  if (peak == std::numeric_limits<double>::infinity()) return peak;
  double acc = 0.0;
  for (double v : logs)
    if (v != kNegInf) acc += std::exp(v - peak);
  return peak + std::log(acc);
}

}  // namespace rigidlab
