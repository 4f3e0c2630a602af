#include "rigidlab/symfun.hpp"

#include <quadmath.h>

#include <algorithm>
#include <cmath>

#include "rigidlab/errors.hpp"

namespace rigidlab {

cplx SymmetricProfile::at(int k) const {
  if (k < 0 || k >= static_cast<int>(sigma.size())) return {0.0, 0.0};
  return sigma[k].to_complex();
}

LogComplex SymmetricProfile::log_at(int k) const {
  if (k < 0 || k >= static_cast<int>(sigma.size())) return LogComplex::zero();
  return sigma[k];
}

std::vector<ExtComplex> SymmetricProfile::ext() const {
  std::vector<ExtComplex> out;
  out.reserve(sigma.size());
  for (const auto& s : sigma) out.push_back(ExtComplex::from(s));
  return out;
}

namespace {

// Quad-precision accumulator. Expanding prod (1 + x_i t) cancels heavily when
// the x_i are spread around a circle (the coefficient sizes are far below the
// term sizes), so double mantissas lose most of their digits by N ~ 60.
using quad = __float128;

struct QuadComplex {
  quad re = 0;
  quad im = 0;
};

// Entries are rescaled by a shared power of two when they approach the quad
// exponent limit.
constexpr quad kQuadHigh = 1e4000Q;
constexpr quad kQuadLow = 1e-4000Q;

ExtComplex to_ext(const QuadComplex& z, std::int64_t extra_exp) {
  const quad ar = z.re < 0 ? -z.re : z.re;
  const quad ai = z.im < 0 ? -z.im : z.im;
  const quad peak = ar > ai ? ar : ai;
  if (peak == 0) return {};
  int e = 0;
  frexpq(peak, &e);
  ExtComplex out;
  out.mant = {static_cast<double>(ldexpq(z.re, -e)), static_cast<double>(ldexpq(z.im, -e))};
  out.exp = extra_exp + e;
  return out;
}

}  // namespace

std::vector<ExtComplex> elem_sym_ext(std::span<const cplx> points) {
  if (points.size() > kMaxSymmetricPoints)
    throw DomainError("elem_sym: more than 10000 points");
  const std::size_t n = points.size();
  std::vector<QuadComplex> e(n + 1);
  std::vector<std::int64_t> shift(n + 1, 0);  // e[k] carries a factor 2^shift[k]
  e[0].re = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const quad xr = points[i].real(), xi = points[i].imag();
    // new e_k = e_k + x e_{k-1}, descending so e_{k-1} is still the old value
    for (std::size_t k = i + 1; k >= 1; --k) {
      const QuadComplex& p = e[k - 1];
      quad tr = p.re * xr - p.im * xi;
      quad ti = p.re * xi + p.im * xr;
      if (shift[k] != shift[k - 1]) {
        if (e[k].re == 0 && e[k].im == 0) {
          shift[k] = shift[k - 1];
        } else {
          // bring the incoming term to e_k's scale
          const int d = static_cast<int>(std::clamp<std::int64_t>(shift[k - 1] - shift[k], -40000, 40000));
          tr = ldexpq(tr, d);
          ti = ldexpq(ti, d);
        }
      }
      e[k].re += tr;
      e[k].im += ti;
    }
    for (std::size_t k = 1; k <= i + 1; ++k) {
      const quad a = fabsq(e[k].re) > fabsq(e[k].im) ? fabsq(e[k].re) : fabsq(e[k].im);
      if (a > kQuadHigh || (a < kQuadLow && a != 0)) {
        int ex = 0;
        frexpq(a, &ex);
        e[k].re = ldexpq(e[k].re, -ex);
        e[k].im = ldexpq(e[k].im, -ex);
        shift[k] += ex;
      }
    }
  }
  std::vector<ExtComplex> out(n + 1);
  for (std::size_t k = 0; k <= n; ++k) out[k] = to_ext(e[k], shift[k]);
  return out;
}

SymmetricProfile elem_sym(std::span<const cplx> points) {
  const auto e = elem_sym_ext(points);
  SymmetricProfile out;
  out.source_len = static_cast<int>(points.size());
  out.sigma.reserve(e.size());
  for (const auto& v : e) out.sigma.push_back(v.to_log());
  out.sigma[0] = LogComplex::one();
  return out;
}

SymmetricProfile sigma_concat(const SymmetricProfile& u, const SymmetricProfile& v) {
  const auto a = u.ext();
  const auto b = v.ext();
  std::vector<ExtComplex> c(a.size() + b.size() - 1);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
  SymmetricProfile out;
  out.source_len = u.source_len + v.source_len;
  out.sigma.reserve(c.size());
  for (const auto& x : c) out.sigma.push_back(x.to_log());
  out.sigma[0] = LogComplex::one();
  return out;
}

PowerSums power_sums(std::span<const cplx> points, int l_max) {
  PowerSums out;
  out.s.assign(std::max(l_max, 0), cplx(0.0, 0.0));
  for (const cplx x : points) {
    cplx p = x;
    for (int l = 0; l < l_max; ++l) {
      out.s[l] += p;
      p *= x;
    }
  }
  return out;
}

std::vector<cplx> newton_e_from_p(const PowerSums& s, int l_max) {
  if (l_max < 0 || static_cast<int>(s.s.size()) < l_max)
    throw DomainError("newton_e_from_p: need at least l_max power sums");
  std::vector<cplx> e(l_max + 1, cplx(0.0, 0.0));
  e[0] = 1.0;
  for (int l = 1; l <= l_max; ++l) {
    cplx acc(0.0, 0.0);
    for (int i = 1; i <= l; ++i) {
      const double sign = (i % 2 == 1) ? 1.0 : -1.0;
      acc += sign * e[l - i] * s.s[i - 1];
    }
    e[l] = acc / static_cast<double>(l);
  }
  return {e.begin() + 1, e.end()};
}

std::vector<cplx> reciprocal_series_g(std::span<const cplx> zeta, int r_max) {
  if (r_max < 1) throw DomainError("reciprocal_series_g: r_max must be >= 1");
  std::vector<cplx> sig;
  for (const auto& v : elem_sym_ext(zeta)) sig.push_back(v.to_complex());
  const int m = static_cast<int>(zeta.size());
  std::vector<cplx> g(r_max + 1, cplx(0.0, 0.0));
  g[0] = 1.0;
  for (int r = 1; r <= r_max; ++r) {
    cplx acc(0.0, 0.0);
    for (int i = 1; i <= std::min(r, m); ++i) acc -= sig[i] * g[r - i];
    g[r] = acc;
  }
  return {g.begin() + 1, g.end()};
}

double expansion_identity_residual(std::span<const cplx> zeta, std::span<const cplx> omega) {
  std::vector<cplx> joined(zeta.begin(), zeta.end());
  joined.insert(joined.end(), omega.begin(), omega.end());
  const auto sig_all = elem_sym_ext(joined);
  const auto sig_out = elem_sym_ext(omega);
  const int n_out = static_cast<int>(omega.size());
  const auto g = n_out >= 1 ? reciprocal_series_g(zeta, n_out) : std::vector<cplx>{};

  double worst = 0.0;
  for (int k = 0; k <= n_out; ++k) {
    ExtComplex rhs = sig_all[k];
    double scale = sig_all[k].log_abs();
    for (int r = 1; r <= k; ++r) {
      ExtComplex term = sig_all[k - r];
      term *= g[r - 1];
      scale = std::max(scale, term.log_abs());
      rhs += term;
    }
    scale = std::max(scale, sig_out[k].log_abs());
    if (scale == kNegInf) continue;
    ExtComplex diff = sig_out[k];
    ExtComplex neg = rhs;
    neg *= cplx(-1.0, 0.0);
    diff += neg;
    const double rel = diff.is_zero() ? 0.0 : std::exp(diff.log_abs() - scale);
    worst = std::max(worst, rel);
  }
  return worst;
}

std::vector<GaussInt> elem_sym_exact(std::span<const GaussInt> points) {
  std::vector<GaussInt> e(points.size() + 1);
  e[0] = {1, 0};
  for (std::size_t i = 0; i < points.size(); ++i) {
    const GaussInt x = points[i];
    for (std::size_t k = i + 1; k >= 1; --k) {
      const GaussInt p = e[k - 1];
      e[k].re += p.re * x.re - p.im * x.im;
      e[k].im += p.re * x.im + p.im * x.re;
    }
  }
  return e;
}

}  // namespace rigidlab
