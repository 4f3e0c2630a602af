#include "rigidlab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rigidlab/errors.hpp"
#include "rigidlab/symfun.hpp"

extern "C" {
#include <quadmath.h>
}

namespace rigidlab {

namespace {

void require_outside(std::span<const cplx> omega, double r0, const char* who) {
  for (const cplx w : omega)
    if (!(std::abs(w) >= r0))
      throw DomainError(std::string(who) + ": point inside the disk (|omega| = " + std::to_string(std::abs(w)) + ")");
}

// log sqrt(a! / b!)
double half_log_ratio(int a, int b) { return 0.5 * (std::lgamma(a + 1.0) - std::lgamma(b + 1.0)); }

// Index convention shared by f_ij and f_0: z holds z_1..z_C.
cplx z_at(std::span<const cplx> z, int idx) {
  if (idx < 1 || idx > static_cast<int>(z.size())) return {0.0, 0.0};
  return z[idx - 1];
}

using quad = __float128;

struct Quad2 {
  quad re = 0;
  quad im = 0;
  Quad2& operator+=(const Quad2& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  friend Quad2 operator*(const Quad2& a, const Quad2& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend Quad2 operator*(quad s, const Quad2& a) { return {s * a.re, s * a.im}; }
};

}  // namespace

BumpFamily::BumpFamily(double r0) : r0_(r0) {
  if (!(r0 > 0.0) || !std::isfinite(r0)) throw DomainError("BumpFamily: r0 must be positive");
}

double BumpFamily::smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

double BumpFamily::phi(double x) const {
  if (x <= r0_ || x >= 3.0 * r0_) return 0.0;
  if (x < 1.5 * r0_) return smooth_step((x - r0_) / (0.5 * r0_));
  if (x <= 2.0 * r0_) return 1.0;
  return 1.0 - smooth_step((x - 2.0 * r0_) / r0_);
}

double BumpFamily::phi_dyadic(int j, double x) const { return phi(std::ldexp(x, -j)); }

double BumpFamily::phi_tilde(double x) const {
  if (x < r0_ || x >= 3.0 * r0_) return 0.0;
  if (x <= 2.0 * r0_) return 1.0;
  return phi(x);
}

double BumpFamily::piece(int j, double x) const { return j == 0 ? phi_tilde(x) : phi_dyadic(j, x); }

double BumpFamily::tail_weight(int k, double x) const {
  const double lo = std::ldexp(r0_, k);
  if (x <= lo) return 0.0;
  if (x < 1.5 * lo) return phi(std::ldexp(x, -k));
  return 1.0;
}

int BumpFamily::top_level(double x) const {
  if (!(x > r0_)) return 0;
  // piece j can be nonzero only while x / 2^j > r0
  int j = std::max(0, static_cast<int>(std::ceil(std::log2(x / r0_))) - 1);
  while (std::ldexp(x, -(j + 1)) > r0_) ++j;
  while (j > 0 && !(std::ldexp(x, -j) > r0_)) --j;
  return j;
}

InversePowerSums inverse_power_sums(std::span<const cplx> omega, int l_max, const BumpFamily& bump) {
  if (l_max < 1) throw DomainError("inverse_power_sums: l_max must be >= 1");
  require_outside(omega, bump.r0(), "inverse_power_sums");
  InversePowerSums out;
  out.s.assign(l_max, cplx(0.0, 0.0));
  out.s_abs.assign(l_max, 0.0);
  int top = 0;
  for (const cplx w : omega) top = std::max(top, bump.top_level(std::abs(w)));
  out.psi.assign(top + 1, std::vector<cplx>(l_max, cplx(0.0, 0.0)));
  out.gamma.assign(top + 1, std::vector<double>(l_max, 0.0));

  std::vector<cplx> pw(l_max);
  std::vector<double> pa(l_max);
  for (const cplx w : omega) {
    const cplx inv = 1.0 / w;
    const double x = std::abs(w), ia = 1.0 / x;
    cplx p = inv;
    double a = ia;
    for (int l = 0; l < l_max; ++l) {
      pw[l] = p;
      pa[l] = a;
      out.s[l] += p;
      out.s_abs[l] += a;
      p *= inv;
      a *= ia;
    }
    for (int j = 0, jt = bump.top_level(x); j <= jt; ++j) {
      const double wgt = bump.piece(j, x);
      if (wgt == 0.0) continue;
      for (int l = 0; l < l_max; ++l) {
        out.psi[j][l] += wgt * pw[l];
        out.gamma[j][l] += wgt * pa[l];
      }
    }
  }
  return out;
}

TailReport tail(std::span<const cplx> omega, int l, int k, const BumpFamily& bump) {
  if (k < 1) throw DomainError("tail: k must be >= 1");
  if (l < 1) throw DomainError("tail: l must be >= 1");
  const auto ips = inverse_power_sums(omega, l, bump);
  TailReport r;
  r.l = l;
  r.k = k;
  for (int j = k; j < static_cast<int>(ips.psi.size()); ++j) {
    r.tau += ips.psi[j][l - 1];
    r.tau_abs += ips.gamma[j][l - 1];
  }
  return r;
}

double x_n(std::span<const cplx> omega, double r0) {
  require_outside(omega, r0, "x_n");
  cplx s1(0.0, 0.0), s2(0.0, 0.0);
  double a3 = 0.0;
  for (const cplx w : omega) {
    const cplx inv = 1.0 / w;
    s1 += inv;
    s2 += inv * inv;
    a3 += std::pow(std::abs(inv), 3);
  }
  return std::abs(s1) + std::abs(s2) + a3;
}

std::vector<cplx> eta_all(const GafInstance& g, const SplitConfiguration& cfg) {
  const int n = g.n;
  if (static_cast<int>(g.xi.size()) != n + 1) throw DomainError("eta: coefficient vector does not match degree");
  if (static_cast<int>(cfg.omega.size()) > n) throw DomainError("eta: more outside points than the degree");
  const int m = n - static_cast<int>(cfg.omega.size());
  const auto sigma = elem_sym_ext(cfg.omega);
  const cplx xn = g.xi[n];
  std::vector<cplx> eta(n + 1);
  for (int l = 0; l <= n; ++l) {
    if (l < m) {
      eta[l] = -g.xi[l];
      continue;
    }
    const ExtComplex& sg = sigma[n - l];
    cplx lead(0.0, 0.0);
    if (!sg.is_zero() && xn != cplx(0.0, 0.0)) {
      LogComplex v = sg.to_log() * LogComplex::from(xn);
      v.log_mag -= half_log_ratio(n, l);
      lead = v.to_complex();
      if ((n - l) % 2 != 0) lead = -lead;
    }
    eta[l] = lead - g.xi[l];
  }
  return eta;
}

cplx eta_from_instance(const GafInstance& g, const SplitConfiguration& cfg, int l) {
  const int m = g.n - static_cast<int>(cfg.omega.size());
  if (l < m || l > g.n) throw DomainError("eta_from_instance: need m <= l <= n");
  return eta_all(g, cfg)[l];
}

YnEn yn_en(const GafInstance& g, const SplitConfiguration& cfg, int m) {
  if (m < 2) throw DomainError("yn_en: need m >= 2");
  const int n = g.n;
  if (m > n) throw DomainError("yn_en: need m <= n");
  const auto eta = eta_all(g, cfg);
  std::vector<double> axi(n + 1), aeta(n + 1);
  YnEn r;
  r.m = m;
  for (int l = 0; l <= n; ++l) {
    axi[l] = std::abs(g.xi[l]);
    aeta[l] = std::abs(eta[l]);
    r.e_n += std::norm(g.xi[l]);
  }
  // 1 / sqrt((l+i)_i (l+j)_j), (a)_i = a! / (a-i)!
  auto weight = [](int l, int i, int j) {
    return std::exp(-half_log_ratio(l + i, l) - half_log_ratio(l + j, l));
  };
  const int q = m - 1;
  r.l0.assign(q, cplx(0.0, 0.0));
  r.m0.assign(q, 0.0);
  r.l.assign(q, std::vector<cplx>(q, cplx(0.0, 0.0)));
  r.m_.assign(q, std::vector<double>(q, 0.0));
  r.n_.assign(q, std::vector<double>(q, 0.0));
  for (int i = 2; i <= m; ++i) {
    for (int l = 0; l <= n - i; ++l) {
      const double w = weight(l, 0, i);
      r.l0[i - 2] += std::conj(g.xi[l]) * g.xi[l + i] * w;
      r.m0[i - 2] += axi[l] * aeta[l + i] * w;
    }
    for (int j = 2; j <= m; ++j) {
      for (int l = 0; l <= std::min(n - i, n - j); ++l) {
        const double w = weight(l, i, j);
        r.l[i - 2][j - 2] += std::conj(g.xi[l + i]) * g.xi[l + j] * w;
        r.m_[i - 2][j - 2] += axi[l + i] * aeta[l + j] * w;
        r.n_[i - 2][j - 2] += aeta[l + i] * aeta[l + j] * w;
      }
    }
  }
  for (int a = 0; a < q; ++a) {
    r.y_n += std::abs(r.l0[a]) + r.m0[a];
    for (int b = 0; b < q; ++b) r.y_n += std::abs(r.l[a][b]) + r.m_[a][b] + r.m_[b][a] + r.n_[a][b];
  }
  return r;
}

double f_ij_eval(std::span<const cplx> z, int i, int j, int m) {
  const int c = static_cast<int>(z.size());
  std::vector<double> logs;
  std::vector<cplx> phases;
  double peak = -std::numeric_limits<double>::infinity();
  for (int l = 1; l <= c; ++l) {
    const cplx a = z_at(z, l + i - m), b = z_at(z, l + j - m);
    if (a == cplx(0.0, 0.0) || b == cplx(0.0, 0.0)) continue;
    const double lg = std::log(std::abs(a)) + std::log(std::abs(b)) + std::lgamma(l + 1.0);
    logs.push_back(lg);
    phases.push_back(std::conj(a) * b / (std::abs(a) * std::abs(b)));
    peak = std::max(peak, lg);
  }
  if (logs.empty()) return 0.0;
  cplx acc(0.0, 0.0);
  for (std::size_t t = 0; t < logs.size(); ++t) acc += std::exp(logs[t] - peak) * phases[t];
  const double mag = std::abs(acc);
  return mag == 0.0 ? 0.0 : std::exp(std::log(mag) + peak);
}

double f_0_eval(std::span<const cplx> z, int m, int L, int h) {
  if (h < 1) throw DomainError("f_0_eval: window length h must be >= 1");
  std::vector<double> logs;
  for (int l = L; l < L + h; ++l) {
    const cplx a = z_at(z, l - m);
    if (a == cplx(0.0, 0.0) || l < 0) continue;
    logs.push_back(2.0 * std::log(std::abs(a)) + std::lgamma(l + 1.0));
  }
  if (logs.empty()) return 0.0;
  return std::exp(log_sum_exp(logs) - std::log(static_cast<double>(h)));
}

std::vector<cplx> newton_z_chain(std::span<const cplx> omega, std::optional<int> k_cut, int l_max,
                                 const BumpFamily& bump) {
  if (k_cut && *k_cut < 0) throw DomainError("newton_z_chain: k_cut must be >= 0");
  if (l_max < 1) throw DomainError("newton_z_chain: l_max must be >= 1");
  require_outside(omega, bump.r0(), "newton_z_chain");
  // Power sums and recursion both in quad: the recursion cancels heavily for
  // large l, and double power sums would already carry that error.
  std::vector<Quad2> p(l_max);
  for (const cplx w : omega) {
    quad weight = 1;
    if (k_cut) {
      const double x = std::abs(w);
      double acc = 0.0;
      for (int j = 0, jt = std::min(*k_cut, bump.top_level(x)); j <= jt; ++j) acc += bump.piece(j, x);
      if (acc == 0.0) continue;
      weight = acc;
    }
    const quad wr = w.real(), wi = w.imag(), d = wr * wr + wi * wi;
    const Quad2 inv{wr / d, -wi / d};
    Quad2 pw = inv;
    for (int l = 0; l < l_max; ++l) {
      p[l] += weight * pw;
      pw = pw * inv;
    }
  }
  // l e_l = sum_{i=1}^{l} (-1)^(i-1) e_{l-i} p_i
  std::vector<Quad2> e(l_max + 1);
  e[0].re = 1;
  for (int l = 1; l <= l_max; ++l) {
    Quad2 acc;
    for (int i = 1; i <= l; ++i) {
      const Quad2 t = e[l - i] * p[i - 1];
      if (i % 2) acc += t;
      else acc += quad(-1) * t;
    }
    e[l] = (quad(1) / l) * acc;
  }
  std::vector<cplx> z(l_max);
  for (int l = 1; l <= l_max; ++l) z[l - 1] = {static_cast<double>(e[l].re), static_cast<double>(e[l].im)};
  return z;
}

}  // namespace rigidlab
