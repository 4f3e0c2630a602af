#include "rigidlab/ensembles.hpp"

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "rigidlab/errors.hpp"
#include "rigidlab/symfun.hpp"

namespace rigidlab {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Rescaled polynomial p(w) = sum_k d_k w^k with d_k proportional to
// xi_k n^{k/2} / sqrt(k!), normalized so max |d_k| = 1.
struct ScaledPoly {
  std::vector<cplx> d;
  double scale = 1.0;  // z = scale * w

  int degree() const { return static_cast<int>(d.size()) - 1; }

  // Newton correction p(w) / p'(w); evaluated through the reversed
  // polynomial when |w| > 1 to keep powers bounded.
  cplx newton_step(cplx w) const {
    const int n = degree();
    if (std::abs(w) <= 1.0) {
      cplx p = d[n];
      cplx dp(0.0, 0.0);
      for (int k = n - 1; k >= 0; --k) {
        dp = dp * w + p;
        p = p * w + d[k];
      }
      if (dp == cplx(0.0, 0.0)) return p == cplx(0.0, 0.0) ? cplx(0.0, 0.0) : cplx(1e300, 0.0);
      return p / dp;
    }
    // q(y) = y^n p(1/y), p'/p = y (n - y q'/q)
    const cplx y = 1.0 / w;
    cplx q = d[0];
    cplx dq(0.0, 0.0);
    for (int k = 1; k <= n; ++k) {
      dq = dq * y + q;
      q = q * y + d[k];
    }
    if (q == cplx(0.0, 0.0)) return {0.0, 0.0};
    const cplx logderiv = y * (static_cast<double>(n) - y * dq / q);
    if (logderiv == cplx(0.0, 0.0)) return {1e300, 0.0};
    return 1.0 / logderiv;
  }
};

ScaledPoly rescale(std::span<const cplx> xi) {
  const int n = static_cast<int>(xi.size()) - 1;
  ScaledPoly poly;
  poly.scale = std::sqrt(static_cast<double>(n));
  const double log_rho = std::log(poly.scale);
  std::vector<double> logs(n + 1);
  double peak = kNegInf;
  for (int k = 0; k <= n; ++k) {
    logs[k] = k * log_rho - 0.5 * std::lgamma(k + 1.0);
    if (xi[k] != cplx(0.0, 0.0)) peak = std::max(peak, logs[k] + std::log(std::abs(xi[k])));
  }
  poly.d.resize(n + 1);
  for (int k = 0; k <= n; ++k) poly.d[k] = xi[k] * std::exp(logs[k] - peak);
  return poly;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::uint64_t a,
                          std::uint64_t b) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ fnv1a(tag));
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ (b + 0x632be59bd9b4e019ULL));
  return h;
}

cplx complex_normal(Rng& rng) {
  // One polar-method pair per complex draw keeps the stream layout fixed.
  std::normal_distribution<double> normal(0.0, std::numbers::sqrt2 / 2.0);
  const double re = normal(rng);
  const double im = normal(rng);
  return {re, im};
}

void sort_lexicographic(std::vector<cplx>& points) {
  std::sort(points.begin(), points.end(), [](cplx a, cplx b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
}

RootSolve gaf_roots(std::span<const cplx> xi) {
  const int n = static_cast<int>(xi.size()) - 1;
  if (n < 1) throw DomainError("gaf_roots: degree must be >= 1");
  RootSolve out;
  if (xi[n] == cplx(0.0, 0.0)) {
    out.roots.assign(n, cplx(std::nan(""), std::nan("")));
    out.residual = std::numeric_limits<double>::infinity();
    return out;
  }
  if (n == 1) {
    out.roots = {-xi[0] / xi[1]};
    out.converged = true;
    return out;
  }

  const ScaledPoly poly = rescale(xi);
  const double log_lead = std::log(std::abs(poly.d[n]));
  double log_bound = kNegInf;
  for (int k = 0; k < n; ++k) {
    if (poly.d[k] == cplx(0.0, 0.0)) continue;
    log_bound = std::max(log_bound, (std::log(std::abs(poly.d[k])) - log_lead) / (n - k));
  }
  const double radius = 1.0 + (log_bound == kNegInf ? 0.0 : std::exp(log_bound));

  std::vector<cplx> w(n);
  for (int j = 0; j < n; ++j)
    w[j] = std::polar(radius, 2.0 * std::numbers::pi * j / n + 0.7);

  constexpr int kMaxIter = 500;
  constexpr double kStepTol = 1e-15;
  std::vector<bool> settled(n, false);
  int iter = 0;
  for (; iter < kMaxIter; ++iter) {
    bool all_settled = true;
    for (int i = 0; i < n; ++i) {
      if (settled[i]) continue;
      const cplx ratio = poly.newton_step(w[i]);
      cplx repulsion(0.0, 0.0);
      for (int j = 0; j < n; ++j)
        if (j != i) repulsion += 1.0 / (w[i] - w[j]);
      const cplx step = ratio / (1.0 - ratio * repulsion);
      w[i] -= step;
      if (std::abs(step) <= kStepTol * std::max(1.0, std::abs(w[i])))
        settled[i] = true;
      else
        all_settled = false;
    }
    if (all_settled) break;
  }
  out.iterations = iter;
  out.converged = iter < kMaxIter;

  double residual = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int pass = 0; pass < 2; ++pass) {
      const cplx step = poly.newton_step(w[i]);
      if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) break;
      w[i] -= step;
    }
    const cplx last = poly.newton_step(w[i]);
    double r = std::abs(last) / std::max(1.0, std::abs(w[i]));
    if (!std::isfinite(r) || !std::isfinite(std::abs(w[i]))) r = std::numeric_limits<double>::infinity();
    residual = std::max(residual, r);
  }
  out.residual = residual;
  out.roots.resize(n);
  for (int i = 0; i < n; ++i) out.roots[i] = poly.scale * w[i];
  return out;
}

GafInstance gaf_from_coefficients(std::vector<cplx> xi) {
  if (xi.size() < 2 || static_cast<int>(xi.size()) - 1 > kMaxGafDegree)
    throw DomainError("gaf: degree must be in [1, 300]");
  GafInstance g;
  g.n = static_cast<int>(xi.size()) - 1;
  g.xi = std::move(xi);
  RootSolve solved = gaf_roots(g.xi);
  g.roots = std::move(solved.roots);
  sort_lexicographic(g.roots);
  g.residual = solved.residual;
  if (!solved.converged) {
    g.flagged = true;
    g.diagnostic = "root_nonconvergence: residual=" + std::to_string(solved.residual);
  } else if (!(solved.residual <= kRootResidualTol)) {
    g.flagged = true;
    g.diagnostic = "root_residual: residual=" + std::to_string(solved.residual);
  }
  return g;
}

GafInstance sample_gaf(int n, Rng& rng) {
  if (n < 1 || n > kMaxGafDegree) throw DomainError("sample_gaf: n must be in [1, 300]");
  std::vector<cplx> xi(n + 1);
  for (auto& v : xi) v = complex_normal(rng);
  return gaf_from_coefficients(std::move(xi));
}

double coefficient_root_defect(const GafInstance& g) {
  const int n = g.n;
  const auto sigma = elem_sym_ext(g.roots);
  const LogComplex lead = LogComplex::from(g.xi[n]);
  double scale = 0.0;
  for (const cplx v : g.xi) scale = std::max(scale, std::abs(v));
  double worst = 0.0;
  for (int k = 0; k <= n; ++k) {
    LogComplex lhs = sigma[k].to_log() * lead;
    lhs.log_mag -= 0.5L * static_cast<long double>(log_binom_factorial(n, k));
    const cplx rhs = (k % 2 == 0 ? 1.0 : -1.0) * g.xi[n - k];
    worst = std::max(worst, std::abs(lhs.to_complex() - rhs) / scale);
  }
  return worst;
}

GinibreSample sample_ginibre(int n, Rng& rng) {
  if (n < 1 || n > kMaxGafDegree) throw DomainError("sample_ginibre: n must be in [1, 300]");
  Eigen::MatrixXcd a(n, n);
  // row-major fill order fixes the stream layout
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = complex_normal(rng);
  GinibreSample out;
  out.n = n;
  out.trace = a.trace();
  if (n == 1) {
    out.eigenvalues = {a(0, 0)};
    return out;
  }
  // zgeev overwrites its input; eigenvalues only
  std::vector<cplx> w(n);
  cplx unused{};
  const lapack_int info =
      LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, a.data(), n, w.data(), &unused, 1, &unused, 1);
  if (info != 0) {
    out.flagged = true;
    out.diagnostic = "eigensolver_failure: info=" + std::to_string(info);
    return out;
  }
  out.eigenvalues = std::move(w);
  sort_lexicographic(out.eigenvalues);
  return out;
}

SplitConfiguration split(std::span<const cplx> points, const DiskDomain& domain, Rng& rng) {
  SplitConfiguration cfg{domain, {}, {}, 0, {0.0, 0.0}};
  for (const cplx p : points) (domain.contains(p) ? cfg.zeta : cfg.omega).push_back(p);
  std::shuffle(cfg.zeta.begin(), cfg.zeta.end(), rng);
  std::stable_sort(cfg.omega.begin(), cfg.omega.end(), [](cplx a, cplx b) {
    const double ra = std::abs(a), rb = std::abs(b);
    if (ra != rb) return ra < rb;
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  cfg.m = static_cast<int>(cfg.zeta.size());
  for (const cplx z : cfg.zeta) cfg.s += z;
  return cfg;
}

}  // namespace rigidlab
