#include "rigidlab/conditional.hpp"

#include <cmath>
#include <sstream>

#include "rigidlab/errors.hpp"
#include "rigidlab/parallel.hpp"
#include "rigidlab/symfun.hpp"

namespace rigidlab {

namespace {

std::vector<cplx> concat(std::span<const cplx> a, std::span<const cplx> b) {
  std::vector<cplx> out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

cplx sum_of(std::span<const cplx> v) {
  cplx s(0.0, 0.0);
  for (const cplx x : v) s += x;
  return s;
}

void check_sum(std::span<const cplx> zeta, cplx s) {
  const double off = std::abs(sum_of(zeta) - s);
  if (!(off <= kSumTolerance)) {
    std::ostringstream msg;
    msg << "candidate sum differs from s by " << off;
    throw ConstraintError(msg.str());
  }
}

double real_sq_sum(std::span<const cplx> zeta) {
  double t = 0.0;
  for (const cplx z : zeta) t += std::norm(z);
  return t;
}

// Running log-sum-exp.
struct LogAccumulator {
  double peak = kNegInf;
  double scaled = 0.0;
  void add(double x) {
    if (x == kNegInf) return;
    if (x > peak) {
      scaled = scaled * std::exp(peak - x) + 1.0;
      peak = x;
    } else {
      scaled += std::exp(x - peak);
    }
  }
  void merge(const LogAccumulator& o) {
    if (o.peak == kNegInf) return;
    add(o.peak + std::log(o.scaled));
  }
  double value() const { return peak == kNegInf ? kNegInf : peak + std::log(scaled); }
};

}  // namespace

const char* to_string(DensityKind kind) {
  switch (kind) {
    case DensityKind::gaf_given_omega: return "gaf_given_omega";
    case DensityKind::gaf_given_omega_and_sum: return "gaf_given_omega_and_sum";
    case DensityKind::ginibre_given_omega: return "ginibre_given_omega";
    case DensityKind::vandermonde_reference: return "vandermonde_reference";
    case DensityKind::restricted: return "restricted";
  }
  return "unknown";
}

struct ConditionalDensity::Impl {
  DensityKind kind;
  int n = 0;
  int m = 0;
  std::vector<cplx> omega;
  std::optional<cplx> s;
  DiskDomain domain;

  Impl(DensityKind k, int n_, int m_, std::vector<cplx> w, std::optional<cplx> s_, DiskDomain d)
      : kind(k), n(n_), m(m_), omega(std::move(w)), s(s_), domain(d) {}
  virtual ~Impl() = default;
  // zeta has the right length, satisfies the constraint and lies in the domain
  virtual double eval(std::span<const cplx> zeta) const = 0;
};

namespace {

// Precomputes b_j = sigma_j(omega) / sqrt(n!/(n-j)!) on a common scale e^c,
// so that sigma_k(zeta ++ omega) / sqrt(n!/(n-k)!) = e^c sum_r e_r(zeta) b_{k-r} u_{k,r}
// with u_{k,r} = sqrt((n-k)! / (n-k+r)!).
struct GafImpl final : ConditionalDensity::Impl {
  std::vector<cplx> b;
  double log_scale = 0.0;
  std::vector<double> u;  // u[k * (m+1) + r]
  double log_delta_omega = 0.0;

  GafImpl(int n_, int m_, std::vector<cplx> w, std::optional<cplx> s_, DiskDomain d)
      : Impl(s_ ? DensityKind::gaf_given_omega_and_sum : DensityKind::gaf_given_omega, n_, m_,
             std::move(w), s_, d) {
    const int n_out = static_cast<int>(omega.size());
    const auto sig = elem_sym_ext(omega);
    std::vector<double> logs(n_out + 1);
    log_scale = kNegInf;
    for (int j = 0; j <= n_out; ++j) {
      logs[j] = sig[j].log_abs() - 0.5 * log_binom_factorial(n, j);
      log_scale = std::max(log_scale, logs[j]);
    }
    b.resize(n_out + 1);
    for (int j = 0; j <= n_out; ++j) {
      if (sig[j].is_zero()) continue;
      const cplx unit = sig[j].mant / std::abs(sig[j].mant);
      b[j] = unit * std::exp(logs[j] - log_scale);
    }
    u.assign(static_cast<std::size_t>(n + 1) * (m + 1), 0.0);
    for (int k = 0; k <= n; ++k)
      for (int r = 0; r <= std::min(k, m); ++r)
        u[k * (m + 1) + r] = std::exp(0.5 * (std::lgamma(n - k + 1.0) - std::lgamma(n - k + r + 1.0)));
    const LogReal dw = vandermonde_sq_log(omega);
    log_delta_omega = dw.log();
  }

  double log_D(std::span<const cplx> zeta) const {
    // e_r(zeta), r = 0..m, in plain doubles (inside points are O(r0))
    std::vector<cplx> e(m + 1, cplx(0.0, 0.0));
    e[0] = 1.0;
    for (int i = 0; i < m; ++i)
      for (int r = i + 1; r >= 1; --r) e[r] += e[r - 1] * zeta[i];
    const int n_out = n - m;
    double total = 0.0;
    for (int k = 0; k <= n; ++k) {
      cplx t(0.0, 0.0);
      const int r_lo = std::max(0, k - n_out), r_hi = std::min(k, m);
      for (int r = r_lo; r <= r_hi; ++r) t += e[r] * b[k - r] * u[k * (m + 1) + r];
      total += std::norm(t);
    }
    return 2.0 * log_scale + std::log(total);
  }

  double eval(std::span<const cplx> zeta) const override {
    const double v = vandermonde_sq_log(zeta).log();
    if (v == kNegInf) return kNegInf;
    const double g = cross_product_log(zeta, omega).log();
    if (g == kNegInf) return kNegInf;
    return v + g + log_delta_omega - (n + 1) * log_D(zeta);
  }
};

struct GinibreImpl final : ConditionalDensity::Impl {
  GinibreImpl(int n_, int m_, std::vector<cplx> w, DiskDomain d)
      : Impl(DensityKind::ginibre_given_omega, n_, m_, std::move(w), std::nullopt, d) {}

  double eval(std::span<const cplx> zeta) const override {
    const double v = vandermonde_sq_log(zeta).log();
    if (v == kNegInf) return kNegInf;
    const double g = cross_product_log(zeta, omega).log();
    if (g == kNegInf) return kNegInf;
    return v + g - real_sq_sum(zeta);
  }
};

struct VandermondeImpl final : ConditionalDensity::Impl {
  VandermondeImpl(int m_, std::optional<cplx> s_, DiskDomain d)
      : Impl(DensityKind::vandermonde_reference, m_, m_, {}, s_, d) {}

  double eval(std::span<const cplx> zeta) const override { return vandermonde_sq_log(zeta).log(); }
};

struct RestrictedImpl final : ConditionalDensity::Impl {
  std::shared_ptr<const Impl> parent;
  std::vector<cplx> between;
  double log_norm = 0.0;

  RestrictedImpl(const ConditionalDensity& f0, int m_, std::vector<cplx> z, std::optional<cplx> s_, DiskDomain d)
      : Impl(DensityKind::restricted, f0.n(), m_, f0.omega(), s_, d),
        parent(f0.impl()),
        between(std::move(z)) {}

  // zeta is in D, the intermediate points are in D0, and the sum was checked
  // against s_inner; skipping the parent's own check avoids stacking the two
  // tolerances.
  double eval(std::span<const cplx> zeta) const override {
    return parent->eval(concat(zeta, between)) - log_norm;
  }
};

}  // namespace

ConditionalDensity ConditionalDensity::gaf(int n, std::vector<cplx> omega, std::optional<cplx> s,
                                           DiskDomain domain) {
  if (n < 1) throw DomainError("gaf density: n must be >= 1");
  if (static_cast<int>(omega.size()) >= n) throw DomainError("gaf density: need at least one inside point");
  return ConditionalDensity(std::make_shared<GafImpl>(n, n - static_cast<int>(omega.size()), std::move(omega), s, domain));
}

ConditionalDensity ConditionalDensity::ginibre(int n, std::vector<cplx> omega, DiskDomain domain) {
  if (n < 1) throw DomainError("ginibre density: n must be >= 1");
  if (static_cast<int>(omega.size()) >= n)
    throw DomainError("ginibre density: need at least one inside point");
  return ConditionalDensity(std::make_shared<GinibreImpl>(n, n - static_cast<int>(omega.size()), std::move(omega), domain));
}

ConditionalDensity ConditionalDensity::vandermonde(int m, std::optional<cplx> s, DiskDomain domain) {
  if (m < 1) throw DomainError("vandermonde density: m must be >= 1");
  return ConditionalDensity(std::make_shared<VandermondeImpl>(m, s, domain));
}

DensityKind ConditionalDensity::kind() const { return impl_->kind; }
int ConditionalDensity::n() const { return impl_->n; }
int ConditionalDensity::m() const { return impl_->m; }
const std::vector<cplx>& ConditionalDensity::omega() const { return impl_->omega; }
std::optional<cplx> ConditionalDensity::sum() const { return impl_->s; }
const DiskDomain& ConditionalDensity::domain() const { return impl_->domain; }

std::string ConditionalDensity::describe() const {
  std::ostringstream out;
  out << to_string(kind()) << "(n=" << n() << ", m=" << m() << ", |omega|=" << omega().size()
      << ", r0=" << domain().radius;
  if (sum()) out << ", s=" << sum()->real() << (sum()->imag() < 0 ? "" : "+") << sum()->imag() << "i";
  out << ")";
  return out.str();
}

double ConditionalDensity::log_density(std::span<const cplx> zeta) const {
  if (static_cast<int>(zeta.size()) != impl_->m) throw DomainError("log_density: candidate length must equal m");
  if (impl_->s) check_sum(zeta, *impl_->s);
  for (const cplx z : zeta)
    if (!impl_->domain.contains(z)) return kNegInf;
  return impl_->eval(zeta);
}

LogReal gaf_log_D(std::span<const cplx> zeta, std::span<const cplx> omega, int n) {
  if (static_cast<int>(zeta.size() + omega.size()) != n) throw DomainError("gaf_log_D: |zeta| + |omega| must equal n");
  const auto sig = elem_sym_ext(concat(zeta, omega));
  std::vector<double> terms(n + 1);
  for (int k = 0; k <= n; ++k) terms[k] = 2.0 * sig[k].log_abs() - log_binom_factorial(n, k);
  return LogReal::from_log(log_sum_exp(terms));
}

double gaf_cond_logdensity(std::span<const cplx> zeta, std::span<const cplx> omega, int n,
                           std::optional<cplx> s) {
  if (static_cast<int>(zeta.size() + omega.size()) != n)
    throw DomainError("gaf_cond_logdensity: |zeta| + |omega| must equal n");
  if (s) check_sum(zeta, *s);
  const double v = vandermonde_sq_log(concat(zeta, omega)).log();
  if (v == kNegInf) return kNegInf;
  return v - (n + 1) * gaf_log_D(zeta, omega, n).log();
}

LogReal gaf_density_ratio(std::span<const cplx> zeta_a, std::span<const cplx> zeta_b,
                          std::span<const cplx> omega, int n, cplx s) {
  if (zeta_a.size() != zeta_b.size()) throw DomainError("gaf_density_ratio: candidates differ in length");
  check_sum(zeta_a, s);
  check_sum(zeta_b, s);
  // |Delta(zeta ++ omega)|^2 = |Delta(zeta)|^2 Gamma(zeta, omega)^2 |Delta(omega)|^2; the last factor cancels
  const LogReal num = vandermonde_sq_log(zeta_a) * cross_product_log(zeta_a, omega);
  const LogReal den = vandermonde_sq_log(zeta_b) * cross_product_log(zeta_b, omega);
  if (num.is_zero()) return LogReal::zero();
  if (den.is_zero()) throw DomainError("gaf_density_ratio: reference candidate has zero density");
  const logmag_t d_a = gaf_log_D(zeta_a, omega, n).log_mag;
  const logmag_t d_b = gaf_log_D(zeta_b, omega, n).log_mag;
  return LogReal{num.log_mag - den.log_mag + static_cast<logmag_t>(n + 1) * (d_b - d_a), 1};
}

double ginibre_cond_logdensity(std::span<const cplx> zeta, std::span<const cplx> omega, int n) {
  if (static_cast<int>(zeta.size() + omega.size()) != n)
    throw DomainError("ginibre_cond_logdensity: |zeta| + |omega| must equal n");
  const double v = vandermonde_sq_log(zeta).log();
  if (v == kNegInf) return kNegInf;
  return v + cross_product_log(zeta, omega).log() - real_sq_sum(zeta);
}

std::vector<cplx> disk_midpoints(const DiskDomain& domain, int res) {
  if (res < 1) throw DomainError("disk_midpoints: resolution must be >= 1");
  const double r = domain.radius;
  const double h = 2.0 * r / res;
  std::vector<cplx> out;
  for (int i = 0; i < res; ++i)
    for (int j = 0; j < res; ++j) {
      const cplx z(-r + (i + 0.5) * h, -r + (j + 0.5) * h);
      if (domain.contains(z)) out.push_back(z);
    }
  return out;
}

double disk_cell_area(const DiskDomain& domain, int res) {
  const double h = 2.0 * domain.radius / res;
  return h * h;
}

double log_grid_mass(const ConditionalDensity& density, int res, unsigned workers) {
  const int m = density.m();
  const auto& dom = density.domain();
  const std::optional<cplx> s = density.sum();
  const int dims = s ? m - 1 : m;

  if (dims == 0) {
    const cplx only = *s;
    if (!dom.contains(only)) throw InfeasibleError("log_grid_mass: the constraint set is empty");
    const std::vector<cplx> zeta{only};
    return density.log_density(zeta);
  }

  const auto nodes = disk_midpoints(dom, res);
  const double total = std::pow(static_cast<double>(nodes.size()), dims);
  if (total > kMaxQuadratureNodes) throw DomainError("log_grid_mass: grid too large for this dimension");
  const std::size_t per_tile = static_cast<std::size_t>(total / nodes.size());

  struct Tile {
    LogAccumulator acc;
    std::size_t feasible = 0;
  };
  // tile t fixes the first enumerated coordinate to nodes[t]
  const auto tiles = parallel_map(nodes.size(), workers, [&](std::size_t t) {
    Tile out;
    std::vector<cplx> zeta(m);
    std::vector<std::size_t> idx(dims, 0);
    idx[0] = t;
    for (std::size_t rest = 0; rest < per_tile; ++rest) {
      std::size_t code = rest;
      for (int d = 1; d < dims; ++d) {
        idx[d] = code % nodes.size();
        code /= nodes.size();
      }
      if (s) {
        cplx acc = *s;
        for (int d = 0; d < dims; ++d) {
          zeta[d + 1] = nodes[idx[d]];
          acc -= zeta[d + 1];
        }
        zeta[0] = acc;
        if (!dom.contains(zeta[0])) continue;
      } else {
        for (int d = 0; d < dims; ++d) zeta[d] = nodes[idx[d]];
      }
      ++out.feasible;
      out.acc.add(density.log_density(zeta));
    }
    return out;
  });

  LogAccumulator all;
  std::size_t feasible = 0;
  for (const auto& t : tiles) {
    all.merge(t.acc);
    feasible += t.feasible;
  }
  if (feasible == 0) throw InfeasibleError("log_grid_mass: no feasible grid node");
  const double v = all.value();
  if (v == kNegInf) throw InfeasibleError("log_grid_mass: density vanishes on every grid node");
  return v + dims * std::log(disk_cell_area(dom, res));
}

ConditionalDensity restrict_density(const ConditionalDensity& f0, const DiskDomain& inner,
                                    std::vector<cplx> z_between, cplx s_inner, int res, unsigned workers) {
  const double r0 = f0.domain().radius;
  if (inner.radius > r0) throw DomainError("restrict_density: inner disk must lie inside the outer disk");
  for (const cplx z : z_between)
    if (inner.contains(z) || !f0.domain().contains(z))
      throw DomainError("restrict_density: intermediate points must lie in D0 minus D");
  if (static_cast<int>(z_between.size()) >= f0.m())
    throw InfeasibleError("restrict_density: no inside points remain");
  std::optional<cplx> s;
  if (f0.sum()) {
    const double off = std::abs(*f0.sum() - sum_of(z_between) - s_inner);
    if (!(off <= kSumTolerance)) throw ConstraintError("restrict_density: s_inner must equal s0 - sum(z)");
    s = s_inner;
  }
  auto impl = std::make_shared<RestrictedImpl>(f0, f0.m() - static_cast<int>(z_between.size()),
                                               std::move(z_between), s, inner);
  // the denominator needs the evaluator itself, with log_norm still zero
  impl->log_norm = log_grid_mass(ConditionalDensity(impl), res, workers);
  return ConditionalDensity(std::move(impl));
}

}  // namespace rigidlab
