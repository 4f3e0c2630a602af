#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "rigidlab/conditional.hpp"
#include "rigidlab/diagnostics.hpp"
#include "rigidlab/errors.hpp"
#include "rigidlab/mcmc.hpp"
#include "rigidlab/symfun.hpp"

using namespace rigidlab;

namespace {

std::vector<cplx> outside_points(int count, double rmax, Rng& rng) {
  std::uniform_real_distribution<double> rad(1.0001, rmax), th(0.0, 2 * M_PI);
  std::vector<cplx> w(count);
  for (auto& p : w) p = std::polar(rad(rng), th(rng));
  return w;
}

// GAF sample whose split has exactly m inside points, none of the outside
// points within sep of the unit circle.
std::pair<GafInstance, SplitConfiguration> instance_with_m(int n, int m, double sep, Rng& rng) {
  for (;;) {
    auto g = sample_gaf(n, rng);
    auto cfg = split(g.roots, DiskDomain(1.0), rng);
    if (cfg.m != m || g.flagged) continue;
    if (std::any_of(cfg.omega.begin(), cfg.omega.end(), [&](cplx w) { return std::abs(w) < 1.0 + sep; })) continue;
    return {std::move(g), std::move(cfg)};
  }
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

}  // namespace

TEST_CASE("bump profile") {
  const BumpFamily b(1.0);
  CHECK(b.phi(1.0) == 0.0);
  CHECK(b.phi(3.0) == 0.0);
  CHECK(b.phi(0.5) == 0.0);
  CHECK(b.phi(1.5) == 1.0);
  CHECK(b.phi(1.8) == 1.0);
  CHECK(b.phi(2.0) == 1.0);
  CHECK(b.phi(1.25) == doctest::Approx(0.5));
  CHECK(b.phi(2.5) == doctest::Approx(0.5));
  // ascent twice as fast as descent
  for (double r = 0.0; r <= 0.5; r += 0.01) CHECK(b.phi(1.0 + r) == doctest::Approx(1.0 - b.phi(2.0 + 2 * r)).epsilon(1e-14));
  CHECK(b.phi_tilde(1.0) == 1.0);
  CHECK(b.phi_tilde(1.2) == 1.0);
  CHECK(b.phi_tilde(2.7) == b.phi(2.7));
  CHECK(b.phi_dyadic(2, 6.0) == 1.0);
  CHECK_THROWS_AS(BumpFamily(0.0), DomainError);
}

TEST_CASE("partition of unity at 1000 radii") {
  for (const double r0 : {1.0, 0.37}) {
    const BumpFamily b(r0);
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
      const double x = r0 * std::pow(10.0, 4.0 * (i + 0.5) / 1000.0);
      double total = 0;
      for (int j = 0; j <= 40; ++j) total += b.piece(j, x);
      worst = std::max(worst, std::fabs(total - 1.0));
      // the closed-form tail counts the same pieces
      double upper = 0;
      for (int j = 3; j <= 40; ++j) upper += b.piece(j, x);
      CHECK(b.tail_weight(3, x) == doctest::Approx(upper).epsilon(1e-12));
    }
    CHECK(worst <= 1e-9);
  }
}

TEST_CASE("bump second differences stay bounded") {
  const BumpFamily b(1.0);
  const double h = 1e-4;
  double worst = 0;
  for (double x = 0.9; x <= 3.1; x += 1e-3) {
    const double d2 = (b.phi(x + h) - 2 * b.phi(x) + b.phi(x - h)) / (h * h);
    worst = std::max(worst, std::fabs(d2));
  }
  CHECK(std::isfinite(worst));
  CHECK(worst < 100.0);
}

TEST_CASE("inverse power sums") {
  const BumpFamily b(1.0);
  const std::vector<cplx> one{{2.0, 0.0}};
  const auto s = inverse_power_sums(one, 6, b);
  for (int l = 1; l <= 6; ++l) {
    CHECK(s.s[l - 1].real() == doctest::Approx(std::pow(2.0, -l)));
    CHECK(s.s_abs[l - 1] == doctest::Approx(std::pow(2.0, -l)));
  }
  const std::vector<cplx> pair{{1.3, 0.8}, {1.3, -0.8}};
  for (const cplx v : inverse_power_sums(pair, 8, b).s) CHECK(std::fabs(v.imag()) <= 1e-15);

  Rng rng(71);
  for (int t = 0; t < 50; ++t) {
    const auto w = outside_points(50, 60.0, rng);
    const auto r = inverse_power_sums(w, 5, b);
    for (int l = 1; l <= 5; ++l) {
      oracle::cplx direct(0, 0), total(0, 0);
      for (const cplx p : w) direct += std::pow(p, -l);
      for (const auto& level : r.psi) total += level[l - 1];
      CHECK(std::abs(total - direct) <= 1e-9 * std::abs(direct));
      CHECK(std::abs(r.s[l - 1] - direct) <= 1e-12 * std::abs(direct));
    }
  }
  const std::vector<cplx> bad{{3.0, 0.0}, {0.5, 0.1}};
  CHECK_THROWS_AS(inverse_power_sums(bad, 3, b), DomainError);
  CHECK_THROWS_AS(inverse_power_sums(one, 0, b), DomainError);
}

TEST_CASE("tails: support, telescoping, closed form") {
  const BumpFamily b(1.0);
  Rng rng(72);
  // nothing beyond 2^k r0: the tail vanishes
  const auto near = outside_points(40, 4.0, rng);
  CHECK(tail(near, 2, 2, b).tau == cplx(0, 0));
  CHECK(tail(near, 2, 2, b).tau_abs == 0.0);

  for (int t = 0; t < 20; ++t) {
    const auto w = outside_points(50, 100.0, rng);
    const auto ips = inverse_power_sums(w, 3, b);
    for (int k = 1; k <= 5; ++k) {
      const auto a = tail(w, 2, k, b), c = tail(w, 2, k + 1, b);
      const cplx piece = k < static_cast<int>(ips.psi.size()) ? ips.psi[k][1] : cplx(0, 0);
      CHECK(std::abs(a.tau - c.tau - piece) <= 1e-12 * (1 + std::abs(a.tau)));
      cplx direct(0, 0);
      double direct_abs = 0;
      for (const cplx p : w) {
        direct += b.tail_weight(k, std::abs(p)) * std::pow(p, -2);
        direct_abs += b.tail_weight(k, std::abs(p)) * std::pow(std::abs(p), -2);
      }
      CHECK(std::abs(a.tau - direct) <= 1e-9 * (1e-12 + std::abs(direct)) + 1e-15);
      CHECK(std::fabs(a.tau_abs - direct_abs) <= 1e-9 * direct_abs + 1e-15);
    }
  }
  CHECK_THROWS_AS(tail(near, 2, 0, b), DomainError);
}

TEST_CASE("tail means decay over GAF samples at n = 80") {
  const BumpFamily b(1.0);
  double mean[3] = {0, 0, 0};
  const int samples = 500;
  for (int t = 0; t < samples; ++t) {
    Rng rng(derive_seed(73, "tail", 80, t));
    const auto g = sample_gaf(80, rng);
    const auto cfg = split(g.roots, DiskDomain(1.0), rng);
    for (int k = 2; k <= 4; ++k) mean[k - 2] += std::abs(tail(cfg.omega, 2, k, b).tau) / samples;
  }
  MESSAGE("mean |tau_2(2^k)|, k = 2,3,4: " << mean[0] << " " << mean[1] << " " << mean[2]);
  CHECK(mean[0] >= 1.5 * mean[1]);
  CHECK(mean[1] >= 1.5 * mean[2]);
}

TEST_CASE("X_n") {
  const std::vector<cplx> one{{2.0, 0.0}};
  CHECK(x_n(one, 1.0) == doctest::Approx(0.875));
  const cplx w(1.7, -2.2);
  const std::vector<cplx> opposite{w, -w};
  CHECK(x_n(opposite, 1.0) == doctest::Approx(std::abs(2.0 / (w * w)) + 2 * std::pow(std::abs(w), -3)));
  Rng rng(74);
  for (int t = 0; t < 100; ++t) {
    const auto pts = outside_points(30, 20.0, rng);
    oracle::cplx a(0, 0), c(0, 0);
    double e = 0;
    for (const cplx p : pts) {
      a += 1.0 / p;
      c += 1.0 / (p * p);
      e += 1.0 / (std::abs(p) * std::abs(p) * std::abs(p));
    }
    CHECK(x_n(pts, 1.0) == doctest::Approx(std::abs(a) + std::abs(c) + e).epsilon(1e-12));
  }
  const std::vector<cplx> inside{{0.2, 0.0}};
  CHECK_THROWS_AS(x_n(inside, 1.0), DomainError);
}

TEST_CASE("eta inverts to sigma(omega)") {
  Rng rng(75);
  for (int t = 0; t < 40; ++t) {
    const int n = 20 + 20 * (t % 3);
    const auto g = sample_gaf(n, rng);
    const auto cfg = split(g.roots, DiskDomain(1.0), rng);
    const auto sig = elem_sym(cfg.omega);
    for (int l = cfg.m; l <= n; ++l) {
      const cplx eta = eta_from_instance(g, cfg, l);
      // sigma_{n-l}(omega) = (-1)^(n-l) (xi_l + eta_l) / xi_n * sqrt(n!/l!)
      const cplx back = g.xi[l] + eta;
      const double lhs = std::log(std::abs(back)) - std::log(std::abs(g.xi[n])) +
                         0.5 * (std::lgamma(n + 1.0) - std::lgamma(l + 1.0));
      const double rhs = static_cast<double>(sig.log_at(n - l).log_mag);
      CHECK(std::fabs(lhs - rhs) <= 1e-10 * std::max(1.0, std::fabs(rhs)));
    }
    if (cfg.m > 0) CHECK_THROWS_AS(eta_from_instance(g, cfg, cfg.m - 1), DomainError);
    CHECK_THROWS_AS(eta_from_instance(g, cfg, n + 1), DomainError);
  }
}

TEST_CASE("eta vanishes when every root is outside") {
  Rng rng(76);
  for (int t = 0; t < 30; ++t) {
    const auto g = sample_gaf(30, rng);
    const auto cfg = split(g.roots, DiskDomain(1e-12), rng);
    REQUIRE(cfg.m == 0);
    double scale = 0;
    for (const cplx x : g.xi) scale = std::max(scale, std::abs(x));
    const auto eta = eta_all(g, cfg);
    for (const cplx e : eta) CHECK(std::abs(e) <= 1e-6 * scale);
  }
}

TEST_CASE("median |eta_l| does not grow with l") {
  std::vector<double> at[4];
  const int ls[4] = {5, 10, 20, 40};
  for (int t = 0; t < 200; ++t) {
    Rng rng(derive_seed(77, "eta", 80, t));
    const auto g = sample_gaf(80, rng);
    const auto cfg = split(g.roots, DiskDomain(1.0), rng);
    const auto eta = eta_all(g, cfg);
    for (int i = 0; i < 4; ++i) at[i].push_back(std::abs(eta[ls[i]]));
  }
  double med[4];
  for (int i = 0; i < 4; ++i) med[i] = median(at[i]);
  MESSAGE("median |eta_l| at l = 5,10,20,40: " << med[0] << " " << med[1] << " " << med[2] << " " << med[3]);
  // allow 15% sampling noise between consecutive checkpoints
  for (int i = 0; i + 1 < 4; ++i) CHECK(med[i + 1] <= 1.15 * med[i]);
}

TEST_CASE("E_n and Y_n at n = 4, m = 2 by hand") {
  Rng rng(78);
  for (int t = 0; t < 20; ++t) {
    const auto [g, cfg] = instance_with_m(4, 2, 0.0, rng);
    const auto r = yn_en(g, cfg, 2);
    const auto& x = g.xi;
    // eta from subset enumeration of the two outside roots
    const auto sig = oracle::subset_sigma(cfg.omega);
    std::vector<oracle::lcplx> eta(5);
    const double fact[5] = {1, 1, 2, 6, 24};
    for (int l = 0; l <= 4; ++l) {
      const int k = 4 - l;
      oracle::lcplx lead = k <= 2 ? sig[k] : oracle::lcplx(0, 0);
      lead *= oracle::lcplx(x[4]) * static_cast<long double>(std::sqrt(fact[l] / fact[4]) * (k % 2 ? -1 : 1));
      eta[l] = lead - oracle::lcplx(x[l]);
    }
    auto a = [&](int l) { return std::abs(x[l]); };
    auto e = [&](int l) { return static_cast<double>(std::abs(eta[l])); };
    double en = 0;
    for (int l = 0; l <= 4; ++l) en += std::norm(x[l]);
    // (l+2)_2 = (l+2)(l+1)
    const cplx l02 = std::conj(x[0]) * x[2] / std::sqrt(2.0) + std::conj(x[1]) * x[3] / std::sqrt(6.0) +
                     std::conj(x[2]) * x[4] / std::sqrt(12.0);
    const double m02 = a(0) * e(2) / std::sqrt(2.0) + a(1) * e(3) / std::sqrt(6.0) + a(2) * e(4) / std::sqrt(12.0);
    const double l22 = std::norm(x[2]) / 2.0 + std::norm(x[3]) / 6.0 + std::norm(x[4]) / 12.0;
    const double m22 = a(2) * e(2) / 2.0 + a(3) * e(3) / 6.0 + a(4) * e(4) / 12.0;
    const double n22 = e(2) * e(2) / 2.0 + e(3) * e(3) / 6.0 + e(4) * e(4) / 12.0;
    CHECK(r.e_n == doctest::Approx(en).epsilon(1e-12));
    CHECK(r.e_n >= std::norm(x[0]));
    CHECK(std::abs(r.l0[0] - l02) <= 1e-12 * (1 + std::abs(l02)));
    CHECK(r.m0[0] == doctest::Approx(m02).epsilon(1e-10));
    CHECK(std::abs(r.l[0][0] - l22) <= 1e-12 * (1 + l22));
    CHECK(r.m_[0][0] == doctest::Approx(m22).epsilon(1e-10));
    CHECK(r.n_[0][0] == doctest::Approx(n22).epsilon(1e-10));
    CHECK(r.y_n == doctest::Approx(std::abs(l02) + m02 + l22 + 2 * m22 + n22).epsilon(1e-10));
  }
  Rng other(79);
  const auto [g, cfg] = instance_with_m(4, 2, 0.0, other);
  CHECK_THROWS_AS(yn_en(g, cfg, 1), DomainError);
}

TEST_CASE("D ratio against Y_n / E_n: fitted constant is stable in n") {
  // per instance: c = max over pairs on the sum line of |D'/D - 1| / (Y_n/E_n)
  double med[3];
  const int ns[3] = {20, 40, 80};
  for (int a = 0; a < 3; ++a) {
    const int n = ns[a];
    std::vector<double> cs;
    Rng rng(derive_seed(80, "upperlower", n, 0));
    for (int t = 0; t < 50; ++t) {
      const auto [g, cfg] = instance_with_m(n, 2, 0.0, rng);
      const auto r = yn_en(g, cfg, 2);
      const double bound = r.y_n / r.e_n;
      double worst = 0;
      for (int p = 0; p < 20; ++p) {
        const auto z1 = feasible_init(cfg.omega, cfg.s, 2, cfg.domain, rng);
        const double ld = static_cast<double>(gaf_log_D(z1, cfg.omega, n).log_mag -
                                              gaf_log_D(cfg.zeta, cfg.omega, n).log_mag);
        worst = std::max(worst, std::fabs(std::expm1(ld)));
      }
      cs.push_back(worst / bound);
    }
    med[a] = median(cs);
  }
  MESSAGE("median fitted c (n = 20, 40, 80): " << med[0] << " " << med[1] << " " << med[2]);
  const double hi = *std::max_element(med, med + 3), lo = *std::min_element(med, med + 3);
  CHECK(lo > 0.0);
  CHECK(hi <= 3.0 * lo);
}

TEST_CASE("outside factor against X_n: fitted constant is stable in n") {
  double med[3];
  const int ns[3] = {20, 40, 80};
  for (int a = 0; a < 3; ++a) {
    const int n = ns[a];
    std::vector<double> cs;
    Rng rng(derive_seed(81, "nr2", n, 0));
    for (int t = 0; t < 50; ++t) {
      const auto [g, cfg] = instance_with_m(n, 2, 0.05, rng);
      const double xn = x_n(cfg.omega, 1.0);
      double worst = 0;
      for (int p = 0; p < 20; ++p) {
        const std::vector<cplx> z1{oracle::uniform_in_disk(rng, 1.0), oracle::uniform_in_disk(rng, 1.0)};
        const std::vector<cplx> z2{oracle::uniform_in_disk(rng, 1.0), oracle::uniform_in_disk(rng, 1.0)};
        // log of the squared ratio prod |zeta' - omega|^2 / prod |zeta - omega|^2
        const double lr = static_cast<double>(cross_product_log(z2, cfg.omega).log_mag -
                                              cross_product_log(z1, cfg.omega).log_mag);
        worst = std::max(worst, std::fabs(lr));
      }
      cs.push_back(worst / (2 * 2 * xn));
    }
    med[a] = median(cs);
  }
  MESSAGE("median fitted c (n = 20, 40, 80): " << med[0] << " " << med[1] << " " << med[2]);
  const double hi = *std::max_element(med, med + 3), lo = *std::min_element(med, med + 3);
  CHECK(lo > 0.0);
  CHECK(hi <= 3.0 * lo);
}

TEST_CASE("E[X_n] is stable between n = 40 and n = 80") {
  double mean[2] = {0, 0};
  for (int a = 0; a < 2; ++a) {
    const int n = a == 0 ? 40 : 80;
    for (int t = 0; t < 500; ++t) {
      Rng rng(derive_seed(82, "xn", n, t));
      const auto g = sample_gaf(n, rng);
      const auto cfg = split(g.roots, DiskDomain(1.0), rng);
      mean[a] += x_n(cfg.omega, 1.0) / 500;
    }
  }
  MESSAGE("E[X_n] at n = 40, 80: " << mean[0] << " " << mean[1]);
  CHECK(std::isfinite(mean[0]));
  CHECK(std::isfinite(mean[1]));
  CHECK(std::max(mean[0], mean[1]) <= 2.0 * std::min(mean[0], mean[1]));
}

TEST_CASE("f_ij and f_0") {
  const std::vector<cplx> zero(6, cplx(0, 0));
  CHECK(f_ij_eval(zero, 2, 3, 2) == 0.0);
  CHECK(f_0_eval(zero, 2, 5, 3) == 0.0);

  // |z_{l-m}| = 1/sqrt(l!) on the window L..L+h-1
  const int m = 2, L = 6, h = 4;
  std::vector<cplx> z(12, cplx(0, 0));
  for (int l = L; l < L + h; ++l) z[l - m - 1] = std::polar(1.0 / std::sqrt(std::tgamma(l + 1.0)), 0.3 * l);
  CHECK(f_0_eval(z, m, L, h) == doctest::Approx(1.0).epsilon(1e-14));

  // three terms: z_1, z_2, z_3, with i = 3, j = 2, m = 2
  const std::vector<cplx> z3{{0.5, 0.1}, {-0.2, 0.7}, {1.1, -0.4}};
  // l = 1: conj(z_2) z_1 * 1!, l = 2: conj(z_3) z_2 * 2!, l = 3: conj(z_4) z_3 -> 0
  const cplx hand = std::conj(z3[1]) * z3[0] * 1.0 + std::conj(z3[2]) * z3[1] * 2.0;
  CHECK(f_ij_eval(z3, 3, 2, 2) == doctest::Approx(std::abs(hand)).epsilon(1e-14));
  // i = j = m: sum |z_l|^2 l!
  CHECK(f_ij_eval(z3, 2, 2, 2) == doctest::Approx(std::norm(z3[0]) + 2 * std::norm(z3[1]) + 6 * std::norm(z3[2])).epsilon(1e-14));
}

TEST_CASE("Newton chain") {
  const BumpFamily b(1.0);
  const cplx w(1.5, 2.0);
  const std::vector<cplx> one{w};
  const auto z = newton_z_chain(one, std::nullopt, 5, b);
  CHECK(std::abs(z[0] - 1.0 / w) <= 1e-15);
  for (int l = 2; l <= 5; ++l) CHECK(std::abs(z[l - 1]) <= 1e-15);

  Rng rng(83);
  for (int t = 0; t < 100; ++t) {
    const int count = 1 + t % 8;
    const auto pts = outside_points(count, 8.0, rng);
    std::vector<cplx> inv;
    for (const cplx p : pts) inv.push_back(1.0 / p);
    const auto sig = oracle::subset_sigma(inv);
    const auto chain = newton_z_chain(pts, std::nullopt, count, b);
    const auto ips = inverse_power_sums(pts, 1, b);
    CHECK(std::abs(chain[0] - ips.s[0]) <= 1e-15 * std::abs(ips.s[0]));
    for (int l = 1; l <= count; ++l) {
      const cplx ref(static_cast<double>(sig[l].real()), static_cast<double>(sig[l].imag()));
      CHECK(std::abs(chain[l - 1] - ref) <= 1e-9 * std::abs(ref));
    }
  }

  // truncation keeps dyadic levels 0..k_cut
  const auto pts = outside_points(30, 40.0, rng);
  const auto ips = inverse_power_sums(pts, 1, b);
  const auto cut = newton_z_chain(pts, 1, 1, b);
  CHECK(std::abs(cut[0] - (ips.psi[0][0] + ips.psi[1][0])) <= 1e-15);
  CHECK(std::abs(cut[0] - (ips.s[0] - tail(pts, 1, 2, b).tau)) <= 1e-13);
}

TEST_CASE("sigma ratios of sampled omega follow the Newton chain") {
  // sigma_k(omega) / sigma_{n-m}(omega) = z_{n-m-k}, z_l = e_l(1 / omega)
  const BumpFamily b(1.0);
  for (const int n : {20, 40, 80}) {
    Rng rng(derive_seed(84, "chain", n, 0));
    for (int t = 0; t < 20; ++t) {
      const auto g = sample_gaf(n, rng);
      const auto cfg = split(g.roots, DiskDomain(1.0), rng);
      const int big = static_cast<int>(cfg.omega.size());
      const int lmax = std::min(big, 24);
      const auto chain = newton_z_chain(cfg.omega, std::nullopt, lmax, b);
      const auto sig = elem_sym(cfg.omega);
      const LogComplex top = sig.log_at(big);
      for (int l = 1; l <= lmax; ++l) {
        const cplx ratio = (sig.log_at(big - l) / top).to_complex();
        CHECK(std::abs(chain[l - 1] - ratio) <= 1e-7 * std::abs(ratio));
      }
    }
  }
}
