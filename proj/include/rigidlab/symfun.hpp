#pragma once

// Elementary symmetric functions, power sums and the series identities
// built on them.
//
// Convention: sigma_k(v) = sum over i_1 < ... < i_k of v_{i_1} ... v_{i_k},
// with no alternating sign. For a monic polynomial prod (z - r_i) the
// coefficient of z^{N-k} is therefore (-1)^k sigma_k(r).

#include <cstdint>
#include <span>
#include <vector>

#include "rigidlab/numerics.hpp"

namespace rigidlab {

inline constexpr std::size_t kMaxSymmetricPoints = 10'000;

/// sigma_0..sigma_N of an N-point vector, stored log-scaled.
struct SymmetricProfile {
  std::vector<LogComplex> sigma;  // sigma[0] == 1
  int source_len = 0;

  /// sigma_k demoted to a double complex; 0 outside 0..N.
  cplx at(int k) const;
  LogComplex log_at(int k) const;
  std::vector<ExtComplex> ext() const;
};

/// s_1..s_L stored at s[0]..s[L-1].
struct PowerSums {
  std::vector<cplx> s;
};

/// Incremental product of (1 + x_i t) with per-coefficient binary exponents.
/// Throws DomainError beyond kMaxSymmetricPoints.
std::vector<ExtComplex> elem_sym_ext(std::span<const cplx> points);

SymmetricProfile elem_sym(std::span<const cplx> points);

/// sigma of the concatenation u ++ v, by convolution of the two profiles.
SymmetricProfile sigma_concat(const SymmetricProfile& u, const SymmetricProfile& v);

PowerSums power_sums(std::span<const cplx> points, int l_max);

/// e_1..e_{l_max} from power sums via Newton's recursion
/// l e_l = sum_{i=1}^{l} (-1)^{i-1} e_{l-i} s_i.
std::vector<cplx> newton_e_from_p(const PowerSums& s, int l_max);

/// g_1..g_{r_max}: coefficients of 1 / sum_r sigma_r(zeta) u^r (g_0 = 1).
/// With these, sigma_k(omega) = sigma_k(zeta ++ omega)
///   + sum_{r=1}^{k} g_r sigma_{k-r}(zeta ++ omega).
std::vector<cplx> reciprocal_series_g(std::span<const cplx> zeta, int r_max);

/// Largest relative defect of the identity above over k = 0..|omega|,
/// each defect scaled by the largest term entering it.
double expansion_identity_residual(std::span<const cplx> zeta, std::span<const cplx> omega);

// Exact mode, used by oracle tests on small Gaussian-integer inputs.
struct GaussInt {
  std::int64_t re = 0;
  std::int64_t im = 0;
  friend bool operator==(const GaussInt&, const GaussInt&) = default;
};
std::vector<GaussInt> elem_sym_exact(std::span<const GaussInt> points);

}  // namespace rigidlab
