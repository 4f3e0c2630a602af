#pragma once

// Estimators on sampled configurations: inverse power sums of the outside
// zeros with a smooth dyadic partition, their tails, X_n, the coefficient
// perturbations eta_l, the E_n / Y_n sums, and the Newton-chain evaluators.

#include <optional>
#include <span>
#include <vector>

#include "rigidlab/ensembles.hpp"
#include "rigidlab/numerics.hpp"

namespace rigidlab {

/// Radial bump phi supported on [r0, 3 r0], equal to 1 on [3r0/2, 2r0],
/// rising on (r0, 3r0/2) twice as fast as it falls on (2r0, 3r0), so that
/// phi(r0 + r) = 1 - phi(2r0 + 2r). Built from the smooth step
/// psi(t) = e(t) / (e(t) + e(1 - t)), e(t) = exp(-1/t).
///
/// Pieces: level 0 is phi_tilde (1 on [r0, 2r0], then phi's descent) and
/// level j >= 1 is phi(x / 2^j). Consecutive levels overlap only where one
/// rises and the other falls, so the pieces sum to 1 on [r0, inf).
class BumpFamily {
 public:
  explicit BumpFamily(double r0 = 1.0);

  double r0() const { return r0_; }
  double phi(double x) const;
  double phi_dyadic(int j, double x) const;
  double phi_tilde(double x) const;
  /// phi_tilde for j == 0, phi_dyadic(j, .) for j >= 1.
  double piece(int j, double x) const;
  /// sum_{j >= k} piece(j, x) in closed form (k >= 1).
  double tail_weight(int k, double x) const;
  /// Largest level whose piece can be nonzero at x.
  int top_level(double x) const;

  static double smooth_step(double t);

 private:
  double r0_;
};

struct InversePowerSums {
  std::vector<cplx> s;        // S_l = sum omega^-l, l = 1..L at s[l-1]
  std::vector<double> s_abs;  // sum |omega|^-l
  std::vector<std::vector<cplx>> psi;      // psi[j][l-1]: level-j smoothed piece
  std::vector<std::vector<double>> gamma;  // same with |omega|^-l
};

/// Throws DomainError if l_max < 1 or some omega lies inside the disk.
InversePowerSums inverse_power_sums(std::span<const cplx> omega, int l_max, const BumpFamily& bump);

struct TailReport {
  int l = 0;
  int k = 0;
  cplx tau{0.0, 0.0};   // sum_{j >= k} psi_{2^j, l}
  double tau_abs = 0.0; // same with |omega|^-l
};

/// Throws DomainError if k < 1 or l < 1.
TailReport tail(std::span<const cplx> omega, int l, int k, const BumpFamily& bump);

/// X_n = |sum 1/omega| + |sum 1/omega^2| + sum 1/|omega|^3.
double x_n(std::span<const cplx> omega, double r0);

/// eta_l for all l = 0..n:
///   eta_l = (-1)^(n-l) xi_n sigma_{n-l}(omega) / sqrt(n!/l!) - xi_l.
/// The sign factor makes eta vanish when omega holds all roots. For l < m
/// sigma_{n-l}(omega) is 0 and eta_l = -xi_l.
std::vector<cplx> eta_all(const GafInstance& g, const SplitConfiguration& cfg);

/// Single eta_l; throws DomainError unless m <= l <= n.
cplx eta_from_instance(const GafInstance& g, const SplitConfiguration& cfg, int l);

struct YnEn {
  int m = 0;
  double e_n = 0.0;
  // index i - 2 for i = 2..m; matrices are [i-2][j-2]
  std::vector<cplx> l0;
  std::vector<double> m0;
  std::vector<std::vector<cplx>> l;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> n_;
  double y_n = 0.0;
};

/// E_n, L_0i, M_0i, L_ij, M_ij, N_ij and Y_n with |eta_l^(n)| in place of the
/// dominating eta_l. Throws DomainError for m < 2.
YnEn yn_en(const GafInstance& g, const SplitConfiguration& cfg, int m);

/// |sum_{l=1}^{C} conj(z_{l+i-m}) z_{l+j-m} l!| with z = (z_1..z_C); indices
/// outside 1..C count as 0.
double f_ij_eval(std::span<const cplx> z, int i, int j, int m);

/// (1/h) sum_{l=L}^{L+h-1} |z_{l-m}|^2 l!, same index convention.
double f_0_eval(std::span<const cplx> z, int m, int L, int h);

/// z_l = P_l(psi_1, ..., psi_l), l = 1..l_max, from the inverse power sums
/// of omega; with k_cut the power sums keep only dyadic levels 0..k_cut.
/// Evaluated in quad precision, then rounded.
std::vector<cplx> newton_z_chain(std::span<const cplx> omega, std::optional<int> k_cut, int l_max,
                                 const BumpFamily& bump);

}  // namespace rigidlab
