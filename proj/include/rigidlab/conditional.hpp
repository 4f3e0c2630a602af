#pragma once

// Conditional log-densities of the inside points given the outside points.
//
// GAF, degree n, inside vector zeta (m points), outside omega (n - m points):
//   log rho(zeta) = log |Delta(zeta ++ omega)|^2 - (n + 1) log D(zeta, omega)
//   D = sum_k |sigma_k(zeta ++ omega)|^2 / (n! / (n-k)!)
// supported on {sum zeta = s}. Ginibre (entries CN(0,1)):
//   log rho(zeta) = log |Delta(zeta)|^2 + log Gamma(zeta, omega)^2 - sum |zeta_i|^2.
// Every value is defined up to an additive constant that does not depend on zeta.

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rigidlab/numerics.hpp"

namespace rigidlab {

inline constexpr double kSumTolerance = 1e-9;

enum class DensityKind {
  gaf_given_omega,
  gaf_given_omega_and_sum,
  ginibre_given_omega,
  vandermonde_reference,
  restricted,
};

const char* to_string(DensityKind kind);

/// Immutable evaluator; copies share state. Safe for concurrent evaluation.
class ConditionalDensity {
 public:
  /// GAF of degree n given the outside zeros omega (and the inside sum s if
  /// supplied). m = n - |omega| must be >= 1.
  static ConditionalDensity gaf(int n, std::vector<cplx> omega, std::optional<cplx> s = std::nullopt,
                                DiskDomain domain = DiskDomain(1.0));
  static ConditionalDensity ginibre(int n, std::vector<cplx> omega, DiskDomain domain = DiskDomain(1.0));
  /// Pure |Delta(zeta)|^2 on D^m, optionally restricted to sum zeta = s.
  static ConditionalDensity vandermonde(int m, std::optional<cplx> s = std::nullopt,
                                        DiskDomain domain = DiskDomain(1.0));

  DensityKind kind() const;
  int n() const;
  int m() const;
  const std::vector<cplx>& omega() const;
  std::optional<cplx> sum() const;
  const DiskDomain& domain() const;
  bool constrained() const { return sum().has_value(); }
  std::string describe() const;

  /// Log-density at zeta. Throws DomainError on a length mismatch and
  /// ConstraintError when |sum zeta - s| > 1e-9 for constrained kinds.
  /// Returns -inf for coincident points or points outside the domain.
  double log_density(std::span<const cplx> zeta) const;

  struct Impl;
  explicit ConditionalDensity(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  const std::shared_ptr<const Impl>& impl() const { return impl_; }

 private:
  std::shared_ptr<const Impl> impl_;
};

/// log D(zeta, omega). Throws DomainError unless |zeta| + |omega| == n.
LogReal gaf_log_D(std::span<const cplx> zeta, std::span<const cplx> omega, int n);

/// log |Delta(zeta ++ omega)|^2 - (n+1) log D, evaluated from scratch.
/// When s is given, throws ConstraintError if the sum is off by more than 1e-9.
double gaf_cond_logdensity(std::span<const cplx> zeta, std::span<const cplx> omega, int n,
                           std::optional<cplx> s = std::nullopt);

/// rho(zeta_a) / rho(zeta_b) through the Gamma and Delta(zeta) factors and
/// the D ratio, without forming either density.
LogReal gaf_density_ratio(std::span<const cplx> zeta_a, std::span<const cplx> zeta_b,
                          std::span<const cplx> omega, int n, cplx s);

double ginibre_cond_logdensity(std::span<const cplx> zeta, std::span<const cplx> omega, int n);

// Midpoint quadrature over D^m, or over the sum hyperplane parametrized by
// the last m - 1 coordinates (the first is s minus the rest).

/// Midpoints of a res x res grid on the disk's bounding square that lie inside.
std::vector<cplx> disk_midpoints(const DiskDomain& domain, int res);

/// Area of one cell of the grid above.
double disk_cell_area(const DiskDomain& domain, int res);

/// log of the midpoint-rule integral of exp(log_density) over the
/// parametrization. Throws InfeasibleError when no grid node is feasible and
/// DomainError when the grid would exceed kMaxQuadratureNodes.
double log_grid_mass(const ConditionalDensity& density, int res, unsigned workers = 0);

inline constexpr double kMaxQuadratureNodes = 5e7;

/// Conditional density on the inner disk given the points z_between that lie
/// in D0 minus D: f(zeta) = f0(zeta ++ z) / integral_U f0(. ++ z). The
/// denominator comes from log_grid_mass at the given resolution. For a
/// constrained f0, s_inner must equal s0 - sum z (ConstraintError otherwise).
ConditionalDensity restrict_density(const ConditionalDensity& f0, const DiskDomain& inner,
                                    std::vector<cplx> z_between, cplx s_inner, int res,
                                    unsigned workers = 0);

}  // namespace rigidlab
