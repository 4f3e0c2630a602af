#pragma once

// Finite Gaussian polynomials f_n(z) = sum_k xi_k z^k / sqrt(k!), finite
// Ginibre spectra, and the inside/outside split of a configuration.

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rigidlab/numerics.hpp"

namespace rigidlab {

using Rng = std::mt19937_64;

/// Counter-derived seed: splitmix64 over (master, tag hash, a, b). Two calls
/// with equal arguments give equal streams, regardless of call order.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::uint64_t a,
                          std::uint64_t b = 0);

/// Standard complex Gaussian CN(0,1): independent N(0, 1/2) parts.
cplx complex_normal(Rng& rng);

/// Lexicographic order on (real, imag).
void sort_lexicographic(std::vector<cplx>& points);

struct GafInstance {
  int n = 0;
  std::vector<cplx> xi;     // xi_0..xi_n
  std::vector<cplx> roots;  // n roots, lexicographic order
  double residual = 0.0;    // max relative Newton correction over roots
  bool flagged = false;
  std::string diagnostic;
};

struct RootSolve {
  std::vector<cplx> roots;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Roots of sum_k xi_k z^k / sqrt(k!) by Aberth-Ehrlich iteration on the
/// rescaled variable w = z / sqrt(n), followed by Newton polishing.
RootSolve gaf_roots(std::span<const cplx> xi);

inline constexpr int kMaxGafDegree = 300;
inline constexpr double kRootResidualTol = 1e-8;

/// Draws xi_0..xi_n in order from `rng` and finds the roots. Degree must be
/// in [1, 300]. Failed root solves are flagged, never dropped.
GafInstance sample_gaf(int n, Rng& rng);

/// Builds an instance from given coefficients (same solver and flagging).
GafInstance gaf_from_coefficients(std::vector<cplx> xi);

/// Normwise coefficient-root defect:
///   max_k |sigma_k(roots) xi_n / sqrt(n!/(n-k)!) - (-1)^k xi_{n-k}| / max_l |xi_l|.
double coefficient_root_defect(const GafInstance& g);

struct GinibreSample {
  int n = 0;
  std::vector<cplx> eigenvalues;  // lexicographic order
  cplx trace{0.0, 0.0};
  bool flagged = false;
  std::string diagnostic;
};

/// Spectrum of an n x n matrix with i.i.d. CN(0,1) entries (bulk radius
/// sqrt(n)). Degree must be in [1, 300].
GinibreSample sample_ginibre(int n, Rng& rng);

struct SplitConfiguration {
  DiskDomain domain;
  std::vector<cplx> zeta;   // inside points, uniformly shuffled
  std::vector<cplx> omega;  // outside points, ascending modulus
  int m = 0;
  cplx s{0.0, 0.0};
};

SplitConfiguration split(std::span<const cplx> points, const DiskDomain& domain, Rng& rng);

}  // namespace rigidlab
