#pragma once

// Metropolis sampling of conditional laws. Constrained targets move along
// the sum hyperplane with pairwise +delta / -delta updates; unconstrained
// targets use single-coordinate Gaussian moves.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rigidlab/conditional.hpp"
#include "rigidlab/ensembles.hpp"

namespace rigidlab {

struct McmcConfig {
  double step_scale = 0.2;
  std::int64_t steps = 200'000;
  std::int64_t burn_in = 20'000;
  bool adapt = true;  // halve/double the step toward 30-50% acceptance, burn-in only
  std::uint64_t seed = 0;
  int thin = 10;
};

struct McmcTrace {
  std::vector<std::vector<cplx>> samples;  // post burn-in, every thin-th state
  double acceptance_rate = 0.0;            // post burn-in
  double final_step_scale = 0.0;
  std::int64_t accepted = 0;                // whole run
  std::string target_kind;
};

/// Returns state with state[i] + delta and state[j] - delta', where delta' is
/// the increment actually realized in state[i], so the sum moves by at most
/// one rounding of state[j].
std::vector<cplx> apply_pair_move(std::span<const cplx> state, int i, int j, cplx delta);

/// Uniform unordered pair, delta ~ step_scale * CN(0,1). Throws DomainError for m < 2.
std::vector<cplx> propose_sum_preserving(std::span<const cplx> state, double step_scale, Rng& rng);

/// Metropolis rule for a symmetric proposal.
bool metropolis_accept(double log_current, double log_proposed, Rng& rng);

/// Throws DomainError on a bad config or an init with zero density,
/// ConstraintError when init is off the target's sum hyperplane, and
/// MixingError when no proposal is ever accepted.
McmcTrace run_mcmc(const ConditionalDensity& target, std::span<const cplx> init, const McmcConfig& cfg);

/// m points in the domain summing to s: m - 1 uniform draws, resampled until
/// the forced last point falls inside. Points equal to an omega are redrawn.
/// Throws InfeasibleError after a bounded number of attempts.
std::vector<cplx> feasible_init(std::span<const cplx> omega, cplx s, int m, const DiskDomain& domain, Rng& rng);

inline constexpr int kFeasibleInitAttempts = 100'000;

}  // namespace rigidlab
