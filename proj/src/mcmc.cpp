#include "rigidlab/mcmc.hpp"

#include <algorithm>
#include <cmath>

#include "rigidlab/errors.hpp"

namespace rigidlab {

namespace {

cplx uniform_in(const DiskDomain& d, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    const double r = d.radius * std::sqrt(u(rng));
    const double th = 2.0 * M_PI * u(rng);
    const cplx z = std::polar(r, th);
    if (d.contains(z)) return z;
  }
}

}  // namespace

std::vector<cplx> apply_pair_move(std::span<const cplx> state, int i, int j, cplx delta) {
  std::vector<cplx> out(state.begin(), state.end());
  const cplx moved = out[i] + delta;
  const cplx realized = moved - out[i];
  out[i] = moved;
  out[j] -= realized;
  return out;
}

std::vector<cplx> propose_sum_preserving(std::span<const cplx> state, double step_scale, Rng& rng) {
  const int m = static_cast<int>(state.size());
  if (m < 2) throw DomainError("propose_sum_preserving: need m >= 2");
  std::uniform_int_distribution<int> first(0, m - 1), second(0, m - 2);
  const int i = first(rng);
  int j = second(rng);
  if (j >= i) ++j;
  return apply_pair_move(state, i, j, step_scale * complex_normal(rng));
}

bool metropolis_accept(double log_current, double log_proposed, Rng& rng) {
  if (log_proposed == kNegInf) return false;
  if (log_proposed >= log_current) return true;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return std::log(u(rng)) < log_proposed - log_current;
}

McmcTrace run_mcmc(const ConditionalDensity& target, std::span<const cplx> init, const McmcConfig& cfg) {
  if (!(cfg.step_scale > 0.0)) throw DomainError("run_mcmc: step_scale must be positive");
  if (cfg.steps <= 0 || cfg.burn_in < 0 || cfg.burn_in >= cfg.steps)
    throw DomainError("run_mcmc: need 0 <= burn_in < steps");
  if (cfg.thin < 1) throw DomainError("run_mcmc: thin must be >= 1");
  const bool constrained = target.constrained();
  if (constrained && target.m() < 2) throw DomainError("run_mcmc: constrained target needs m >= 2");

  std::vector<cplx> state(init.begin(), init.end());
  double current = target.log_density(state);
  if (current == kNegInf || std::isnan(current)) throw DomainError("run_mcmc: target vanishes at init");

  Rng rng(cfg.seed);
  McmcTrace trace;
  trace.target_kind = target.describe();
  double step = cfg.step_scale;
  std::int64_t window_accepts = 0, window_len = 0, post_accepts = 0;
  constexpr int kAdaptWindow = 100;
  std::uniform_int_distribution<int> coord(0, target.m() - 1);

  for (std::int64_t t = 0; t < cfg.steps; ++t) {
    std::vector<cplx> proposal;
    if (constrained) {
      proposal = propose_sum_preserving(state, step, rng);
    } else {
      proposal = state;
      proposal[coord(rng)] += step * complex_normal(rng);
    }
    bool inside = true;
    for (const cplx z : proposal) inside = inside && target.domain().contains(z);
    const double cand = inside ? target.log_density(proposal) : kNegInf;
    const bool ok = metropolis_accept(current, cand, rng);
    if (ok) {
      state = std::move(proposal);
      current = cand;
      ++trace.accepted;
    }
    if (t < cfg.burn_in) {
      if (cfg.adapt) {
        window_accepts += ok;
        if (++window_len == kAdaptWindow) {
          const double rate = static_cast<double>(window_accepts) / kAdaptWindow;
          if (rate < 0.3) step *= 0.5;
          else if (rate > 0.5) step = std::min(2.0 * step, 2.0 * target.domain().radius);
          window_accepts = window_len = 0;
        }
      }
    } else {
      post_accepts += ok;
      if ((t - cfg.burn_in + 1) % cfg.thin == 0) trace.samples.push_back(state);
    }
  }
  if (trace.accepted == 0)
    throw MixingError("run_mcmc: no proposal accepted in " + std::to_string(cfg.steps) +
                      " steps (final step " + std::to_string(step) + ", target " + trace.target_kind + ")");
  trace.acceptance_rate = static_cast<double>(post_accepts) / static_cast<double>(cfg.steps - cfg.burn_in);
  trace.final_step_scale = step;
  return trace;
}

std::vector<cplx> feasible_init(std::span<const cplx> omega, cplx s, int m, const DiskDomain& domain, Rng& rng) {
  if (m < 1) throw DomainError("feasible_init: m must be >= 1");
  auto clashes = [&](cplx z) { return std::find(omega.begin(), omega.end(), z) != omega.end(); };
  for (int attempt = 0; attempt < kFeasibleInitAttempts; ++attempt) {
    std::vector<cplx> z(m);
    cplx rest = s;
    for (int i = 1; i < m; ++i) {
      z[i] = uniform_in(domain, rng);
      rest -= z[i];
    }
    z[0] = rest;
    if (!domain.contains(z[0])) continue;
    if (std::any_of(z.begin(), z.end(), clashes)) continue;
    return z;
  }
  throw InfeasibleError("feasible_init: no point of the sum hyperplane found inside the domain");
}

}  // namespace rigidlab
