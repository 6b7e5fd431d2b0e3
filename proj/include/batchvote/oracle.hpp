#pragma once
// Independent verification oracles: exhaustive enumeration over signal
// profiles and seeded Monte Carlo. These deliberately re-derive results by
// brute force rather than calling the closed forms they are meant to check.

#include <cmath>
#include <cstdint>
#include <vector>

#include "batchvote/greedy.hpp"
#include "batchvote/ic.hpp"
#include "batchvote/rng.hpp"
#include "batchvote/seq.hpp"
#include "batchvote/types.hpp"

namespace batchvote::oracle {

// Enumeration ceiling: 2^15 profiles.
inline constexpr int kMaxEnumeration = 15;

struct McConfig {
  long long trials;
  std::uint64_t seed;
  int k_max = ic::kDefaultKMax;
};

namespace detail {

// pow_pos[c] = p^c, pow_neg[c] = (1-p)^c for c in [0, n].
struct ProfileWeights {
  ProfileWeights(int n, double p) : pow_pos(n + 1), pow_neg(n + 1) {
    pow_pos[0] = pow_neg[0] = 1.0;
    for (int c = 1; c <= n; ++c) {
      pow_pos[c] = pow_pos[c - 1] * p;
      pow_neg[c] = pow_neg[c - 1] * (1.0 - p);
    }
  }
  double weight(int positives, int n) const {
    return pow_pos[positives] * pow_neg[n - positives];
  }
  std::vector<double> pow_pos, pow_neg;
};

}  // namespace detail

// Allocation probabilities for a designated opt-in agent by exhausting all
// 2^k signal profiles. Agent 1's action is pinned to opt in (the quantity
// conditions on that choice; the agent's own signal only carries probability
// weight), everyone else votes truthfully, and on a majority the object
// lands on each opt-in voter with probability 1/votes.
inline ic::AllocProbs brute_force_alloc_probs(int k, double q) {
  binom::detail::require_odd_batch(k);
  ic::detail::require_model_q(q);
  if (k > kMaxEnumeration)
    throw CostGuardError("alloc-prob enumeration limited to K <= " +
                         std::to_string(kMaxEnumeration) + ", got " +
                         std::to_string(k));
  double out[2] = {0.0, 0.0};
  for (int world = 0; world < 2; ++world) {  // 0: good, 1: bad
    double p_pos = world == 0 ? q : 1.0 - q;
    detail::ProfileWeights w(k, p_pos);
    binom::detail::Kahan<double> acc;
    for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
      int positives = __builtin_popcount(mask);
      int votes = 1 + __builtin_popcount(mask >> 1);  // agent 1 opts in
      if (votes >= (k + 1) / 2)
        acc.add(w.weight(positives, k) / votes);
    }
    out[world] = acc.sum;
  }
  return {out[0], out[1]};
}

namespace detail {

// Allocation decision of a voting mechanism on a signal bitmask, mirroring
// the engine arithmetic batch for batch.
inline bool voting_allocates(const MechanismSpec& spec,
                             const ModelParams& params, ic::IcTable& table,
                             std::uint32_t mask) {
  if (params.mu >= params.q) return true;
  double lambda = std::log(params.q / (1.0 - params.q));
  double ell = greedy::detail::logit(params.mu);
  long used = 0;
  for (int j = 1;; ++j) {
    auto k_next = greedy::detail::next_batch_size(
        spec, j, greedy::detail::sigmoid(ell), params.population - used, table,
        ic::kDefaultKMax);
    if (!k_next) return false;
    int k = *k_next;
    int yes = __builtin_popcount((mask >> used) & ((1u << k) - 1u));
    if (yes >= (k + 1) / 2) return true;
    ell += (2.0 * yes - k) * lambda;
    used += k;
  }
}

}  // namespace detail

// Exact correctness by exhausting quality and all signal profiles, running
// the mechanism deterministically on each (recipient randomness never
// affects allocate-vs-discard). Population is capped at 2^15 enumeration;
// the sequential mechanism only ever consults two signals.
inline CorrectnessReport brute_force_correctness(const MechanismSpec& spec,
                                                 const ModelParams& params) {
  double total = 0.0;
  if (spec.kind == MechanismSpec::Kind::Sequential) {
    int effective = params.population >= 2 ? 2 : 1;
    for (int world = 0; world < 2; ++world) {
      double prior = world == 0 ? params.mu : 1.0 - params.mu;
      double p_pos = world == 0 ? params.q : 1.0 - params.q;
      detail::ProfileWeights w(effective, p_pos);
      for (std::uint32_t mask = 0; mask < (1u << effective); ++mask) {
        bool allocated;
        if (effective == 2) {
          Signal signals[2] = {
              mask & 1u ? Signal::Positive : Signal::Negative,
              mask & 2u ? Signal::Positive : Signal::Negative};
          allocated = seq::seq_outcome(params, signals).allocated;
        } else {
          // One-agent queue: the first agent's strategy decides everything.
          Signal s = mask & 1u ? Signal::Positive : Signal::Negative;
          allocated =
              seq::seq_strategy(1, params)(s) == Action::OptIn;
        }
        bool correct = allocated == (world == 0);
        if (correct)
          total += prior * w.weight(__builtin_popcount(mask), effective);
      }
    }
    return CorrectnessReport::exact(total, Method::BruteForce);
  }

  int n = params.population;
  if (n > kMaxEnumeration)
    throw CostGuardError("correctness enumeration limited to population <= " +
                         std::to_string(kMaxEnumeration) + ", got " +
                         std::to_string(n));
  ic::IcTable table(params.q);
  for (int world = 0; world < 2; ++world) {
    double prior = world == 0 ? params.mu : 1.0 - params.mu;
    double p_pos = world == 0 ? params.q : 1.0 - params.q;
    detail::ProfileWeights w(n, p_pos);
    binom::detail::Kahan<double> acc;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      bool allocated = detail::voting_allocates(spec, params, table, mask);
      if (allocated == (world == 0))
        acc.add(w.weight(__builtin_popcount(mask), n));
    }
    total += prior * acc.sum;
  }
  return CorrectnessReport::exact(total, Method::BruteForce);
}

// Monte Carlo estimate of correctness. Each trial derives its own seed from
// (seed, trial index), so the estimate is a pure function of the config and
// independent of evaluation order; successes are counted in integers, so
// there is no accumulation-order effect either. Signals are drawn lazily in
// queue order as the mechanism consumes them.
inline CorrectnessReport mc_correctness(const MechanismSpec& spec,
                                        const ModelParams& params,
                                        const McConfig& config) {
  if (config.trials < 1)
    throw OutOfRangeError("trials", "trial count must be >= 1, got " +
                                        std::to_string(config.trials));
  ic::IcTable table(params.q);
  long long correct = 0;
  for (long long t = 0; t < config.trials; ++t) {
    std::uint64_t trial_seed = rng::derive(config.seed, rng::Domain::Trial,
                                           static_cast<std::uint64_t>(t));
    rng::Stream draw(rng::derive(trial_seed, rng::Domain::Sample, 0));
    Quality quality = draw.bernoulli(params.mu) ? Quality::Good : Quality::Bad;
    double p_pos = quality == Quality::Good ? params.q : 1.0 - params.q;
    auto next_signal = [&]() {
      return draw.bernoulli(p_pos) ? Signal::Positive : Signal::Negative;
    };
    Decision decision = greedy::detail::run_engine(
        spec, params, next_signal, table, trial_seed, nullptr, config.k_max);
    if (decision.allocated == (quality == Quality::Good)) ++correct;
  }
  double estimate =
      static_cast<double>(correct) / static_cast<double>(config.trials);
  double std_error = std::sqrt(estimate * (1.0 - estimate) /
                               static_cast<double>(config.trials));
  return CorrectnessReport::monte_carlo(estimate, std_error, config.trials);
}

// Recomputes the incentive constraints from enumerated allocation
// probabilities: strict gain from opting in on a positive signal, strict
// loss on a negative one. Must agree with the interval test away from
// endpoint ties.
inline bool ic_empirical_check(int k, const ModelParams& params) {
  ic::AllocProbs ap = brute_force_alloc_probs(k, params.q);
  double mu = params.mu, q = params.q;
  double gain_pos = mu * q * ap.good - (1.0 - mu) * (1.0 - q) * ap.bad;
  double gain_neg = mu * (1.0 - q) * ap.good - (1.0 - mu) * q * ap.bad;
  return gain_pos > 0.0 && gain_neg < 0.0;
}

}  // namespace batchvote::oracle
