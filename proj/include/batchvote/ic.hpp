#pragma once
// Incentive-compatibility analysis of a single majority-vote batch.
//
// For an opt-in agent in a batch of odd size K where everyone else votes
// their signal, the chance of personally receiving the object is
//
//   good = sum_{y=(K+1)/2}^{K} (1/y) C(K-1, y-1) q^{y-1} (1-q)^{K-y}
//   bad  = sum_{y=(K+1)/2}^{K} (1/y) C(K-1, y-1) (1-q)^{y-1} q^{K-y}
//
// conditional on the object being good resp. bad. Truth-telling is a strict
// best response exactly when the prior lies inside the open interval
//
//   I_K = ( P(X_K <= (K-1)/2) ,
//           q^2 L / (q^2 L + (1-q)^2 T) )   with T = P(X_K >= (K+1)/2),
//                                                L = 1 - T,
//
// whose endpoints are the priors making a positive- resp. negative-signal
// agent exactly indifferent. Endpoints shrink toward 0 as K grows and
// consecutive intervals overlap, so the incentive-compatible batch sizes for
// a prior form a contiguous range of odd integers [min_k, max_k].
//
// Numerics: interval endpoints are computed with long double internals and
// rounded outward (lower down, upper up), making the stored interval the
// tightest double superset of the real one. The membership test is a raw
// strict comparison with no epsilon, and the sweeps used downstream place
// grid points exactly on closed-form endpoints (for example q/2 + 1/4 at
// q = 0.6 lands on the 0.005 grid), so every double must classify exactly as
// it would against the infinite-precision endpoints; outward rounding is
// what delivers that, since no double fits between a rounded endpoint and
// the real one.

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "batchvote/binom.hpp"
#include "batchvote/types.hpp"

namespace batchvote::ic {

// Hard cap for scans over candidate batch sizes; overridable per call (the
// CLI wires the BATCHVOTE_KMAX environment variable into it).
inline constexpr int kDefaultKMax = 20001;

// Per-recipient allocation probabilities conditional on true quality.
struct AllocProbs {
  double good;
  double bad;
};

// Open interval of priors for which truthful voting is strictly optimal.
struct IcInterval {
  double lower;
  double upper;
};

// Contiguous range of incentive-compatible odd batch sizes.
struct BatchBounds {
  int min_k;
  int max_k;
};

// Expected utilities of the two actions for a given signal; opting out is
// the zero of the (unnormalized) utility scale.
struct UtilityPair {
  double opt_in;
  double opt_out;  // always 0
};

namespace detail {

inline void require_model_q(double q) {
  if (!(q > 0.5) || !(q < 1.0))
    throw OutOfRangeError("q", "q must lie in (0.5,1), got " +
                                   std::to_string(q));
}

// Directed rounding of long double intermediates; exact doubles pass through.
inline double round_down(long double x) {
  double d = static_cast<double>(x);
  if (static_cast<long double>(d) > x)
    d = std::nextafter(d, -std::numeric_limits<double>::infinity());
  return d;
}

inline double round_up(long double x) {
  double d = static_cast<double>(x);
  if (static_cast<long double>(d) < x)
    d = std::nextafter(d, std::numeric_limits<double>::infinity());
  return d;
}

}  // namespace detail

// Direct evaluation of the defining sums. Each term is pmf(K-1, p, y-1)/y,
// summed with compensation.
inline AllocProbs alloc_probs(int k, double q) {
  binom::detail::require_odd_batch(k);
  detail::require_model_q(q);
  binom::detail::Kahan<double> good, bad;
  for (long y = (k + 1) / 2; y <= k; ++y) {
    double inv = 1.0 / static_cast<double>(y);
    good.add(inv * binom::detail::pmf_impl<double>(k - 1, q, y - 1));
    bad.add(inv * binom::detail::pmf_impl<double>(k - 1, 1.0 - q, y - 1));
  }
  return {good.sum, bad.sum};
}

// Same quantities through the tail identity (1/y) C(K-1,y-1) = (1/K) C(K,y):
//   good = P(X_K >= (K+1)/2) / (q K),  bad = P(X'_K >= (K+1)/2) / ((1-q) K)
// with X ~ Binomial(K, q) and X' ~ Binomial(K, 1-q). Kept as a separate
// route so tests can pit the two against each other.
inline AllocProbs alloc_probs_from_tails(int k, double q) {
  binom::detail::require_odd_batch(k);
  detail::require_model_q(q);
  double t_good = binom::detail::majority_tail_impl<double>(k, q);
  double t_bad = binom::detail::majority_tail_impl<double>(k, 1.0 - q);
  return {t_good / (q * k), t_bad / ((1.0 - q) * k)};
}

// Unnormalized expected utility of an action given the agent's signal, with
// every other batch member voting truthfully. Receiving a good object is
// worth +1, a bad one -1, no object 0; the common positive normalization
// P(signal) is dropped, which preserves signs and indifference points.
inline double expected_utility(Action action, Signal signal, int k,
                               const ModelParams& params) {
  if (action == Action::OptOut) return 0.0;
  AllocProbs ap = alloc_probs(k, params.q);
  double mu = params.mu, q = params.q;
  if (signal == Signal::Positive)
    return mu * q * ap.good - (1.0 - mu) * (1.0 - q) * ap.bad;
  return mu * (1.0 - q) * ap.good - (1.0 - mu) * q * ap.bad;
}

inline UtilityPair expected_utilities(Signal signal, int k,
                                      const ModelParams& params) {
  return {expected_utility(Action::OptIn, signal, k, params), 0.0};
}

// Open interval I_K of incentive-compatible priors.
inline IcInterval ic_interval(int k, double q) {
  binom::detail::require_odd_batch(k);
  detail::require_model_q(q);
  if (k == 1) return {1.0 - q, q};  // closed form, exact
  using LD = long double;
  LD lq = static_cast<LD>(q);
  LD t = binom::detail::majority_tail_impl<LD>(k, lq);        // P(majority | good)
  LD l = binom::detail::majority_tail_impl<LD>(k, 1 - lq);    // P(majority | bad) = 1 - t
  LD q2 = lq * lq, p2 = (1 - lq) * (1 - lq);
  LD upper = q2 * l / (q2 * l + p2 * t);
  return {detail::round_down(l), detail::round_up(upper)};
}

// Strict membership of the prior in I_K. Equivalent to requiring a strictly
// positive opt-in utility after a positive signal and strictly negative
// after a negative one; a prior exactly at an endpoint makes one signal type
// indifferent, and indifferent agents decline, so endpoints are excluded.
inline bool is_ic(int k, const ModelParams& params) {
  IcInterval iv = ic_interval(k, params.q);
  return iv.lower < params.mu && params.mu < iv.upper;
}

// Lazily grown cache of I_K for a fixed precision q. The interval depends
// only on (K, q), so sweeps and dynamic programs share one table per q
// instead of recomputing tails per belief. Not safe for concurrent mutation;
// use one instance per thread.
class IcTable {
 public:
  explicit IcTable(double q) : q_(q) { detail::require_model_q(q); }

  double q() const { return q_; }

  const IcInterval& interval(int k) {
    binom::detail::require_odd_batch(k);
    std::size_t idx = static_cast<std::size_t>((k - 1) / 2);
    while (intervals_.size() <= idx)
      intervals_.push_back(
          ic_interval(static_cast<int>(intervals_.size()) * 2 + 1, q_));
    return intervals_[idx];
  }

  bool is_ic(int k, double mu) {
    const IcInterval& iv = interval(k);
    return iv.lower < mu && mu < iv.upper;
  }

  // Contiguous range of incentive-compatible odd batch sizes for the prior,
  // or nullopt when mu >= q (no batch size is incentive-compatible).
  // Scans odd K upward; since upper endpoints strictly decrease the scan
  // stops once they fall to mu or below. Throws SearchExhaustedError if the
  // cap is hit first.
  std::optional<BatchBounds> batch_bounds(double mu, int k_max = kDefaultKMax) {
    if (!(mu > 0.0) || !(mu < 1.0))
      throw OutOfRangeError("mu", "mu must lie in (0,1), got " +
                                      std::to_string(mu));
    if (mu >= q_) return std::nullopt;
    int first = 0, last = 0;
    for (int k = 1;; k += 2) {
      if (k > k_max) throw SearchExhaustedError(k_max);
      const IcInterval& iv = interval(k);
      if (iv.upper <= mu) break;  // all later intervals sit strictly lower
      if (iv.lower < mu) {
        if (first == 0) first = k;
        last = k;
      }
    }
    if (first == 0)
      // Unreachable for mu < q: K = 1 is incentive-compatible near q and
      // lower endpoints decay to 0, so some interval must contain mu.
      throw DomainError("no incentive-compatible batch size found below cap");
    return BatchBounds{first, last};
  }

  // Largest incentive-compatible batch size at the prior, provided it fits
  // within `remaining` queue slots; nullopt when it does not. The compatible
  // range is contiguous (both endpoints decrease in K), so once the scan
  // passes `remaining` with the range still open the greedy batch must
  // exceed the budget and its exact size no longer matters; the scan stops
  // there instead of running to the true maximum. At deep beliefs that
  // maximum can reach thousands, so the cap keeps schedule queries
  // O(remaining) interval constructions.
  std::optional<int> fitting_batch(double mu, long remaining,
                                   int k_max = kDefaultKMax) {
    if (!(mu > 0.0) || !(mu < 1.0))
      throw OutOfRangeError("mu", "mu must lie in (0,1), got " +
                                      std::to_string(mu));
    if (mu >= q_) throw DomainError("greedy batch requested at belief >= q");
    int last = 0;
    for (int k = 1;; k += 2) {
      if (k > k_max) throw SearchExhaustedError(k_max);
      const IcInterval& iv = interval(k);
      if (iv.upper <= mu) break;  // range closed: last is the true maximum
      if (k > remaining) return std::nullopt;  // maximum exceeds the budget
      if (iv.lower < mu) last = k;
    }
    if (last == 0)
      throw DomainError("no incentive-compatible batch size found below cap");
    return last;
  }

 private:
  double q_;
  std::vector<IcInterval> intervals_;  // index i holds I_{2i+1}
};

inline std::optional<BatchBounds> batch_bounds(const ModelParams& params,
                                               int k_max = kDefaultKMax) {
  IcTable table(params.q);
  return table.batch_bounds(params.mu, k_max);
}

}  // namespace batchvote::ic
