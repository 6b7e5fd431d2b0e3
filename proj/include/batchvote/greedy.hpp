#pragma once
// Multi-batch voting mechanisms and their exact evaluation.
//
// A voting mechanism partitions the queue prefix into odd-size batches. Each
// batch votes simultaneously; on a strict majority of opt-ins the object
// goes to a uniformly random opt-in voter, otherwise the public belief is
// updated and the next batch (greedy choice: the largest batch size that
// keeps truthful voting strictly optimal at the current belief) is offered,
// as long as it still fits in the queue. Beliefs move in log-odds space:
// a batch of size K with Y opt-ins shifts the log-odds by
// (2Y - K) log(q/(1-q)).
//
// Exact correctness comes from a dynamic program over reachable beliefs:
// conditional on the true quality, votes are iid Binomial(K, q) or
// Binomial(K, 1-q), so the pair (P(allocate | good), P(discard | bad)) is
// Markov in (belief, agents used, batches left). States are memoized on the
// log-odds bucketed at 1e-12; within one run all reachable log-odds differ
// by integer multiples of log(q/(1-q)), so bucketing only canonicalizes
// floating-point noise.

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "batchvote/binom.hpp"
#include "batchvote/ic.hpp"
#include "batchvote/rng.hpp"
#include "batchvote/seq.hpp"
#include "batchvote/types.hpp"

namespace batchvote::greedy {

namespace detail {

inline double logit(double p) { return std::log(p) - std::log1p(-p); }

// Logistic function clamped into the open unit interval so downstream
// validation never sees an exact 0 or 1 even for extreme log-odds.
inline double sigmoid(double x) {
  double v;
  if (x >= 0) {
    v = 1.0 / (1.0 + std::exp(-x));
  } else {
    double e = std::exp(x);
    v = e / (1.0 + e);
  }
  if (v <= 0.0) return std::numeric_limits<double>::min();
  if (v >= 1.0) return 1.0 - std::numeric_limits<double>::epsilon() / 2;
  return v;
}

}  // namespace detail

// Posterior belief after observing a batch of size k cast yes opt-in votes,
// computed in log-odds form. Equals the Bayes update
//   mu' = mu q^Y (1-q)^{K-Y} / (mu q^Y (1-q)^{K-Y} + (1-mu) q^{K-Y} (1-q)^Y).
inline double posterior_update(double prev, int k, int yes, double q) {
  if (!(prev > 0.0) || !(prev < 1.0))
    throw OutOfRangeError("prev", "belief must lie in (0,1), got " +
                                      std::to_string(prev));
  ic::detail::require_model_q(q);
  if (k < 1)
    throw OutOfRangeError("k", "batch size must be >= 1, got " +
                                   std::to_string(k));
  if (yes < 0 || yes > k)
    throw OutOfRangeError("yes", "vote count must lie in [0, k], got " +
                                     std::to_string(yes));
  double lambda = std::log(q / (1.0 - q));
  return detail::sigmoid(detail::logit(prev) + (2.0 * yes - k) * lambda);
}

namespace detail {

// Next batch size for the spec at 1-based batch number j, or no batch:
// either the schedule is over or the batch does not fit in the remaining
// queue. Greedy variants take the largest incentive-compatible size at the
// current belief; the fixed variant runs its one batch and stops.
inline std::optional<int> next_batch_size(const MechanismSpec& spec, int j,
                                          double belief, long remaining,
                                          ic::IcTable& table, int k_max) {
  switch (spec.kind) {
    case MechanismSpec::Kind::SingleBatch:
      if (j > 1 || spec.batch_size > remaining) return std::nullopt;
      return spec.batch_size;
    case MechanismSpec::Kind::GreedyHorizon:
      if (j > spec.horizon) return std::nullopt;
      break;
    case MechanismSpec::Kind::GreedyUnbounded:
      break;
    case MechanismSpec::Kind::Sequential:
      throw DomainError("sequential mechanism has no batch schedule");
  }
  return table.fitting_batch(belief, remaining, k_max);
}

// Shared mechanism engine. next_signal() yields signals in queue order and
// is called once per consulted signal; record, when non-null, receives one
// BatchRecord per batch. The recipient draw (seeded, keyed by batch number)
// happens only in recording mode; the allocate/discard decision never
// depends on it.
template <class SignalFn>
Decision run_engine(const MechanismSpec& spec, const ModelParams& params,
                    SignalFn&& next_signal, ic::IcTable& table,
                    std::uint64_t seed, std::vector<BatchRecord>* record,
                    int k_max = ic::kDefaultKMax) {
  const double q = params.q;
  const double lambda = std::log(q / (1.0 - q));

  if (spec.kind == MechanismSpec::Kind::Sequential) {
    seq::Regime regime = seq::classify(params);
    double ell = logit(params.mu);
    auto offer = [&](int position, int yes) {
      ell += (2.0 * yes - 1) * lambda;
      if (record) record->push_back({position, 1, yes, sigmoid(ell)});
    };
    if (regime == seq::Regime::HighPrior) {
      offer(1, 1);
      return Decision::allocate(1);
    }
    bool first_follows = regime != seq::Regime::LowPrior;
    int y1 = first_follows && next_signal() == Signal::Positive ? 1 : 0;
    offer(1, y1);
    if (y1 == 1) return Decision::allocate(1);
    if (params.population >= 2) {
      bool second_follows = regime == seq::Regime::Upper;
      int y2 = second_follows && next_signal() == Signal::Positive ? 1 : 0;
      offer(2, y2);
      if (y2 == 1) return Decision::allocate(2);
    }
    return Decision::discard();
  }

  // Voting variants. At or above belief q no batch size is incentive-
  // compatible and every agent opts in, so the object is allocated outright;
  // recorded as one batch of size 1 with a single opt-in.
  if (params.mu >= q) {
    if (record)
      record->push_back({1, 1, 1, posterior_update(params.mu, 1, 1, q)});
    return Decision::allocate(1);
  }

  double ell = logit(params.mu);
  long used = 0;
  std::vector<int> opted_in;  // 1-based queue positions, recording mode only
  for (int j = 1;; ++j) {
    auto k_next = next_batch_size(spec, j, sigmoid(ell),
                                  params.population - used, table, k_max);
    if (!k_next) break;
    int k = *k_next;
    int yes = 0;
    int first_in = 0;
    if (record) opted_in.clear();
    for (int i = 0; i < k; ++i) {
      if (next_signal() == Signal::Positive) {
        ++yes;
        int position = static_cast<int>(used) + i + 1;
        if (first_in == 0) first_in = position;
        if (record) opted_in.push_back(position);
      }
    }
    ell += (2.0 * yes - k) * lambda;
    if (record) record->push_back({j, k, yes, sigmoid(ell)});
    used += k;
    if (yes >= (k + 1) / 2) {
      int recipient = first_in;
      if (record) {
        rng::Stream pick(rng::derive(seed, rng::Domain::Recipient,
                                     static_cast<std::uint64_t>(j)));
        recipient = opted_in[pick.below(static_cast<std::uint32_t>(yes))];
      }
      return Decision::allocate(recipient);
    }
  }
  return Decision::discard();
}

}  // namespace detail

// Runs one realization of the mechanism. signals must hold one signal per
// queue member; seed drives only the recipient draw among opt-in voters.
inline RunTrace run_mechanism(const MechanismSpec& spec,
                              const ModelParams& params, Quality true_quality,
                              std::span<const Signal> signals,
                              std::uint64_t seed,
                              int k_max = ic::kDefaultKMax) {
  if (static_cast<long>(signals.size()) !=
      static_cast<long>(params.population))
    throw InsufficientSignalsError(
        "expected one signal per queue member: population = " +
        std::to_string(params.population) + ", got " +
        std::to_string(signals.size()) + " signals");
  std::size_t cursor = 0;
  auto next_signal = [&]() {
    if (cursor >= signals.size())
      throw InsufficientSignalsError("signal sequence exhausted");
    return signals[cursor++];
  };
  ic::IcTable table(params.q);
  std::vector<BatchRecord> batches;
  Decision decision = detail::run_engine(spec, params, next_signal, table,
                                         seed, &batches, k_max);
  return RunTrace{params,
                  spec,
                  true_quality,
                  std::vector<Signal>(signals.begin(), signals.end()),
                  std::move(batches),
                  decision,
                  seed};
}

// Correctness of one truthful majority vote over a batch of size k:
// P(X_k >= (k+1)/2) with X_k ~ Binomial(k, q). The caller owns incentive
// compatibility; the params overload flags (but still evaluates) a batch
// size outside the incentive-compatible range for the prior.
inline CorrectnessReport single_batch_correctness(int k, double q) {
  return CorrectnessReport::exact(binom::majority_tail(k, q),
                                  Method::ClosedForm);
}

inline CorrectnessReport single_batch_correctness(int k,
                                                  const ModelParams& params) {
  CorrectnessReport report = single_batch_correctness(k, params.q);
  report.non_ic_warning = !ic::is_ic(k, params);
  return report;
}

namespace detail {

struct DpKey {
  std::int64_t bucket;
  long used;
  int batches_left;  // -1 when unbounded
  bool operator==(const DpKey&) const = default;
};

struct DpKeyHash {
  std::size_t operator()(const DpKey& k) const {
    std::uint64_t h = rng::mix(static_cast<std::uint64_t>(k.bucket));
    h = rng::mix(h ^ static_cast<std::uint64_t>(k.used));
    h = rng::mix(h ^ static_cast<std::uint64_t>(
                         static_cast<std::int64_t>(k.batches_left)));
    return static_cast<std::size_t>(h);
  }
};

// (P(allocate | good), P(discard | bad)) from a state of the voting DP.
class CorrectnessDp {
 public:
  CorrectnessDp(const MechanismSpec& spec, const ModelParams& params,
                int k_max)
      : spec_(spec),
        params_(params),
        k_max_(k_max),
        table_(params.q),
        lambda_(std::log(params.q / (1.0 - params.q))) {}

  std::pair<double, double> value(double ell, long used, int batches_left,
                                  int batch_number) {
    DpKey key{std::llround(ell * 1e12), used, batches_left};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    std::pair<double, double> out{0.0, 1.0};  // no batch: discard
    auto k_next = next_batch_size(spec_, batch_number, sigmoid(ell),
                                  params_.population - used, table_, k_max_);
    if (k_next) {
      int k = *k_next;
      int majority = (k + 1) / 2;
      double a = 0.0, b = 0.0;
      for (int y = 0; y < majority; ++y) {  // minority: belief falls, recurse
        double pg = binom::detail::pmf_impl<double>(k, params_.q, y);
        double pb = binom::detail::pmf_impl<double>(k, 1.0 - params_.q, y);
        auto child = value(ell + (2.0 * y - k) * lambda_, used + k,
                           batches_left < 0 ? -1 : batches_left - 1,
                           batch_number + 1);
        a += pg * child.first;
        b += pb * child.second;
      }
      for (int y = majority; y <= k; ++y)  // majority: allocate, stop
        a += binom::detail::pmf_impl<double>(k, params_.q, y);
      out = {a, b};
    }
    memo_.emplace(key, out);
    return out;
  }

 private:
  MechanismSpec spec_;
  ModelParams params_;
  int k_max_;
  ic::IcTable table_;
  double lambda_;
  std::unordered_map<DpKey, std::pair<double, double>, DpKeyHash> memo_;
};

}  // namespace detail

// Exact correctness P(final state matches true quality) of a mechanism.
// Sequential delegates to the closed form; voting variants at mu >= q
// allocate outright (correct with probability mu); otherwise the belief DP
// runs. Recipient randomization integrates out of correctness entirely.
// A fixed batch size is the one schedule a caller can pick badly, so only
// single-batch reports carry the incentive-compatibility flag; greedy
// schedules never run a non-compatible batch and sequential play is truthful
// by construction.
inline CorrectnessReport exact_correctness(const MechanismSpec& spec,
                                           const ModelParams& params,
                                           int k_max = ic::kDefaultKMax) {
  if (spec.kind == MechanismSpec::Kind::Sequential)
    return seq::seq_correctness(params);
  CorrectnessReport report = CorrectnessReport::exact(params.mu,
                                                      Method::ExactDP);
  if (params.mu < params.q) {
    int batches_left = -1;
    if (spec.kind == MechanismSpec::Kind::SingleBatch) batches_left = 1;
    if (spec.kind == MechanismSpec::Kind::GreedyHorizon)
      batches_left = spec.horizon;
    detail::CorrectnessDp dp(spec, params, k_max);
    auto [alloc_given_good, discard_given_bad] =
        dp.value(detail::logit(params.mu), 0, batches_left, 1);
    report.value = params.mu * alloc_given_good +
                   (1.0 - params.mu) * discard_given_bad;
  }
  if (spec.kind == MechanismSpec::Kind::SingleBatch)
    report.non_ic_warning = !ic::is_ic(spec.batch_size, params);
  return report;
}

// Opt-in threshold of the no-incentives benchmark where the planner sees all
// population signals and allocates iff the posterior favors a good object:
//   ybar = log((1-mu)/mu) / (2 log(q/(1-q))) + population / 2.
// Allocation happens iff at least ceil(ybar) signals are positive.
inline double no_incentives_threshold(const ModelParams& params) {
  double lambda = std::log(params.q / (1.0 - params.q));
  return 0.5 * std::log((1.0 - params.mu) / params.mu) / lambda +
         0.5 * static_cast<double>(params.population);
}

// Full-information upper bound as the plain tail P(X_I >= ybar) with
// X_I ~ Binomial(population, q): the chance that the pooled signal count
// clears the allocation threshold when signals align with a good object.
inline CorrectnessReport upper_bound_correctness(const ModelParams& params) {
  binom::BinomialSpec spec(params.population, params.q);
  return CorrectnessReport::exact(
      binom::tail(spec, no_incentives_threshold(params)), Method::ClosedForm);
}

// Quality-mixed evaluation of the same benchmark: correct allocation under a
// good object plus correct rejection under a bad one, weighted by the prior.
// Exposed alongside the plain tail for comparison.
inline CorrectnessReport upper_bound_correctness_mixed(
    const ModelParams& params) {
  long n = params.population;
  double t = std::ceil(no_incentives_threshold(params));
  double alloc_good =
      t <= 0 ? 1.0
             : binom::detail::pmf_range_sum<double>(n, params.q,
                                                    static_cast<long>(t), n);
  double reject_bad =
      t <= 0 ? 0.0
             : binom::detail::pmf_range_sum<double>(n, 1.0 - params.q, 0,
                                                    static_cast<long>(t) - 1);
  return CorrectnessReport::exact(
      params.mu * alloc_good + (1.0 - params.mu) * reject_bad,
      Method::ClosedForm);
}

}  // namespace batchvote::greedy
