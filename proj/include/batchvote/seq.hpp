#pragma once
// Sequential offering benchmark: the planner offers the object to one agent
// at a time and the first opt-in receives it. Equilibrium strategies are the
// primitive here; outcome and correctness are derived from them.
//
// Strategies (ties always resolve to declining):
//   agent 1:  opt in outright  if mu > q
//             follow signal    if 1-q < mu <= q
//             opt out outright if mu <= 1-q
//   agent 2:  follow signal    if 1/2 < mu <= q, else opt out
//             (after observing agent 1 decline, the public belief drops; at
//             mu exactly 1/2 agent 2 is indifferent and declines)
//   agent i >= 3: opt out outright -- two visible rejections start a cascade.
//
// Correctness (probability the final state matches the true quality):
//   mu in (q, 1)      -> mu                   (always allocated)
//   mu in (1/2, q]    -> 2 mu q (1-q) + q^2   (two signal draws matter)
//   mu in [1-q, 1/2]  -> q                    (only agent 1's signal matters)
//   mu in (0, 1-q)    -> 1 - mu               (always discarded)
//
// Boundary conventions: mu = q follows the signal regime (strict inequality
// for outright opt-in), and mu = 1/2 uses the realized strategies above, so
// its correctness comes from the single-signal branch; the two middle
// branches give the same value q there, so correctness stays continuous. At
// mu = 1-q exactly the outcome keeps the single-signal rule (allocate on a
// positive first signal) even though the indifferent first agent's strategy
// is to decline; either convention yields correctness q at that point.

#include <span>
#include <vector>

#include "batchvote/types.hpp"

namespace batchvote::seq {

enum class Regime : std::uint8_t {
  HighPrior,  // mu > q: first agent takes it regardless of signal
  Upper,      // 1/2 < mu <= q: first two agents follow their signals
  Lower,      // 1-q <= mu <= 1/2: only the first agent follows the signal
  LowPrior,   // mu < 1-q: nobody opts in
};

inline Regime classify(const ModelParams& params) {
  if (params.mu > params.q) return Regime::HighPrior;
  if (params.mu > 0.5) return Regime::Upper;
  if (params.mu >= 1.0 - params.q) return Regime::Lower;
  return Regime::LowPrior;
}

// An agent's equilibrium strategy as a signal -> action map.
struct Strategy {
  enum class Rule : std::uint8_t { AlwaysOptIn, FollowSignal, AlwaysOptOut };

  Action operator()(Signal s) const {
    switch (rule) {
      case Rule::AlwaysOptIn:
        return Action::OptIn;
      case Rule::FollowSignal:
        return s == Signal::Positive ? Action::OptIn : Action::OptOut;
      case Rule::AlwaysOptOut:
        return Action::OptOut;
    }
    return Action::OptOut;
  }

  Rule rule;
};

// Equilibrium strategy of the agent at the given 1-based queue position.
inline Strategy seq_strategy(int position, const ModelParams& params) {
  if (position < 1)
    throw OutOfRangeError("position", "queue position must be >= 1, got " +
                                          std::to_string(position));
  double mu = params.mu, q = params.q;
  if (position == 1) {
    if (mu > q) return {Strategy::Rule::AlwaysOptIn};
    if (mu > 1.0 - q) return {Strategy::Rule::FollowSignal};
    return {Strategy::Rule::AlwaysOptOut};
  }
  if (position == 2) {
    if (mu > 0.5 && mu <= q) return {Strategy::Rule::FollowSignal};
    return {Strategy::Rule::AlwaysOptOut};
  }
  return {Strategy::Rule::AlwaysOptOut};
}

// Final decision given realized signals in queue order. Only the first two
// signals can matter. Requires two signals in the middle regimes, one in the
// outright regimes.
inline Decision seq_outcome(const ModelParams& params,
                            std::span<const Signal> signals) {
  Regime regime = classify(params);
  std::size_t needed =
      (regime == Regime::HighPrior || regime == Regime::LowPrior) ? 1 : 2;
  if (signals.size() < needed)
    throw InsufficientSignalsError(
        "sequential outcome needs " + std::to_string(needed) +
        " signal(s), got " + std::to_string(signals.size()));
  switch (regime) {
    case Regime::HighPrior:
      return Decision::allocate(1);
    case Regime::Upper:
      if (signals[0] == Signal::Positive) return Decision::allocate(1);
      if (signals[1] == Signal::Positive) return Decision::allocate(2);
      return Decision::discard();
    case Regime::Lower:
      if (signals[0] == Signal::Positive) return Decision::allocate(1);
      return Decision::discard();
    case Regime::LowPrior:
      return Decision::discard();
  }
  return Decision::discard();
}

// Exact correctness of the sequential mechanism.
inline CorrectnessReport seq_correctness(const ModelParams& params) {
  double mu = params.mu, q = params.q;
  double value;
  switch (classify(params)) {
    case Regime::HighPrior:
      value = mu;
      break;
    case Regime::Upper:
      value = 2.0 * mu * q * (1.0 - q) + q * q;
      break;
    case Regime::Lower:
      value = q;
      break;
    case Regime::LowPrior:
    default:
      value = 1.0 - mu;
      break;
  }
  return CorrectnessReport::exact(value, Method::ClosedForm);
}

}  // namespace batchvote::seq
