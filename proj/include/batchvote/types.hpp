#pragma once
// Core domain types shared by every part of the library: model parameters,
// signals/actions, mechanism descriptors, execution traces and correctness
// reports. All types are immutable value objects and safe to copy across
// threads.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace batchvote {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

// Parameter outside its admissible range; names the offending field.
class OutOfRangeError : public std::out_of_range {
 public:
  OutOfRangeError(std::string field, const std::string& message)
      : std::out_of_range(message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Precondition violation of a numeric kernel (even batch size, y out of
// support, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// The scan for incentive-compatible batch sizes hit its hard cap.
class SearchExhaustedError : public std::runtime_error {
 public:
  explicit SearchExhaustedError(int k_max)
      : std::runtime_error("batch size search exhausted at K_max = " +
                           std::to_string(k_max)),
        k_max_(k_max) {}
  int k_max() const noexcept { return k_max_; }

 private:
  int k_max_;
};

class InsufficientSignalsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Exhaustive enumeration refused because the instance is too large.
class CostGuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Elementary enumerations
// ---------------------------------------------------------------------------

// True quality of the object.
enum class Quality : std::uint8_t { Good, Bad };

// Private signal held by an agent. Generative contract used by every
// sampler: P(Positive | Good) = P(Negative | Bad) = q.
enum class Signal : std::uint8_t { Positive, Negative };

// An agent's vote.
enum class Action : std::uint8_t { OptIn, OptOut };

inline const char* to_string(Quality q) {
  return q == Quality::Good ? "good" : "bad";
}
inline const char* to_string(Signal s) {
  return s == Signal::Positive ? "positive" : "negative";
}
inline const char* to_string(Action a) {
  return a == Action::OptIn ? "opt-in" : "opt-out";
}

// ---------------------------------------------------------------------------
// Model parameters
// ---------------------------------------------------------------------------

// Default queue length; matches the population used by the comparison
// sweeps.
inline constexpr int kDefaultPopulation = 345;

// The world: prior belief mu = P(quality = Good), signal precision
// q = P(signal matches quality), and the queue length.
//
// Invariants enforced at construction: 0 < mu < 1, 0.5 < q < 1,
// population >= 1.
struct ModelParams {
  ModelParams(double mu_, double q_, int population_ = kDefaultPopulation)
      : mu(mu_), q(q_), population(population_) {
    if (!(mu > 0.0) || !(mu < 1.0))
      throw OutOfRangeError("mu", "mu must lie in (0,1), got " +
                                      std::to_string(mu));
    if (!(q > 0.5) || !(q < 1.0))
      throw OutOfRangeError("q", "q must lie in (0.5,1), got " +
                                     std::to_string(q));
    if (population < 1)
      throw OutOfRangeError("population", "population must be >= 1, got " +
                                              std::to_string(population));
  }

  double mu;
  double q;
  int population;
};

inline ModelParams validate_params(double mu, double q,
                                   int population = kDefaultPopulation) {
  return ModelParams(mu, q, population);
}

// ---------------------------------------------------------------------------
// Mechanism descriptors
// ---------------------------------------------------------------------------

// Which allocation mechanism to run or evaluate.
//   Sequential      - one-at-a-time offers, first opt-in wins.
//   SingleBatch(K)  - one majority vote over a batch of K agents (K odd).
//   GreedyHorizon(J)- up to J batches, size chosen greedily per batch.
//   GreedyUnbounded - greedy batches until allocation or queue exhaustion.
struct MechanismSpec {
  enum class Kind : std::uint8_t {
    Sequential,
    SingleBatch,
    GreedyHorizon,
    GreedyUnbounded,
  };

  static MechanismSpec sequential() { return {Kind::Sequential, 0, 0}; }

  static MechanismSpec single_batch(int k) {
    if (k < 1 || k % 2 == 0)
      throw DomainError("batch size must be odd and >= 1, got " +
                        std::to_string(k));
    return {Kind::SingleBatch, k, 0};
  }

  static MechanismSpec greedy_horizon(int j) {
    if (j < 1)
      throw DomainError("greedy horizon must be >= 1, got " +
                        std::to_string(j));
    return {Kind::GreedyHorizon, 0, j};
  }

  static MechanismSpec greedy_unbounded() {
    return {Kind::GreedyUnbounded, 0, 0};
  }

  bool is_voting() const { return kind != Kind::Sequential; }

  std::string name() const {
    switch (kind) {
      case Kind::Sequential:
        return "sequential";
      case Kind::SingleBatch:
        return "single-batch(" + std::to_string(batch_size) + ")";
      case Kind::GreedyHorizon:
        return "greedy(" + std::to_string(horizon) + ")";
      case Kind::GreedyUnbounded:
        return "greedy";
    }
    return "?";
  }

  Kind kind;
  int batch_size;  // SingleBatch only
  int horizon;     // GreedyHorizon only

 private:
  MechanismSpec(Kind kind_, int k_, int j_)
      : kind(kind_), batch_size(k_), horizon(j_) {}
};

// ---------------------------------------------------------------------------
// Execution records
// ---------------------------------------------------------------------------

// Planner's final decision. recipient is the 1-based queue position and is
// present exactly when the object was allocated.
struct Decision {
  static Decision allocate(int recipient) { return {true, recipient}; }
  static Decision discard() { return {false, std::nullopt}; }

  bool allocated;
  std::optional<int> recipient;

 private:
  Decision(bool a, std::optional<int> r) : allocated(a), recipient(r) {}
};

// One batch of a run: 1-based batch number, odd batch size, opt-in count,
// and the belief after observing the votes (posterior update applied to the
// previous belief and this batch's outcome).
struct BatchRecord {
  int index;
  int size;
  int yes_votes;
  double posterior;
};

// One realized execution of a mechanism.
struct RunTrace {
  ModelParams params;
  MechanismSpec spec;
  Quality true_quality;
  std::vector<Signal> signals;
  std::vector<BatchRecord> batches;
  Decision decision;
  std::uint64_t seed;  // drives recipient randomization only
};

// ---------------------------------------------------------------------------
// Correctness reports
// ---------------------------------------------------------------------------

// How a correctness value was obtained. Exact methods carry no sampling
// error: std_error = 0 and trials = 0.
enum class Method : std::uint8_t { ClosedForm, ExactDP, BruteForce, MonteCarlo };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::ClosedForm:
      return "closed-form";
    case Method::ExactDP:
      return "exact-dp";
    case Method::BruteForce:
      return "brute-force";
    case Method::MonteCarlo:
      return "monte-carlo";
  }
  return "?";
}

struct CorrectnessReport {
  static CorrectnessReport exact(double value, Method method) {
    return {value, method, 0.0, 0, false};
  }
  static CorrectnessReport monte_carlo(double value, double std_error,
                                       long long trials) {
    return {value, Method::MonteCarlo, std_error, trials, false};
  }

  double value;
  Method method;
  double std_error;
  long long trials;
  // Set when a single-batch correctness value was requested for a batch size
  // that is not incentive-compatible at the caller's prior; the value is
  // still the truthful-voting formula.
  bool non_ic_warning;
};

}  // namespace batchvote
