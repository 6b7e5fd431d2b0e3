#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "batchvote/oracle.hpp"
#include "batchvote/verify.hpp"

using namespace batchvote;
using Catch::Approx;

TEST_CASE("enumerated allocation probabilities") {
  ic::AllocProbs brute = oracle::brute_force_alloc_probs(3, 0.6);
  CHECK(brute.good == Approx(9.0 / 25.0).margin(1e-12));
  CHECK(brute.bad == Approx(22.0 / 75.0).margin(1e-12));

  for (int k = 1; k <= 15; k += 2) {
    ic::AllocProbs closed = ic::alloc_probs(k, 0.7);
    ic::AllocProbs enumerated = oracle::brute_force_alloc_probs(k, 0.7);
    CHECK(closed.good == Approx(enumerated.good).margin(1e-12));
    CHECK(closed.bad == Approx(enumerated.bad).margin(1e-12));
  }

  CHECK_THROWS_AS(oracle::brute_force_alloc_probs(17, 0.6), CostGuardError);
  CHECK_THROWS_AS(oracle::brute_force_alloc_probs(4, 0.6), DomainError);
}

TEST_CASE("enumerated sequential correctness") {
  CHECK(oracle::brute_force_correctness(MechanismSpec::sequential(),
                                        ModelParams(0.55, 0.6, 5))
            .value == Approx(0.624).margin(1e-12));
  CHECK(oracle::brute_force_correctness(MechanismSpec::sequential(),
                                        ModelParams(0.55, 0.6, 2))
            .value == Approx(0.624).margin(1e-12));
  // A one-agent queue has no second offer, so the two-signal closed form
  // (0.624) does not apply; only the first signal matters.
  CHECK(oracle::brute_force_correctness(MechanismSpec::sequential(),
                                        ModelParams(0.55, 0.6, 1))
            .value == Approx(0.6).margin(1e-12));
}

TEST_CASE("enumerated voting correctness") {
  CHECK(oracle::brute_force_correctness(MechanismSpec::single_batch(3),
                                        ModelParams(0.45, 0.6, 3))
            .value == Approx(0.648).margin(1e-12));

  // Batch too large for the queue: nothing is ever allocated.
  ModelParams small(0.45, 0.6, 3);
  double no_fit =
      oracle::brute_force_correctness(MechanismSpec::single_batch(5), small)
          .value;
  CHECK(no_fit == Approx(1.0 - 0.45).margin(1e-12));
  CHECK(no_fit ==
        Approx(greedy::exact_correctness(MechanismSpec::single_batch(5), small)
                   .value)
            .margin(1e-12));

  // The widest batch at 0.45 is size 7, so a 15-agent queue resolves the
  // one-shot greedy mechanism exactly.
  ModelParams wide(0.45, 0.6, 15);
  double brute =
      oracle::brute_force_correctness(MechanismSpec::greedy_horizon(1), wide)
          .value;
  CHECK(brute == Approx(binom::majority_tail(7, 0.6)).margin(1e-12));
  CHECK(brute == Approx(0.710208).margin(1e-9));
  CHECK(brute ==
        Approx(greedy::exact_correctness(MechanismSpec::greedy_horizon(1), wide)
                   .value)
            .margin(1e-10));

  // At 0.55 a 15-agent queue runs a singleton batch and then a size-9 batch
  // before the third stops fitting, so multi-batch paths are exercised.
  for (auto spec :
       {MechanismSpec::greedy_horizon(2), MechanismSpec::greedy_unbounded()}) {
    ModelParams params(0.55, 0.6, 15);
    CHECK(oracle::brute_force_correctness(spec, params).value ==
          Approx(greedy::exact_correctness(spec, params).value).margin(1e-10));
  }

  CHECK_THROWS_AS(
      oracle::brute_force_correctness(MechanismSpec::single_batch(3),
                                      ModelParams(0.45, 0.6, 16)),
      CostGuardError);
}

TEST_CASE("monte carlo estimates") {
  MechanismSpec spec = MechanismSpec::single_batch(3);
  ModelParams params(0.45, 0.6, 3);
  auto report = oracle::mc_correctness(spec, params, {40000, 11});
  REQUIRE(report.method == Method::MonteCarlo);
  REQUIRE(report.std_error > 0.0);
  CHECK(report.trials == 40000);
  CHECK(std::abs(report.value - 0.648) <= 4.0 * report.std_error);

  auto rerun = oracle::mc_correctness(spec, params, {40000, 11});
  CHECK(rerun.value == report.value);

  auto reseeded = oracle::mc_correctness(spec, params, {40000, 12});
  CHECK(std::abs(reseeded.value - 0.648) <= 4.0 * reseeded.std_error);

  CHECK_THROWS_AS(oracle::mc_correctness(spec, params, {0, 11}),
                  OutOfRangeError);
}

TEST_CASE("empirical incentive check") {
  CHECK(oracle::ic_empirical_check(3, ModelParams(0.45, 0.6)));
  CHECK_FALSE(oracle::ic_empirical_check(3, ModelParams(0.56, 0.6)));
  CHECK_FALSE(oracle::ic_empirical_check(3, ModelParams(0.3, 0.6)));
}

TEST_CASE("oracle agreement suites") {
  for (auto check : {verify::check_correctness_against_enumeration,
                     verify::check_ic_equivalence, verify::check_mc_convergence,
                     verify::check_mc_determinism}) {
    auto result = check(verify::Level::Fast);
    INFO(result.name << ": " << result.detail);
    CHECK(result.passed);
  }
}
