#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "batchvote/greedy.hpp"
#include "batchvote/verify.hpp"

using namespace batchvote;
using Catch::Approx;

namespace {

std::vector<Signal> sig(std::initializer_list<int> bits) {
  std::vector<Signal> out;
  for (int b : bits)
    out.push_back(b ? Signal::Positive : Signal::Negative);
  return out;
}

}  // namespace

TEST_CASE("posterior update") {
  CHECK(greedy::posterior_update(0.5, 1, 1, 0.6) == Approx(0.6).margin(1e-15));
  CHECK(greedy::posterior_update(0.5, 1, 0, 0.7) == Approx(0.3).margin(1e-15));
  // Balanced votes leave the belief unchanged.
  CHECK(greedy::posterior_update(0.37, 4, 2, 0.8) ==
        Approx(0.37).margin(1e-15));

  // Agrees with the direct Bayes quotient.
  for (double mu : {0.05, 0.3, 0.62})
    for (double q : {0.55, 0.7, 0.9})
      for (int yes = 0; yes <= 5; ++yes) {
        double num = mu * std::pow(q, yes) * std::pow(1 - q, 5 - yes);
        double den =
            num + (1 - mu) * std::pow(1 - q, yes) * std::pow(q, 5 - yes);
        CHECK(greedy::posterior_update(mu, 5, yes, q) ==
              Approx(num / den).epsilon(1e-12));
      }

  // Extreme log-odds stay inside the open unit interval.
  CHECK(greedy::posterior_update(0.5, 601, 601, 0.9) < 1.0);
  CHECK(greedy::posterior_update(0.5, 601, 0, 0.9) > 0.0);

  CHECK_THROWS_AS(greedy::posterior_update(0.0, 3, 1, 0.6), OutOfRangeError);
  CHECK_THROWS_AS(greedy::posterior_update(1.0, 3, 1, 0.6), OutOfRangeError);
  CHECK_THROWS_AS(greedy::posterior_update(0.5, 0, 0, 0.6), OutOfRangeError);
  CHECK_THROWS_AS(greedy::posterior_update(0.5, 3, 4, 0.6), OutOfRangeError);
  CHECK_THROWS_AS(greedy::posterior_update(0.5, 3, -1, 0.6), OutOfRangeError);
}

TEST_CASE("single batch run") {
  ModelParams params(0.45, 0.6, 5);
  auto signals = sig({1, 1, 0, 1, 0});
  RunTrace trace = greedy::run_mechanism(MechanismSpec::single_batch(3),
                                         params, Quality::Good, signals, 7);

  REQUIRE(trace.batches.size() == 1);
  CHECK(trace.batches[0].size == 3);
  CHECK(trace.batches[0].yes_votes == 2);  // consults only the first three
  CHECK(trace.batches[0].posterior ==
        Approx(greedy::posterior_update(0.45, 3, 2, 0.6)).margin(1e-12));
  REQUIRE(trace.decision.allocated);
  int r = trace.decision.recipient.value();
  CHECK((r == 1 || r == 2));  // uniform over the opt-in positions

  RunTrace again = greedy::run_mechanism(MechanismSpec::single_batch(3),
                                         params, Quality::Good, signals, 7);
  CHECK(again.decision.recipient == trace.decision.recipient);

  CHECK(trace.seed == 7);
  CHECK(trace.true_quality == Quality::Good);
  CHECK(trace.signals.size() == 5);

  auto short_signals = sig({1, 1});
  CHECK_THROWS_AS(greedy::run_mechanism(MechanismSpec::single_batch(3), params,
                                        Quality::Good, short_signals, 7),
                  InsufficientSignalsError);
}

TEST_CASE("high priors allocate outright") {
  ModelParams params(0.7, 0.6, 4);
  auto signals = sig({0, 0, 0, 0});
  RunTrace trace = greedy::run_mechanism(MechanismSpec::greedy_unbounded(),
                                         params, Quality::Bad, signals, 3);
  REQUIRE(trace.decision.allocated);
  CHECK(trace.decision.recipient == 1);
  REQUIRE(trace.batches.size() == 1);
  CHECK(trace.batches[0].size == 1);
  CHECK(trace.batches[0].yes_votes == 1);
  CHECK(trace.batches[0].posterior ==
        Approx(greedy::posterior_update(0.7, 1, 1, 0.6)).margin(1e-15));
}

TEST_CASE("sequential run trace") {
  ModelParams params(0.55, 0.6, 5);
  auto signals = sig({0, 1, 1, 0, 0});
  RunTrace trace = greedy::run_mechanism(MechanismSpec::sequential(), params,
                                         Quality::Good, signals, 0);
  REQUIRE(trace.decision.allocated);
  CHECK(trace.decision.recipient == 2);
  REQUIRE(trace.batches.size() == 2);
  // Belief after the first decline: 0.22 / 0.49.
  CHECK(trace.batches[0].posterior == Approx(22.0 / 49.0).margin(1e-12));
  CHECK(trace.batches[1].posterior == Approx(0.55).margin(1e-12));
}

TEST_CASE("single batch correctness") {
  CHECK(greedy::single_batch_correctness(3, 0.6).value ==
        Approx(0.648).margin(1e-15));
  CHECK(greedy::single_batch_correctness(1, 0.6).value == 0.6);

  auto flagged = greedy::single_batch_correctness(3, ModelParams(0.56, 0.6));
  CHECK(flagged.non_ic_warning);
  CHECK(flagged.value == Approx(0.648).margin(1e-15));
  CHECK_FALSE(
      greedy::single_batch_correctness(3, ModelParams(0.45, 0.6))
          .non_ic_warning);

  // The prior integrates out: majority votes are right with the same tail
  // probability under either quality.
  for (double mu : {0.05, 0.2, 0.45, 0.59}) {
    auto report = greedy::exact_correctness(MechanismSpec::single_batch(5),
                                            ModelParams(mu, 0.6));
    CHECK(report.value ==
          Approx(binom::majority_tail(5, 0.6)).margin(1e-12));
    CHECK(report.method == Method::ExactDP);
  }
}

TEST_CASE("greedy correctness chain") {
  ModelParams params(0.55, 0.6);

  double c1 =
      greedy::exact_correctness(MechanismSpec::greedy_horizon(1), params)
          .value;
  double c2 =
      greedy::exact_correctness(MechanismSpec::greedy_horizon(2), params)
          .value;
  double c3 =
      greedy::exact_correctness(MechanismSpec::greedy_horizon(3), params)
          .value;
  double cu =
      greedy::exact_correctness(MechanismSpec::greedy_unbounded(), params)
          .value;

  // The widest batch at 0.55 is a singleton; a second batch (size 9 at the
  // fallen belief) adds real value.
  CHECK(c1 == 0.6);
  CHECK(c2 == Approx(0.6893818368).margin(1e-10));
  CHECK(c2 > c1);
  CHECK(c3 > c2);
  CHECK(cu >= c3);
}

TEST_CASE("voting collapses above q") {
  for (auto spec :
       {MechanismSpec::single_batch(3), MechanismSpec::greedy_horizon(1),
        MechanismSpec::greedy_horizon(2), MechanismSpec::greedy_unbounded()}) {
    auto report = greedy::exact_correctness(spec, ModelParams(0.75, 0.6));
    CHECK(report.value == 0.75);
    CHECK(report.method == Method::ExactDP);
  }
}

TEST_CASE("no-incentives threshold") {
  CHECK(greedy::no_incentives_threshold(ModelParams(0.5, 0.6)) == 172.5);
  CHECK(greedy::no_incentives_threshold(ModelParams(0.5, 0.8, 7)) == 3.5);

  // ceil(threshold) is the smallest signal count whose posterior log-odds are
  // nonnegative.
  for (double q : {0.6, 0.7, 0.8})
    for (double mu : {0.1, 0.25, 0.4, 0.55, 0.7, 0.9})
      for (int population : {5, 45, 345}) {
        ModelParams params(mu, q, population);
        double ybar = greedy::no_incentives_threshold(params);
        if (std::abs(ybar - std::round(ybar)) < 1e-9) continue;  // knife edge
        double lambda = std::log(q / (1.0 - q));
        double ell0 = std::log(mu) - std::log1p(-mu);
        int scan = population + 1;
        for (int y = 0; y <= population; ++y)
          if (ell0 + (2.0 * y - population) * lambda >= 0.0) {
            scan = y;
            break;
          }
        INFO("mu=" << mu << " q=" << q << " population=" << population);
        CHECK(static_cast<int>(std::ceil(ybar)) == scan);
      }
}

TEST_CASE("full-information upper bound") {
  auto ub = greedy::upper_bound_correctness(ModelParams(0.5, 0.6));
  CHECK(ub.value == Approx(0.99991351605443246).margin(1e-15));
  CHECK(ub.value > 0.999);
  CHECK(ub.value == binom::tail(binom::BinomialSpec(345, 0.6), 173.0));

  CHECK(greedy::upper_bound_correctness(ModelParams(0.5, 0.6, 1)).value ==
        0.6);

  double prev = 0.0;
  for (int population = 1; population <= 29; population += 2) {
    double value =
        greedy::upper_bound_correctness(ModelParams(0.5, 0.6, population))
            .value;
    CHECK(value > prev);
    prev = value;
  }

  // At the symmetric prior, conditioning on quality changes nothing: the two
  // error rates coincide, so the mixed evaluation equals the plain tail.
  for (double q : {0.6, 0.7, 0.8})
    for (int population : {5, 45, 345}) {
      ModelParams params(0.5, q, population);
      CHECK(greedy::upper_bound_correctness_mixed(params).value ==
            Approx(greedy::upper_bound_correctness(params).value)
                .margin(1e-14));
    }
}

TEST_CASE("a further batch helps exactly when it fits") {
  ic::IcTable table(0.6);

  ModelParams tight(0.005, 0.6);  // first batch is size 193 of 345
  CHECK(verify::next_batch_fits(tight, 1, table));
  CHECK_FALSE(verify::next_batch_fits(tight, 2, table));
  double g1 =
      greedy::exact_correctness(MechanismSpec::greedy_horizon(1), tight).value;
  double g2 =
      greedy::exact_correctness(MechanismSpec::greedy_horizon(2), tight).value;
  double gu =
      greedy::exact_correctness(MechanismSpec::greedy_unbounded(), tight)
          .value;
  CHECK(g2 == g1);
  CHECK(gu == g1);

  ModelParams roomy(0.05, 0.6);
  CHECK(verify::next_batch_fits(roomy, 2, table));
  CHECK(greedy::exact_correctness(MechanismSpec::greedy_horizon(2), roomy)
            .value >
        greedy::exact_correctness(MechanismSpec::greedy_horizon(1), roomy)
            .value);
}

TEST_CASE("mechanism-level suites") {
  for (auto check :
       {verify::check_trace_invariants, verify::check_horizon_dominance,
        verify::check_benchmark_orderings,
        verify::check_upper_bound_dominates}) {
    auto result = check(verify::Level::Fast);
    INFO(result.name << ": " << result.detail);
    CHECK(result.passed);
  }
}
