#include <catch2/catch_amalgamated.hpp>

#include "batchvote/types.hpp"

using namespace batchvote;

TEST_CASE("model params validate their domain") {
  CHECK_NOTHROW(ModelParams(0.5, 0.6));
  CHECK_NOTHROW(ModelParams(0.001, 0.999, 1));

  CHECK_THROWS_AS(ModelParams(0.0, 0.6), OutOfRangeError);
  CHECK_THROWS_AS(ModelParams(1.0, 0.6), OutOfRangeError);
  CHECK_THROWS_AS(ModelParams(-0.2, 0.6), OutOfRangeError);
  CHECK_THROWS_AS(ModelParams(0.5, 0.5), OutOfRangeError);
  CHECK_THROWS_AS(ModelParams(0.5, 1.0), OutOfRangeError);
  CHECK_THROWS_AS(ModelParams(0.5, 0.3), OutOfRangeError);
  CHECK_THROWS_AS(ModelParams(0.5, 0.6, 0), OutOfRangeError);

  try {
    ModelParams(0.5, 0.5);
    FAIL("expected OutOfRangeError");
  } catch (const OutOfRangeError& e) {
    CHECK(std::string(e.field()) == "q");
  }
}

TEST_CASE("defaults") {
  ModelParams params(0.5, 0.6);
  CHECK(params.population == kDefaultPopulation);
  CHECK(kDefaultPopulation == 345);
}

TEST_CASE("mechanism specs carry their shape") {
  MechanismSpec seq = MechanismSpec::sequential();
  CHECK(seq.kind == MechanismSpec::Kind::Sequential);
  CHECK_FALSE(seq.is_voting());
  CHECK(seq.name() == "sequential");

  MechanismSpec single = MechanismSpec::single_batch(5);
  CHECK(single.kind == MechanismSpec::Kind::SingleBatch);
  CHECK(single.batch_size == 5);
  CHECK(single.is_voting());
  CHECK(single.name() == "single-batch(5)");

  MechanismSpec g2 = MechanismSpec::greedy_horizon(2);
  CHECK(g2.horizon == 2);
  CHECK(g2.name() == "greedy(2)");

  CHECK(MechanismSpec::greedy_unbounded().name() == "greedy");
}

TEST_CASE("even or non-positive batch sizes are rejected") {
  CHECK_THROWS_AS(MechanismSpec::single_batch(2), DomainError);
  CHECK_THROWS_AS(MechanismSpec::single_batch(0), DomainError);
  CHECK_THROWS_AS(MechanismSpec::single_batch(-3), DomainError);
  CHECK_THROWS_WITH(MechanismSpec::single_batch(4),
                    Catch::Matchers::ContainsSubstring("batch size must be odd"));
  CHECK_THROWS_AS(MechanismSpec::greedy_horizon(0), DomainError);
}

TEST_CASE("decisions") {
  Decision give = Decision::allocate(7);
  CHECK(give.allocated);
  REQUIRE(give.recipient.has_value());
  CHECK(*give.recipient == 7);

  Decision keep = Decision::discard();
  CHECK_FALSE(keep.allocated);
  CHECK_FALSE(keep.recipient.has_value());
}

TEST_CASE("enum names") {
  CHECK(std::string(to_string(Quality::Good)) == "good");
  CHECK(std::string(to_string(Quality::Bad)) == "bad");
  CHECK(std::string(to_string(Signal::Positive)) == "positive");
  CHECK(std::string(to_string(Signal::Negative)) == "negative");
  CHECK(std::string(to_string(Action::OptIn)) == "opt-in");
  CHECK(std::string(to_string(Action::OptOut)) == "opt-out");
  CHECK(std::string(to_string(Method::ClosedForm)) == "closed-form");
  CHECK(std::string(to_string(Method::ExactDP)) == "exact-dp");
  CHECK(std::string(to_string(Method::BruteForce)) == "brute-force");
  CHECK(std::string(to_string(Method::MonteCarlo)) == "monte-carlo");
}

TEST_CASE("correctness report factories") {
  CorrectnessReport exact = CorrectnessReport::exact(0.648, Method::ClosedForm);
  CHECK(exact.value == 0.648);
  CHECK(exact.method == Method::ClosedForm);
  CHECK(exact.std_error == 0.0);
  CHECK(exact.trials == 0);
  CHECK_FALSE(exact.non_ic_warning);

  CorrectnessReport mc = CorrectnessReport::monte_carlo(0.65, 0.002, 1000);
  CHECK(mc.method == Method::MonteCarlo);
  CHECK(mc.std_error == 0.002);
  CHECK(mc.trials == 1000);
}
