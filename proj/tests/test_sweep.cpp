#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <string>

#include <json.hpp>

#include "batchvote/sweep.hpp"
#include "batchvote/verify.hpp"

using namespace batchvote;
using Catch::Approx;

namespace {

double as_double(const sweep::Cell& cell) {
  if (std::holds_alternative<long long>(cell))
    return static_cast<double>(std::get<long long>(cell));
  return std::get<double>(cell);
}

}  // namespace

TEST_CASE("prior grid") {
  sweep::SweepConfig config;
  auto grid = sweep::mu_grid(config);
  REQUIRE(grid.size() == 199);
  CHECK(grid.front() == 0.005);
  CHECK(grid.back() == Approx(0.995).margin(1e-12));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(grid[i] > 0.0);
    CHECK(grid[i] < 1.0);
    if (i) CHECK(grid[i] > grid[i - 1]);
  }

  config.mu_step = 0.0;
  CHECK_THROWS_AS(sweep::mu_grid(config), OutOfRangeError);
}

TEST_CASE("intervals table") {
  sweep::Table table = sweep::intervals_table(sweep::SweepConfig{});
  REQUIRE(table.columns ==
          std::vector<std::string>{"q", "k", "mu_lower", "mu_upper"});
  REQUIRE(table.rows.size() == 30);  // three q values, K = 1..19 odd

  const auto& row = table.rows[1];  // q = 0.6, K = 3
  CHECK(std::get<double>(row[0]) == 0.6);
  CHECK(std::get<long long>(row[1]) == 3);
  CHECK(std::get<double>(row[2]) == Approx(0.352).margin(1e-12));
  CHECK(std::get<double>(row[3]) == Approx(0.55).margin(1e-12));
}

TEST_CASE("optimal batch table") {
  sweep::SweepConfig config;
  config.q_values = {0.6};
  config.mu_start = 0.1;
  config.mu_stop = 0.9;
  config.mu_step = 0.2;
  sweep::Table table = sweep::optimal_batch_table(config);
  REQUIRE(table.rows.size() == 5);

  ic::IcTable cache(0.6);
  for (const auto& row : table.rows) {
    double mu = std::get<double>(row[0]);
    long long k_bar = std::get<long long>(row[2]);
    auto bounds = mu < 0.6 ? cache.batch_bounds(mu) : std::nullopt;
    CHECK(k_bar == (bounds ? bounds->max_k : 0));
  }
  CHECK(std::get<long long>(table.rows[2][2]) == 5);  // widest batch at 0.5
  CHECK(std::get<long long>(table.rows[3][2]) == 0);  // mu = 0.7 >= q
  CHECK(std::get<long long>(table.rows[4][2]) == 0);
}

TEST_CASE("comparison table") {
  sweep::SweepConfig config;
  config.q_values = {0.6, 0.7};
  config.mu_start = 0.2;
  config.mu_stop = 0.8;
  config.mu_step = 0.3;
  config.population = 45;
  sweep::Table table = sweep::comparison_table(config);
  REQUIRE(table.columns ==
          std::vector<std::string>{"mu", "q", "c_seq", "c_greedy1", "c_greedy2",
                                   "c_upper_bound"});
  REQUIRE(table.rows.size() == 6);

  // Rows come out grouped by q in configuration order, mu ascending inside
  // each group, with values identical to direct evaluation.
  std::size_t at = 0;
  for (double q : config.q_values)
    for (double mu : sweep::mu_grid(config)) {
      const auto& row = table.rows[at++];
      ModelParams params(mu, q, 45);
      CHECK(std::get<double>(row[0]) == mu);
      CHECK(std::get<double>(row[1]) == q);
      CHECK(std::get<double>(row[2]) == seq::seq_correctness(params).value);
      CHECK(std::get<double>(row[3]) ==
            greedy::exact_correctness(MechanismSpec::greedy_horizon(1), params)
                .value);
      CHECK(std::get<double>(row[4]) ==
            greedy::exact_correctness(MechanismSpec::greedy_horizon(2), params)
                .value);
      CHECK(std::get<double>(row[5]) ==
            greedy::upper_bound_correctness(params).value);
    }
}

TEST_CASE("cell formatting") {
  CHECK(sweep::format_cell(sweep::Cell{42LL}) == "42");
  CHECK(sweep::format_cell(sweep::Cell{0.5}) == "0.5");
  CHECK(sweep::format_cell(sweep::Cell{1.0}) == "1");
  CHECK(sweep::format_cell(sweep::Cell{0.648}) == "0.648");
  CHECK(sweep::format_cell(sweep::Cell{1e-13}) == "1e-13");
  CHECK(sweep::format_cell(sweep::Cell{0.99991351605443246}) ==
        "0.999913516054");
}

TEST_CASE("typed cell parsing") {
  CHECK(std::holds_alternative<long long>(sweep::parse_cell("3")));
  CHECK(std::get<long long>(sweep::parse_cell("-17")) == -17);
  CHECK(std::holds_alternative<double>(sweep::parse_cell("0.6")));
  CHECK(std::holds_alternative<double>(sweep::parse_cell("1e3")));
  CHECK(std::get<double>(sweep::parse_cell("1e3")) == 1000.0);
  CHECK_THROWS_AS(sweep::parse_cell("abc"), IoError);
  CHECK_THROWS_AS(sweep::parse_cell(""), IoError);
  CHECK_THROWS_AS(sweep::parse_cell("1.5x"), IoError);
}

TEST_CASE("csv round trip") {
  sweep::SweepConfig small;
  small.q_values = {0.6, 0.7};
  small.mu_start = 0.05;
  small.mu_stop = 0.95;
  small.mu_step = 0.05;
  small.population = 45;

  for (const sweep::Table& table :
       {sweep::intervals_table(sweep::SweepConfig{}),
        sweep::comparison_table(small)}) {
    std::string emitted = sweep::to_csv(table);
    std::istringstream in(emitted);
    sweep::Table parsed = sweep::parse_csv(in);

    REQUIRE(parsed.columns == table.columns);
    REQUIRE(parsed.rows.size() == table.rows.size());
    // Emitting the parsed table reproduces the bytes: 12 significant digits
    // survive the string -> double -> string cycle unchanged.
    CHECK(sweep::to_csv(parsed) == emitted);
    // And the parsed values sit within the 12-digit quantization of the
    // originals.
    for (std::size_t r = 0; r < table.rows.size(); ++r)
      for (std::size_t c = 0; c < table.columns.size(); ++c) {
        double want = as_double(table.rows[r][c]);
        CHECK(as_double(parsed.rows[r][c]) ==
              Approx(want).epsilon(1e-11).margin(1e-297));
      }
  }
}

TEST_CASE("csv parse failures") {
  std::istringstream empty("");
  CHECK_THROWS_AS(sweep::parse_csv(empty), IoError);

  std::istringstream ragged("a,b\n1,2\n3\n");
  CHECK_THROWS_AS(sweep::parse_csv(ragged), IoError);
}

TEST_CASE("json serialization") {
  sweep::SweepConfig config;
  config.q_values = {0.6};
  config.max_k = 5;
  sweep::Table table = sweep::intervals_table(config);

  nlohmann::json parsed = nlohmann::json::parse(sweep::to_json(table));
  REQUIRE(parsed.is_array());
  REQUIRE(parsed.size() == 3);
  for (const auto& row : parsed) {
    CHECK(row.contains("q"));
    CHECK(row.contains("k"));
    CHECK(row.contains("mu_lower"));
    CHECK(row.contains("mu_upper"));
  }
  CHECK(parsed[1]["k"].is_number_integer());
  CHECK(parsed[1]["k"].get<long long>() == 3);
  CHECK(parsed[1]["q"].get<double>() == 0.6);
  CHECK(parsed[1]["mu_upper"].get<double>() == Approx(0.55).margin(1e-11));
}
