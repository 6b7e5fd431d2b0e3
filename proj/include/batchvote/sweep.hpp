#pragma once
// Figure-data sweeps and table serialization. Tables are small column-named
// grids of integer/real cells; serialization prints reals with 12
// significant digits, and the CSV writer/parser pair round-trips its own
// output byte-for-byte. Rows are emitted in deterministic (q, then x-axis)
// order.

#include <charconv>
#include <cstdio>
#include <future>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "batchvote/greedy.hpp"
#include "batchvote/ic.hpp"
#include "batchvote/seq.hpp"
#include "batchvote/types.hpp"

namespace batchvote::sweep {

using Cell = std::variant<long long, double>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct SweepConfig {
  std::vector<double> q_values{0.6, 0.7, 0.8};
  double mu_start = 0.005;
  double mu_stop = 0.995;
  double mu_step = 0.005;
  int population = kDefaultPopulation;
  int max_k = 19;                       // intervals figure only
  int search_cap = ic::kDefaultKMax;    // batch-size search limit
};

// Grid points mu_start + i * mu_step; multiplication, not accumulation, so
// every point is independent of its predecessors.
inline std::vector<double> mu_grid(const SweepConfig& config) {
  if (!(config.mu_step > 0.0))
    throw OutOfRangeError("mu-step", "grid step must be positive");
  std::vector<double> grid;
  long count = std::lround((config.mu_stop - config.mu_start) / config.mu_step);
  for (long i = 0; i <= count; ++i) {
    double mu = config.mu_start + static_cast<double>(i) * config.mu_step;
    if (mu > 0.0 && mu < 1.0) grid.push_back(mu);
  }
  return grid;
}

inline std::string format_cell(const Cell& cell) {
  if (std::holds_alternative<long long>(cell))
    return std::to_string(std::get<long long>(cell));
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.12g", std::get<double>(cell));
  return buffer;
}

// Incentive-compatible prior intervals per batch size: one row per (q, K).
inline Table intervals_table(const SweepConfig& config) {
  Table table{{"q", "k", "mu_lower", "mu_upper"}, {}};
  for (double q : config.q_values)
    for (int k = 1; k <= config.max_k; k += 2) {
      ic::IcInterval iv = ic::ic_interval(k, q);
      table.rows.push_back(
          {Cell{static_cast<double>(q)}, Cell{static_cast<long long>(k)},
           Cell{iv.lower}, Cell{iv.upper}});
    }
  return table;
}

// Largest incentive-compatible batch size over the prior grid; 0 marks
// priors at or above q, where no batch size is incentive-compatible.
inline Table optimal_batch_table(const SweepConfig& config) {
  Table table{{"mu", "q", "k_bar"}, {}};
  std::vector<double> grid = mu_grid(config);
  for (double q : config.q_values) {
    ic::IcTable cache(q);
    for (double mu : grid) {
      auto bounds = cache.batch_bounds(mu, config.search_cap);
      long long k_bar = bounds ? bounds->max_k : 0;
      table.rows.push_back({Cell{mu}, Cell{q}, Cell{k_bar}});
    }
  }
  return table;
}

// Correctness comparison across mechanisms plus the no-incentives upper
// bound, at the configured population. The q-groups are computed in
// parallel; output order stays (q, mu) regardless of completion order.
inline Table comparison_table(const SweepConfig& config) {
  Table table{{"mu", "q", "c_seq", "c_greedy1", "c_greedy2", "c_upper_bound"},
              {}};
  std::vector<double> grid = mu_grid(config);
  auto one_group = [&config, &grid](double q) {
    auto greedy1 = MechanismSpec::greedy_horizon(1);
    auto greedy2 = MechanismSpec::greedy_horizon(2);
    std::vector<std::vector<Cell>> rows;
    rows.reserve(grid.size());
    for (double mu : grid) {
      ModelParams params(mu, q, config.population);
      rows.push_back(
          {Cell{mu}, Cell{q}, Cell{seq::seq_correctness(params).value},
           Cell{greedy::exact_correctness(greedy1, params, config.search_cap)
                    .value},
           Cell{greedy::exact_correctness(greedy2, params, config.search_cap)
                    .value},
           Cell{greedy::upper_bound_correctness(params).value}});
    }
    return rows;
  };
  std::vector<std::future<std::vector<std::vector<Cell>>>> futures;
  for (double q : config.q_values)
    futures.push_back(std::async(std::launch::async, one_group, q));
  for (auto& future : futures) {
    auto rows = future.get();
    for (auto& row : rows) table.rows.push_back(std::move(row));
  }
  return table;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline void to_csv(const Table& table, std::ostream& out) {
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out << ',';
    out << table.columns[c];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      out << format_cell(row[c]);
    }
    out << '\n';
  }
}

inline std::string to_csv(const Table& table) {
  std::ostringstream out;
  to_csv(table, out);
  return out.str();
}

inline Cell parse_cell(const std::string& text) {
  long long integer = 0;
  auto [iptr, ierr] =
      std::from_chars(text.data(), text.data() + text.size(), integer);
  if (ierr == std::errc() && iptr == text.data() + text.size())
    return Cell{integer};
  double real = 0.0;
  auto [dptr, derr] =
      std::from_chars(text.data(), text.data() + text.size(), real);
  if (derr == std::errc() && dptr == text.data() + text.size())
    return Cell{real};
  throw IoError("cannot parse table cell '" + text + "'");
}

inline Table parse_csv(std::istream& in) {
  Table table;
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty table: no header row");
  std::istringstream header(line);
  std::string field;
  while (std::getline(header, field, ',')) table.columns.push_back(field);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<Cell> row;
    std::istringstream cells(line);
    while (std::getline(cells, field, ',')) row.push_back(parse_cell(field));
    if (row.size() != table.columns.size())
      throw IoError("row width " + std::to_string(row.size()) +
                    " does not match header width " +
                    std::to_string(table.columns.size()));
    table.rows.push_back(std::move(row));
  }
  return table;
}

// JSON array of row objects. Values go through the same 12-significant-digit
// formatting as CSV so the two formats carry identical numbers.
inline std::string to_json(const Table& table) {
  std::ostringstream out;
  out << "[\n";
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    out << "  {";
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      if (c) out << ", ";
      out << '"' << table.columns[c] << "\": " << format_cell(table.rows[r][c]);
    }
    out << (r + 1 < table.rows.size() ? "},\n" : "}\n");
  }
  out << "]\n";
  return out.str();
}

}  // namespace batchvote::sweep
