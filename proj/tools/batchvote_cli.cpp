// batchvote: exact evaluation, simulation, and self-verification of batch
// voting allocation mechanisms.
//
// Exit codes: 0 success, 2 usage/validation error, 3 I/O error,
// 4 verification failure.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "batchvote/batchvote.hpp"

namespace {

using namespace batchvote;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitVerify = 4;

std::string fmt12(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.12g", value);
  return buffer;
}

// Batch-search cap, overridable via BATCHVOTE_KMAX.
int search_cap() {
  const char* raw = std::getenv("BATCHVOTE_KMAX");
  if (raw == nullptr || *raw == '\0') return ic::kDefaultKMax;
  char* end = nullptr;
  long value = std::strtol(raw, &end, 10);
  if (end == raw || *end != '\0' || value < 1)
    throw OutOfRangeError("BATCHVOTE_KMAX",
                          "BATCHVOTE_KMAX must be a positive integer, got '" +
                              std::string(raw) + "'");
  return static_cast<int>(value);
}

struct MechanismFlags {
  std::string mechanism;
  int k = 0;      // single-batch size; 0 = unset
  int horizon = 1;
};

// Resolves --mechanism/--k/--j into specs; "all" expands to the comparison
// set.
std::vector<MechanismSpec> resolve_mechanisms(const MechanismFlags& flags) {
  if (flags.mechanism == "seq") return {MechanismSpec::sequential()};
  if (flags.mechanism == "single") {
    if (flags.k < 1)
      throw OutOfRangeError("k", "--mechanism single requires --k");
    return {MechanismSpec::single_batch(flags.k)};
  }
  if (flags.mechanism == "greedy")
    return {MechanismSpec::greedy_horizon(flags.horizon)};
  if (flags.mechanism == "greedy-unbounded")
    return {MechanismSpec::greedy_unbounded()};
  if (flags.mechanism == "all")
    return {MechanismSpec::sequential(), MechanismSpec::greedy_horizon(1),
            MechanismSpec::greedy_horizon(2), MechanismSpec::greedy_unbounded()};
  throw OutOfRangeError("mechanism", "unknown mechanism '" + flags.mechanism +
                                         "' (expected seq, single, greedy, "
                                         "greedy-unbounded, or all)");
}

void emit_table(const sweep::Table& table, const std::string& format,
                const std::string& output_path) {
  std::string payload =
      format == "json" ? sweep::to_json(table) : sweep::to_csv(table);
  if (output_path.empty()) {
    std::cout << payload;
    if (!std::cout) throw IoError("failed writing to standard output");
    return;
  }
  std::ofstream out(output_path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + output_path + "' for writing");
  out << payload;
  out.flush();
  if (!out) throw IoError("failed writing to '" + output_path + "'");
}

void print_trace(const RunTrace& trace) {
  std::cout << "trace (trial 0):\n";
  std::cout << "  quality = "
            << (trace.true_quality == Quality::Good ? "good" : "bad") << "\n";
  for (const BatchRecord& batch : trace.batches)
    std::cout << "  batch " << batch.index << ": size=" << batch.size
              << " yes=" << batch.yes_votes
              << " posterior=" << fmt12(batch.posterior) << "\n";
  if (trace.decision.allocated)
    std::cout << "  decision = allocate recipient=" << *trace.decision.recipient
              << "\n";
  else
    std::cout << "  decision = discard\n";
}

int run(int argc, char** argv) {
  CLI::App app{
      "batchvote: exact and simulated evaluation of batch voting allocation "
      "mechanisms"};
  app.require_subcommand(1);

  // --- ic-interval ---------------------------------------------------------
  int iv_k = 0;
  double iv_q = 0.0;
  CLI::App* cmd_iv =
      app.add_subcommand("ic-interval",
                         "Prior interval where a single batch of size K is "
                         "incentive-compatible");
  cmd_iv->add_option("--k", iv_k, "odd batch size")->required();
  cmd_iv->add_option("--q", iv_q, "signal precision in (0.5, 1)")->required();
  cmd_iv->callback([&] {
    ic::IcInterval interval = ic::ic_interval(iv_k, iv_q);
    std::cout << "lower = " << fmt12(interval.lower) << "\n";
    std::cout << "upper = " << fmt12(interval.upper) << "\n";
  });

  // --- batch-bounds --------------------------------------------------------
  double bb_mu = 0.0, bb_q = 0.0;
  CLI::App* cmd_bb = app.add_subcommand(
      "batch-bounds",
      "Smallest and largest incentive-compatible batch size at a prior");
  cmd_bb->add_option("--mu", bb_mu, "prior in (0, 1)")->required();
  cmd_bb->add_option("--q", bb_q, "signal precision in (0.5, 1)")->required();
  cmd_bb->callback([&] {
    auto bounds =
        ic::batch_bounds(ModelParams(bb_mu, bb_q), search_cap());
    if (!bounds) {
      std::cout << "none (mu >= q)\n";
      return;
    }
    std::cout << "min_k = " << bounds->min_k << "\n";
    std::cout << "max_k = " << bounds->max_k << "\n";
  });

  // --- correctness ---------------------------------------------------------
  MechanismFlags cr_flags;
  double cr_mu = 0.0, cr_q = 0.0;
  int cr_population = kDefaultPopulation;
  CLI::App* cmd_cr = app.add_subcommand(
      "correctness", "Exact correctness of one mechanism (or all)");
  cmd_cr
      ->add_option("--mechanism", cr_flags.mechanism,
                   "seq | single | greedy | greedy-unbounded | all")
      ->required();
  cmd_cr->add_option("--mu", cr_mu, "prior in (0, 1)")->required();
  cmd_cr->add_option("--q", cr_q, "signal precision in (0.5, 1)")->required();
  cmd_cr->add_option("--population", cr_population, "queue length");
  cmd_cr->add_option("--k", cr_flags.k, "batch size for --mechanism single");
  cmd_cr->add_option("--j", cr_flags.horizon,
                     "batch budget for --mechanism greedy");
  cmd_cr->callback([&] {
    ModelParams params(cr_mu, cr_q, cr_population);
    int cap = search_cap();
    std::printf("%-18s %-16s %s\n", "mechanism", "value", "method");
    for (const MechanismSpec& spec : resolve_mechanisms(cr_flags)) {
      CorrectnessReport report = greedy::exact_correctness(spec, params, cap);
      std::printf("%-18s %-16s %s\n", spec.name().c_str(),
                  fmt12(report.value).c_str(), to_string(report.method));
      if (report.non_ic_warning)
        std::cerr << "warning: " << spec.name()
                  << " is not incentive-compatible at mu=" << fmt12(cr_mu)
                  << ", q=" << fmt12(cr_q) << "\n";
    }
  });

  // --- sweep ---------------------------------------------------------------
  std::string sw_figure, sw_format = "csv", sw_output;
  sweep::SweepConfig sw_config;
  std::vector<double> sw_q;
  CLI::App* cmd_sw = app.add_subcommand(
      "sweep", "Regenerate figure data tables over the (mu, q) grid");
  cmd_sw
      ->add_option("--figure", sw_figure,
                   "intervals | optimal-batch | comparison")
      ->required()
      ->check(CLI::IsMember({"intervals", "optimal-batch", "comparison"}));
  cmd_sw->add_option("--format", sw_format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd_sw->add_option("--output", sw_output, "output path (default stdout)");
  cmd_sw->add_option("--q", sw_q, "precision values (repeatable)");
  cmd_sw->add_option("--mu-start", sw_config.mu_start, "grid start");
  cmd_sw->add_option("--mu-stop", sw_config.mu_stop, "grid stop");
  cmd_sw->add_option("--mu-step", sw_config.mu_step, "grid step");
  cmd_sw->add_option("--population", sw_config.population, "queue length");
  cmd_sw->add_option("--max-k", sw_config.max_k,
                     "largest batch size in the intervals figure");
  cmd_sw->callback([&] {
    if (!sw_q.empty()) sw_config.q_values = sw_q;
    for (double q : sw_config.q_values)
      if (!(q > 0.5 && q < 1.0))
        throw OutOfRangeError("q", "precision must lie in (0.5, 1), got " +
                                       fmt12(q));
    if (!(sw_config.mu_start > 0.0 && sw_config.mu_start < sw_config.mu_stop &&
          sw_config.mu_stop < 1.0))
      throw OutOfRangeError("mu", "grid must satisfy 0 < start < stop < 1");
    if (sw_config.population < 1)
      throw OutOfRangeError("population", "queue length must be >= 1");
    sw_config.search_cap = search_cap();
    sweep::Table table;
    if (sw_figure == "intervals")
      table = sweep::intervals_table(sw_config);
    else if (sw_figure == "optimal-batch")
      table = sweep::optimal_batch_table(sw_config);
    else
      table = sweep::comparison_table(sw_config);
    emit_table(table, sw_format, sw_output);
  });

  // --- simulate ------------------------------------------------------------
  MechanismFlags sim_flags;
  double sim_mu = 0.0, sim_q = 0.0;
  int sim_population = kDefaultPopulation;
  long long sim_trials = 100000;
  std::uint64_t sim_seed = 0;
  bool sim_show_trace = false;
  CLI::App* cmd_sim = app.add_subcommand(
      "simulate", "Monte Carlo correctness estimate with a seeded generator");
  cmd_sim
      ->add_option("--mechanism", sim_flags.mechanism,
                   "seq | single | greedy | greedy-unbounded")
      ->required();
  cmd_sim->add_option("--mu", sim_mu, "prior in (0, 1)")->required();
  cmd_sim->add_option("--q", sim_q, "signal precision in (0.5, 1)")->required();
  cmd_sim->add_option("--population", sim_population, "queue length");
  cmd_sim->add_option("--k", sim_flags.k, "batch size for --mechanism single");
  cmd_sim->add_option("--j", sim_flags.horizon,
                      "batch budget for --mechanism greedy");
  cmd_sim->add_option("--trials", sim_trials, "number of Monte Carlo trials");
  cmd_sim->add_option("--seed", sim_seed, "root seed");
  cmd_sim->add_flag("--show-trace", sim_show_trace,
                    "print the first trial's full run trace");
  cmd_sim->callback([&] {
    if (sim_flags.mechanism == "all")
      throw OutOfRangeError("mechanism", "simulate takes a single mechanism");
    MechanismSpec spec = resolve_mechanisms(sim_flags).front();
    ModelParams params(sim_mu, sim_q, sim_population);
    oracle::McConfig config{sim_trials, sim_seed, search_cap()};
    CorrectnessReport report = oracle::mc_correctness(spec, params, config);
    std::cout << "mechanism = " << spec.name() << "\n";
    std::cout << "estimate = " << fmt12(report.value) << "\n";
    std::cout << "std_error = " << fmt12(report.std_error) << "\n";
    std::cout << "trials = " << report.trials << "\n";
    std::cout << "method = " << to_string(report.method) << "\n";
    if (spec.kind == MechanismSpec::Kind::SingleBatch &&
        !ic::is_ic(spec.batch_size, params))
      std::cerr << "warning: " << spec.name()
                << " is not incentive-compatible at mu=" << fmt12(sim_mu)
                << ", q=" << fmt12(sim_q) << "\n";
    if (sim_show_trace) {
      // Reproduce trial 0 of the estimate, this time recording batches.
      std::uint64_t trial_seed =
          rng::derive(sim_seed, rng::Domain::Trial, 0);
      rng::Stream draw(rng::derive(trial_seed, rng::Domain::Sample, 0));
      Quality quality =
          draw.bernoulli(sim_mu) ? Quality::Good : Quality::Bad;
      double p_pos = quality == Quality::Good ? sim_q : 1.0 - sim_q;
      std::vector<Signal> signals(sim_population);
      for (Signal& s : signals)
        s = draw.bernoulli(p_pos) ? Signal::Positive : Signal::Negative;
      RunTrace trace = greedy::run_mechanism(spec, params, quality, signals,
                                             trial_seed, config.k_max);
      print_trace(trace);
    }
  });

  // --- verify --------------------------------------------------------------
  std::string vf_level = "fast";
  CLI::App* cmd_vf =
      app.add_subcommand("verify", "Run the library's invariant check suites");
  cmd_vf->add_option("--level", vf_level, "fast | full")
      ->check(CLI::IsMember({"fast", "full"}));
  bool verify_failed = false;
  cmd_vf->callback([&] {
    verify::Level level =
        vf_level == "full" ? verify::Level::Full : verify::Level::Fast;
    std::vector<verify::CheckResult> results = verify::run_checks(level);
    int passed = 0;
    for (const verify::CheckResult& result : results) {
      if (result.passed) {
        ++passed;
        std::cout << "[ok]   " << result.name;
        if (!result.detail.empty()) std::cout << "  (" << result.detail << ")";
        std::cout << "\n";
      } else {
        std::cout << "[FAIL] " << result.name << ": " << result.detail << "\n";
      }
    }
    std::cout << passed << "/" << results.size() << " checks passed ("
              << vf_level << ")\n";
    verify_failed = passed != static_cast<int>(results.size());
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return verify_failed ? kExitVerify : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const batchvote::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
