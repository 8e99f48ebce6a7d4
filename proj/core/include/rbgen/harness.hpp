#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rbgen/config.hpp"
#include "rbgen/learner.hpp"
#include "rbgen/oracle.hpp"

namespace rbgen {

/// Fixed statistics schema, one row per episode.
std::string stats_header();
std::string stats_row(const EpisodeStats& st);

/// Per-simulation outcome, derived from the statistics file plus the final
/// simulation state so that report aggregates and raw files always agree.
struct SimulationSummary {
  int index = 0;
  std::uint64_t seed = 0;
  std::uint64_t episodes = 0;
  std::uint64_t states = 0;
  std::uint64_t algorithms = 0;
  std::uint64_t correct = 0;
  std::uint64_t incorrect = 0;
  // Value of cumulative_algorithms on the first row with cumulative_correct
  // >= 1, i.e. how many algorithms were generated up to the first correct one.
  std::optional<std::uint64_t> first_correct_algorithm_index;
  std::optional<BestAlgorithm> best;
};

struct Aggregate {
  double mean = 0.0;
  double stddev = 0.0;  // sample (n-1); 0 when fewer than two values
  std::size_t count = 0;
};

Aggregate aggregate_of(const std::vector<double>& values);

struct RunReport {
  std::string config_fingerprint;
  std::vector<SimulationSummary> sims;
  std::optional<int> best_sim;  // sim holding the overall best algorithm
};

struct LearnResult {
  RunReport report;
  bool found_correct = false;
  bool interrupted = false;  // stopped early via RunHooks
};

/// Test seams for the orchestration loop. `after_chunk` fires after every
/// checkpoint write; returning false stops the run as an interrupt would
/// (no report files are written).
struct RunHooks {
  std::function<bool(int sim_index, std::uint64_t episodes_done)> after_chunk;
};

/// Run (or resume) all configured simulations, streaming per-episode
/// statistics, checkpointing every `output.checkpoint_every` episodes and
/// writing report.json / report.txt / best_algorithm.txt at the end.
/// Artifacts contain no timestamps; identical configs and seeds produce
/// byte-identical files.
LearnResult run_learn(const RunConfig& cfg, bool resume, const RunHooks& hooks = {});

/// Efficiency metrics are reported at the strictest configured mode (the
/// last entry of validation.modes).
const SystemParams& report_params(const RunConfig& cfg);

struct ValidateResult {
  Verdict verdict;
  std::uint64_t scenarios = 0;
  std::string text;  // "Correct" or "Violation(<property>)" plus the trace
};

/// Validate an algorithm file against the configured oracle.
ValidateResult run_validate(const std::string& algorithm_path, const RunConfig& cfg);

/// Names of the artifacts inside an output directory.
std::filesystem::path stats_path(const RunConfig& cfg, int sim_index);
std::filesystem::path checkpoint_path(const RunConfig& cfg, int sim_index);
std::filesystem::path report_json_path(const RunConfig& cfg);
std::filesystem::path report_text_path(const RunConfig& cfg);
std::filesystem::path best_algorithm_path(const RunConfig& cfg);

}  // namespace rbgen
