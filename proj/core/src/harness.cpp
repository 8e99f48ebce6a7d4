#include "rbgen/harness.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rbgen/checkpoint.hpp"
#include "rbgen/errors.hpp"
#include "rbgen/text_format.hpp"

namespace rbgen {

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_short(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::uint64_t csv_u64(const std::string& field, int line_no) {
  if (field.empty()) throw ParseError(line_no, "empty statistics field");
  char* end = nullptr;
  const std::uint64_t v = std::strtoull(field.c_str(), &end, 10);
  if (*end != '\0') throw ParseError(line_no, "bad statistics integer: " + field);
  return v;
}

/// Rewrite a statistics file down to its header plus the first `rows` data
/// rows; resuming from a checkpoint discards rows written after it.
void truncate_stats(const std::filesystem::path& path, std::uint64_t rows) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot resume: statistics file missing: " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != stats_header())
    throw ConfigError("cannot resume: bad statistics header in " + path.string());
  std::vector<std::string> kept;
  kept.reserve(rows);
  while (kept.size() < rows && std::getline(in, line)) kept.push_back(line);
  if (kept.size() < rows)
    throw ConfigError("cannot resume: statistics file behind checkpoint: " + path.string());
  in.close();
  std::ofstream out(path, std::ios::trunc);
  out << stats_header() << "\n";
  for (const auto& row : kept) out << row << "\n";
  if (!out) throw ConfigError("cannot rewrite statistics file: " + path.string());
}

SimulationSummary summarize_stats(const std::filesystem::path& path, int index,
                                  std::uint64_t seed, const SimulationState& sim) {
  std::ifstream in(path);
  if (!in) throw ConfigError("missing statistics file: " + path.string());
  std::string line;
  int line_no = 1;
  if (!std::getline(in, line) || line != stats_header())
    throw ParseError(line_no, "bad statistics header in " + path.string());
  SimulationSummary s;
  s.index = index;
  s.seed = seed;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_csv(line);
    if (fields.size() != 7) throw ParseError(line_no, "statistics row needs 7 columns");
    ++s.episodes;
    s.states = csv_u64(fields[1], line_no);
    s.algorithms = csv_u64(fields[2], line_no);
    s.correct = csv_u64(fields[3], line_no);
    s.incorrect = csv_u64(fields[4], line_no);
    if (!s.first_correct_algorithm_index && s.correct >= 1)
      s.first_correct_algorithm_index = s.algorithms;
  }
  if (s.episodes != sim.episodes_done)
    throw ConfigError("statistics file and checkpoint disagree: " + path.string());
  s.best = sim.best;
  return s;
}

nlohmann::json aggregate_json(const Aggregate& a) {
  return {{"mean", a.mean}, {"stddev", a.stddev}, {"count", a.count}};
}

void write_reports(const RunConfig& cfg, const RunReport& report) {
  const SystemParams& rp = report_params(cfg);

  std::vector<double> states_per_ep, algos_per_ep, correct_tot, incorrect_tot, first_correct;
  for (const auto& s : report.sims) {
    const double ep = static_cast<double>(s.episodes ? s.episodes : 1);
    states_per_ep.push_back(static_cast<double>(s.states) / ep);
    algos_per_ep.push_back(static_cast<double>(s.algorithms) / ep);
    correct_tot.push_back(static_cast<double>(s.correct));
    incorrect_tot.push_back(static_cast<double>(s.incorrect));
    if (s.first_correct_algorithm_index)
      first_correct.push_back(static_cast<double>(*s.first_correct_algorithm_index));
  }
  const Aggregate agg_states = aggregate_of(states_per_ep);
  const Aggregate agg_algos = aggregate_of(algos_per_ep);
  const Aggregate agg_correct = aggregate_of(correct_tot);
  const Aggregate agg_incorrect = aggregate_of(incorrect_tot);
  const Aggregate agg_first = aggregate_of(first_correct);

  const SimulationSummary* best_sim =
      report.best_sim ? &report.sims[*report.best_sim] : nullptr;
  std::string best_text;
  EfficiencyMetrics best_metrics;
  if (best_sim && best_sim->best) {
    best_text = render_pseudocode(best_sim->best->draft);
    best_metrics = efficiency_metrics(best_sim->best->draft, rp);
  }

  if (cfg.output.report_json) {
    nlohmann::json j;
    j["config_fingerprint"] = report.config_fingerprint;
    j["metrics_params"] = {{"n", rp.n}, {"f", rp.f}};
    auto& sims = j["simulations"] = nlohmann::json::array();
    for (const auto& s : report.sims) {
      nlohmann::json e;
      e["index"] = s.index;
      e["seed"] = s.seed;
      e["episodes"] = s.episodes;
      e["states"] = s.states;
      e["algorithms"] = s.algorithms;
      e["correct"] = s.correct;
      e["incorrect"] = s.incorrect;
      if (s.first_correct_algorithm_index)
        e["first_correct_algorithm_index"] = *s.first_correct_algorithm_index;
      else
        e["first_correct_algorithm_index"] = nullptr;
      if (s.best) {
        e["best_reward"] = s.best->reward;
        e["best_episode"] = s.best->episode;
        const EfficiencyMetrics m = efficiency_metrics(s.best->draft, rp);
        e["best_metrics"] = {{"messages_worst_case", m.messages_worst_case},
                             {"comm_steps", m.comm_steps},
                             {"deliver_cost", m.deliver_cost}};
      } else {
        e["best_reward"] = nullptr;
        e["best_episode"] = nullptr;
        e["best_metrics"] = nullptr;
      }
      sims.push_back(std::move(e));
    }
    j["aggregates"] = {{"states_per_episode", aggregate_json(agg_states)},
                       {"algorithms_per_episode", aggregate_json(agg_algos)},
                       {"correct_total", aggregate_json(agg_correct)},
                       {"incorrect_total", aggregate_json(agg_incorrect)},
                       {"first_correct_algorithm_index", aggregate_json(agg_first)}};
    if (best_sim && best_sim->best) {
      j["best"] = {{"simulation", best_sim->index},
                   {"episode", best_sim->best->episode},
                   {"reward", best_sim->best->reward},
                   {"metrics",
                    {{"messages_worst_case", best_metrics.messages_worst_case},
                     {"comm_steps", best_metrics.comm_steps},
                     {"deliver_cost", best_metrics.deliver_cost}}},
                   {"pseudocode", best_text}};
    } else {
      j["best"] = nullptr;
    }
    std::ofstream out(report_json_path(cfg), std::ios::trunc);
    out << j.dump(2) << "\n";
    if (!out) throw ConfigError("cannot write report: " + report_json_path(cfg).string());
  }

  if (cfg.output.report_text) {
    std::ostringstream t;
    t << "run report\n";
    t << "config fingerprint: " << report.config_fingerprint << "\n";
    t << "metrics evaluated at n=" << rp.n << " f=" << rp.f << "\n\n";
    t << "simulations:\n";
    for (const auto& s : report.sims) {
      t << "  sim " << s.index << " (seed " << s.seed << "): episodes " << s.episodes
        << ", states " << s.states << ", algorithms " << s.algorithms << ", correct "
        << s.correct << ", incorrect " << s.incorrect;
      if (s.first_correct_algorithm_index)
        t << ", first correct at algorithm " << *s.first_correct_algorithm_index;
      if (s.best) {
        const EfficiencyMetrics m = efficiency_metrics(s.best->draft, rp);
        t << ", best reward " << format_short(s.best->reward) << " (episode "
          << s.best->episode << ", metrics " << m.messages_worst_case << "/" << m.comm_steps
          << "/" << m.deliver_cost << ")";
      }
      t << "\n";
    }
    t << "\naggregates (mean +/- sample stddev):\n";
    auto put = [&t](const char* name, const Aggregate& a) {
      t << "  " << name << ": " << format_short(a.mean) << " +/- " << format_short(a.stddev)
        << " (over " << a.count << ")\n";
    };
    put("states per episode", agg_states);
    put("algorithms per episode", agg_algos);
    put("correct algorithms", agg_correct);
    put("incorrect algorithms", agg_incorrect);
    put("first correct algorithm index", agg_first);
    t << "\n";
    if (best_sim && best_sim->best) {
      t << "best algorithm (sim " << best_sim->index << ", episode "
        << best_sim->best->episode << ", reward " << format_short(best_sim->best->reward)
        << "):\n";
      t << "  messages worst case: " << best_metrics.messages_worst_case << "\n";
      t << "  communication steps: " << best_metrics.comm_steps << "\n";
      t << "  deliver cost: " << best_metrics.deliver_cost << "\n\n";
      t << best_text;
    } else {
      t << "no correct algorithm found\n";
    }
    std::ofstream out(report_text_path(cfg), std::ios::trunc);
    out << t.str();
    if (!out) throw ConfigError("cannot write report: " + report_text_path(cfg).string());
  }

  if (best_sim && best_sim->best) {
    std::ofstream out(best_algorithm_path(cfg), std::ios::trunc);
    out << best_text;
    if (!out)
      throw ConfigError("cannot write best algorithm: " + best_algorithm_path(cfg).string());
  }
}

}  // namespace

std::string stats_header() {
  return "episode,cumulative_states,cumulative_algorithms,cumulative_correct,"
         "cumulative_incorrect,episode_reward,best_reward_so_far";
}

std::string stats_row(const EpisodeStats& st) {
  std::string row = std::to_string(st.episode);
  row += ',' + std::to_string(st.cumulative_states);
  row += ',' + std::to_string(st.cumulative_algorithms);
  row += ',' + std::to_string(st.cumulative_correct);
  row += ',' + std::to_string(st.cumulative_incorrect);
  row += ',' + format_double(st.episode_reward);
  row += ',' + format_double(st.best_reward_so_far);
  return row;
}

Aggregate aggregate_of(const std::vector<double>& values) {
  Aggregate a;
  a.count = values.size();
  if (values.empty()) return a;
  double sum = 0.0;
  for (double v : values) sum += v;
  a.mean = sum / static_cast<double>(values.size());
  if (values.size() >= 2) {
    double sq = 0.0;
    for (double v : values) sq += (v - a.mean) * (v - a.mean);
    a.stddev = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return a;
}

const SystemParams& report_params(const RunConfig& cfg) {
  return cfg.validation.params_for(cfg.validation.modes.back());
}

std::filesystem::path stats_path(const RunConfig& cfg, int sim_index) {
  return std::filesystem::path(cfg.output.directory) /
         ("stats_sim" + std::to_string(sim_index) + ".csv");
}
std::filesystem::path checkpoint_path(const RunConfig& cfg, int sim_index) {
  return std::filesystem::path(cfg.output.directory) /
         ("checkpoint_sim" + std::to_string(sim_index) + ".ckpt");
}
std::filesystem::path report_json_path(const RunConfig& cfg) {
  return std::filesystem::path(cfg.output.directory) / "report.json";
}
std::filesystem::path report_text_path(const RunConfig& cfg) {
  return std::filesystem::path(cfg.output.directory) / "report.txt";
}
std::filesystem::path best_algorithm_path(const RunConfig& cfg) {
  return std::filesystem::path(cfg.output.directory) / "best_algorithm.txt";
}

LearnResult run_learn(const RunConfig& cfg, bool resume, const RunHooks& hooks) {
  std::filesystem::create_directories(cfg.output.directory);
  const std::string fingerprint = config_fingerprint(cfg);
  const LearnerEnv env = LearnerEnv::make(cfg.generation.policy, cfg.rewards, cfg.heuristics,
                                          cfg.validation);
  LearnResult result;
  result.report.config_fingerprint = fingerprint;

  for (int k = 0; k < cfg.generation.simulations; ++k) {
    const std::uint64_t seed = cfg.generation.seed + static_cast<std::uint64_t>(k);
    const auto spath = stats_path(cfg, k);
    const auto cpath = checkpoint_path(cfg, k);

    SimulationState sim(seed);
    if (resume && std::filesystem::exists(cpath)) {
      CheckpointData data = load_checkpoint(cpath);
      if (data.config_fingerprint != fingerprint)
        throw ConfigError("checkpoint belongs to a different configuration: " +
                          cpath.string());
      sim = std::move(data.sim);
      truncate_stats(spath, sim.episodes_done);
    } else {
      std::ofstream out(spath, std::ios::trunc);
      if (!out) throw ConfigError("cannot write statistics file: " + spath.string());
      out << stats_header() << "\n";
    }

    {
      std::ofstream stats(spath, std::ios::app);
      if (!stats) throw ConfigError("cannot append statistics file: " + spath.string());
      const StatsSink sink = [&stats](const EpisodeStats& st) {
        stats << stats_row(st) << "\n";
      };
      while (sim.episodes_done < cfg.generation.episodes) {
        const std::uint64_t chunk = std::min<std::uint64_t>(
            cfg.output.checkpoint_every, cfg.generation.episodes - sim.episodes_done);
        run_episodes(env, sim, chunk, sink);
        stats.flush();
        save_checkpoint(cpath, fingerprint, sim);
        if (hooks.after_chunk && !hooks.after_chunk(k, sim.episodes_done)) {
          result.interrupted = true;
          return result;
        }
      }
      if (!stats) throw ConfigError("statistics write failed: " + spath.string());
    }
    result.report.sims.push_back(summarize_stats(spath, k, seed, sim));
  }

  for (std::size_t i = 0; i < result.report.sims.size(); ++i) {
    const auto& s = result.report.sims[i];
    if (s.correct > 0) result.found_correct = true;
    if (!s.best) continue;
    if (!result.report.best_sim ||
        s.best->reward > result.report.sims[*result.report.best_sim].best->reward)
      result.report.best_sim = static_cast<int>(i);
  }
  write_reports(cfg, result.report);
  return result;
}

ValidateResult run_validate(const std::string& algorithm_path, const RunConfig& cfg) {
  const AlgorithmDraft alg = load_algorithm_file(algorithm_path);
  ValidateResult res;
  res.scenarios = build_scenarios(alg, cfg.validation).size();
  res.verdict = validate(alg, cfg.validation);
  if (res.verdict.correct) {
    res.text = "Correct\nscenarios checked: " + std::to_string(res.scenarios) +
               "\nstates explored: " + std::to_string(res.verdict.states_explored) + "\n";
  } else {
    res.text = std::string("Violation(") + to_string(res.verdict.property) + ")\n";
    const std::string rendered = render_trace(alg, res.verdict);
    const std::size_t first_newline = rendered.find('\n');
    if (first_newline != std::string::npos) res.text += rendered.substr(first_newline + 1);
  }
  return res;
}

}  // namespace rbgen
