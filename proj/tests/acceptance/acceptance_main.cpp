// Acceptance gate: ten end-to-end checks over the installed behavior, one
// PASS/FAIL line each. Exit status is the number of failed checks.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rbgen/checkpoint.hpp"
#include "rbgen/config.hpp"
#include "rbgen/errors.hpp"
#include "rbgen/harness.hpp"
#include "rbgen/learner.hpp"
#include "rbgen/oracle.hpp"
#include "rbgen/protocol.hpp"
#include "rbgen/rewards.hpp"
#include "rbgen/text_format.hpp"
#include "test_util.hpp"

using namespace rbgen;
using namespace rbgen::test;
namespace fs = std::filesystem;

namespace {

/// Collects the first failed expectation of one criterion.
class Checker {
 public:
  void expect(bool cond, const std::string& what) {
    if (!cond && error_.empty()) error_ = what;
  }
  template <typename T, typename U>
  void expect_eq(const T& got, const U& want, const std::string& what) {
    if (!(got == static_cast<T>(want)) && error_.empty()) {
      std::ostringstream os;
      os << what << " (got " << got << ", want " << want << ")";
      error_ = os.str();
    }
  }
  bool ok() const { return error_.empty(); }
  const std::string& error() const { return error_; }
  void note(const std::string& text) { notes_ = text; }
  const std::string& notes() const { return notes_; }

 private:
  std::string error_;
  std::string notes_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

AlgorithmDraft load_reference(int index) {
  return load_algorithm_file(
      algorithm_path("algorithm" + std::to_string(index)).string());
}

RunConfig preset_config(const std::string& name, const fs::path& out_dir) {
  RunConfig cfg = load_config(preset_path(name).string());
  cfg.output.directory = out_dir.string();
  return cfg;
}

/// Rebuild a complete draft from a terminal state key ("B:...|R:...|P:D").
/// Canonical keys sort each handler's codes, which keeps Stop last, so the
/// handler bodies reconstruct directly; the efficiency metrics only depend
/// on the action multiset.
AlgorithmDraft draft_from_terminal_key(const std::string& key) {
  const std::size_t r = key.find("|R:");
  const std::size_t p = key.find("|P:");
  if (key.rfind("B:", 0) != 0 || r == std::string::npos || p == std::string::npos)
    throw std::invalid_argument("not a terminal key: " + key);
  return AlgorithmDraft::from_handlers(decode_actions(key.substr(2, r - 2)),
                                       decode_actions(key.substr(r + 3, p - (r + 3))));
}

/// Run every simulation of a configured search without report plumbing and
/// hand each final state to `scan`.
void run_preset_sims(const RunConfig& cfg,
                     const std::function<void(int, const SimulationState&)>& scan) {
  const LearnerEnv env = LearnerEnv::make(cfg.generation.policy, cfg.rewards,
                                          cfg.heuristics, cfg.validation);
  for (int k = 0; k < cfg.generation.simulations; ++k) {
    SimulationState sim(cfg.generation.seed + static_cast<std::uint64_t>(k));
    run_episodes(env, sim, cfg.generation.episodes, nullptr);
    scan(k, sim);
  }
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("missing file: " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// --- criteria -------------------------------------------------------------

void criterion_universe(Checker& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto universe = enumerate_actions(2);
  const double dt = seconds_since(t0);
  c.expect_eq(universe.size(), std::size_t{64}, "universe size at two message types");
  c.expect(dt < 1.0, "enumeration exceeded 1s");
}

void criterion_reward_example(Checker& c) {
  const RewardConfig rc;
  const Action costly = act("A0n0");  // send-to-all waiting on N-F messages

  const AlgorithmDraft empty;
  c.expect_eq(runtime_reward(costly, HandlerId::Broadcast, empty, rc), -7,
              "send-to-all at the N-F threshold in Broadcast");

  AlgorithmDraft receiving;
  receiving.append(act("A0z"));
  receiving.append(act("X"));
  c.expect_eq(runtime_reward(costly, HandlerId::Receive, receiving, rc), -8,
              "the same action inside Receive");

  EpisodeLedger ledger;
  ledger.add(StateKey{"s0"}, costly, -7);
  ledger.add(StateKey{"s1"}, costly, -7);
  c.expect_eq(ledger.runtime_sum(), -14, "runtime accumulation");
  c.expect_eq(bonus_reward(true, ledger, rc), 86, "bonus for a correct algorithm");
  c.expect_eq(bonus_reward(false, ledger, rc), -1, "penalty for an incorrect algorithm");
}

void criterion_reference_verdicts(Checker& c) {
  const auto t0 = std::chrono::steady_clock::now();
  struct Case {
    int algorithm;
    const char* preset;
    const char* first_line;
  };
  const Case cases[] = {
      {1, "no_failure", "Correct"},
      {1, "crash", "Violation(RB-Agreement)"},
      {2, "crash", "Correct"},
      {2, "byzantine", "Violation(RB-Integrity)"},
      {3, "byzantine", "Correct"},
      {3, "crash", "Correct"},
      {4, "modified", "Correct"},
      {4, "crash", "Violation(RB-Agreement)"},
  };
  for (const auto& k : cases) {
    const RunConfig cfg = load_config(preset_path(k.preset).string());
    const ValidateResult res = run_validate(
        algorithm_path("algorithm" + std::to_string(k.algorithm)).string(), cfg);
    const std::string got = res.text.substr(0, res.text.find('\n'));
    c.expect_eq(got, std::string(k.first_line),
                "algorithm" + std::to_string(k.algorithm) + " under " + k.preset);
  }
  c.expect(seconds_since(t0) < 60.0, "reference verdicts exceeded 60s");
}

void criterion_reference_metrics(Checker& c) {
  const SystemParams p{4, 1};
  c.expect(efficiency_metrics(load_reference(1), p) == EfficiencyMetrics{4, 1, 1},
           "algorithm1 cost profile at n=4 f=1");
  c.expect(efficiency_metrics(load_reference(2), p) == EfficiencyMetrics{13, 1, 1},
           "algorithm2 cost profile at n=4 f=1");
  c.expect(efficiency_metrics(load_reference(3), p) == EfficiencyMetrics{20, 2, 3},
           "algorithm3 cost profile at n=4 f=1");
}

void search_criterion(Checker& c, const std::string& preset, int reference,
                      std::uint64_t first_within, int required_sims, double budget_s) {
  const auto t0 = std::chrono::steady_clock::now();
  TempDir dir;
  const RunConfig cfg = preset_config(preset, dir.path() / preset);
  const LearnResult result = run_learn(cfg, false);
  const double dt = seconds_since(t0);

  const EfficiencyMetrics want =
      efficiency_metrics(load_reference(reference), report_params(cfg));
  int qualifying = 0;
  std::ostringstream notes;
  for (const auto& s : result.report.sims) {
    const bool metrics_match =
        s.best && efficiency_metrics(s.best->draft, report_params(cfg)) == want;
    const bool early = s.first_correct_algorithm_index &&
                       *s.first_correct_algorithm_index <= first_within;
    if (metrics_match && early) ++qualifying;
    notes << (notes.tellp() > 0 ? ", " : "") << "sim" << s.index << ":"
          << (s.best ? "best" : "none")
          << (metrics_match ? "=ref" : "") << " first="
          << (s.first_correct_algorithm_index
                  ? std::to_string(*s.first_correct_algorithm_index)
                  : std::string("-"));
  }
  c.note(notes.str());
  c.expect(qualifying >= required_sims,
           "only " + std::to_string(qualifying) + " of " +
               std::to_string(result.report.sims.size()) +
               " simulations matched the reference profile within " +
               std::to_string(first_within) + " algorithms [" + notes.str() + "]");
  c.expect(dt < budget_s, "search exceeded its time budget");
}

void criterion_search_no_failure(Checker& c) {
  search_criterion(c, "no_failure", 1, 20, 4, 600.0);
}

void criterion_search_crash(Checker& c) {
  search_criterion(c, "crash", 2, 50, 3, 3600.0);
}

void criterion_search_byzantine(Checker& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const RunConfig cfg = load_config(preset_path("byzantine").string());
  const EfficiencyMetrics want =
      efficiency_metrics(load_reference(3), report_params(cfg));
  int hits = 0;
  std::uint64_t correct_total = 0;
  run_preset_sims(cfg, [&](int, const SimulationState& sim) {
    for (const auto& [key, correct] : sim.algo_verdicts) {
      if (!correct) continue;
      ++correct_total;
      if (efficiency_metrics(draft_from_terminal_key(key), report_params(cfg)) == want)
        ++hits;
    }
  });
  c.note(std::to_string(hits) + " echo-quorum discoveries among " +
         std::to_string(correct_total) + " correct algorithms");
  c.expect(hits >= 1, "no discovered correct algorithm carries the echo-quorum profile");
  c.expect(seconds_since(t0) < 43200.0, "search exceeded its time budget");
}

void criterion_modified_ratio(Checker& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const RunConfig cfg = load_config(preset_path("modified").string());
  const ValidateResult res = run_validate(algorithm_path("algorithm4").string(), cfg);
  c.expect(res.verdict.correct, "algorithm4 must validate under the (n-1)/3 ratio");
  c.expect(seconds_since(t0) < 60.0, "validation exceeded 60s");

  // The stricter ratio also leaves room for the learner: it finds correct
  // algorithms that deliver after only f+1 confirmations.
  const int want_deliver_cost = cfg.validation.crash.f + 1;
  int cheap = 0;
  run_preset_sims(cfg, [&](int, const SimulationState& sim) {
    for (const auto& [key, correct] : sim.algo_verdicts) {
      if (correct && efficiency_metrics(draft_from_terminal_key(key), report_params(cfg))
                             .deliver_cost == want_deliver_cost)
        ++cheap;
    }
  });
  c.note(std::to_string(cheap) + " correct algorithms deliver at f+1");
  c.expect(cheap >= 1, "no discovered correct algorithm delivers at f+1 confirmations");
}

void criterion_heuristic_ablations(Checker& c) {
  const auto t0 = std::chrono::steady_clock::now();
  TempDir dir;
  for (int gh = 1; gh <= 10; ++gh) {
    std::ostringstream doc;
    doc << "{\"generation\": {\"simulations\": 1, \"episodes\": 300, \"seed\": 1, "
           "\"ucb_c\": 100.0},"
        << "\"validation\": {\"modes\": [\"no_failure\"]},"
        << "\"heuristics\": {\"gh" << gh << "\": false}}";
    RunConfig cfg = parse_config_text(doc.str());
    cfg.output.directory = (dir.path() / ("gh" + std::to_string(gh))).string();
    const LearnResult result = run_learn(cfg, false);
    c.expect(!result.interrupted && result.report.sims.size() == 1 &&
                 result.report.sims[0].episodes == 300,
             "ablation run with gh" + std::to_string(gh) + " disabled did not complete");
    c.expect(fs::exists(report_json_path(cfg)),
             "ablation run with gh" + std::to_string(gh) + " disabled wrote no report");
  }
  c.expect(seconds_since(t0) < 10.0, "ablation sweep exceeded 10s");
}

void criterion_determinism(Checker& c) {
  const auto t0 = std::chrono::steady_clock::now();
  TempDir dir;
  RunConfig cfg = preset_config("no_failure", dir.path() / "a");
  cfg.generation.simulations = 2;
  cfg.generation.episodes = 2000;
  RunConfig again = cfg;
  again.output.directory = (dir.path() / "b").string();
  run_learn(cfg, false);
  run_learn(again, false);
  for (int k = 0; k < cfg.generation.simulations; ++k) {
    c.expect(slurp(stats_path(cfg, k)) == slurp(stats_path(again, k)),
             "statistics differ for identical seeds (sim " + std::to_string(k) + ")");
  }
  c.expect(slurp(report_json_path(cfg)) == slurp(report_json_path(again)),
           "reports differ for identical seeds");

  const std::pair<int, const char*> corpus[] = {
      {1, "no_failure"}, {2, "crash"}, {3, "byzantine"}, {4, "modified"}};
  for (const auto& [index, preset] : corpus) {
    OracleConfig on = load_config(preset_path(preset).string()).validation;
    OracleConfig off = on;
    on.memoize = true;
    off.memoize = false;
    const AlgorithmDraft alg = load_reference(index);
    const Verdict a = validate(alg, on);
    const Verdict b = validate(alg, off);
    const bool same =
        a.correct == b.correct &&
        (a.correct || (a.property == b.property &&
                       a.scenario->describe() == b.scenario->describe()));
    c.expect(same, std::string("memoized and direct verdicts disagree on algorithm") +
                       std::to_string(index) + " under " + preset);
    c.expect(a.states_explored <= b.states_explored,
             "memoization explored more states than the direct search");
  }
  c.expect(seconds_since(t0) < 300.0, "determinism checks exceeded 300s");
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    void (*fn)(Checker&);
  };
  const Criterion criteria[] = {
      {"action universe: 64 actions at two message types, enumerated within 1s",
       criterion_universe},
      {"reward schedule: -7/-8 worked example, bonus 86, incorrect penalty -1",
       criterion_reward_example},
      {"reference corpus verdicts match across all failure modes within 60s",
       criterion_reference_verdicts},
      {"reference cost profiles at n=4 f=1: 4/1/1, 13/1/1 and 20/2/3",
       criterion_reference_metrics},
      {"no-failure search: >=4/5 simulations reach the single-round profile "
       "within 20 algorithms (10min budget)",
       criterion_search_no_failure},
      {"crash search: >=3/5 simulations reach the self-seeded relay profile "
       "within 50 algorithms (1h budget)",
       criterion_search_crash},
      {"byzantine search: a seeded run discovers a correct echo-quorum "
       "algorithm (12h budget)",
       criterion_search_byzantine},
      {"(n-1)/3 ratio: the f+1-deliver reference validates within 60s and the "
       "search finds f+1-deliver algorithms",
       criterion_modified_ratio},
      {"heuristic ablations: disabling any single filter still completes a "
       "configured run within 10s",
       criterion_heuristic_ablations},
      {"determinism: identical seeds give identical statistics; memoized and "
       "direct checking agree (5min budget)",
       criterion_determinism},
  };

  int failures = 0;
  int index = 0;
  for (const auto& crit : criteria) {
    ++index;
    Checker checker;
    const auto t0 = std::chrono::steady_clock::now();
    std::string crashed;
    try {
      crit.fn(checker);
    } catch (const std::exception& e) {
      crashed = e.what();
    }
    const double dt = seconds_since(t0);
    const bool pass = crashed.empty() && checker.ok();
    if (!pass) ++failures;
    std::printf("%s  criterion %2d (%7.2fs): %s", pass ? "PASS" : "FAIL", index, dt,
                crit.name);
    if (!crashed.empty())
      std::printf(" -- exception: %s", crashed.c_str());
    else if (!checker.ok())
      std::printf(" -- %s", checker.error().c_str());
    else if (!checker.notes().empty())
      std::printf(" [%s]", checker.notes().c_str());
    std::printf("\n");
    std::fflush(stdout);
  }
  std::printf("%d/10 criteria passed\n", 10 - failures);
  return failures;
}
