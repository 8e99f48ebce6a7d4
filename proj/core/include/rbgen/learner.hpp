#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "rbgen/heuristics.hpp"
#include "rbgen/oracle.hpp"
#include "rbgen/protocol.hpp"
#include "rbgen/rewards.hpp"

namespace rbgen {

struct PolicyParams {
  double ucb_c = 2.0;
  double alpha = 0.1;
  double gamma = 1.0;
};

struct ActionStats {
  double q = 0.0;
  std::uint64_t visits = 0;

  friend bool operator==(const ActionStats&, const ActionStats&) = default;
};

/// Tabular action values keyed by draft state. Actions are stored sparsely:
/// an action without an entry has implicit value 0 and zero visits.
class QTable {
 public:
  using ActionMap = std::map<Action, ActionStats>;
  struct StateEntry {
    std::uint64_t total_visits = 0;
    ActionMap actions;

    friend bool operator==(const StateEntry&, const StateEntry&) = default;
  };

  /// UCB1 selection among `allowed` (must be non-empty): any never-tried
  /// action wins first (rng-uniform among them), otherwise the argmax of
  /// q + c * sqrt(ln(total_visits + 1) / visits), rng-uniform among ties.
  Action select(const StateKey& s, std::span<const Action> allowed, double ucb_c,
                std::mt19937_64& rng) const;

  /// One-step update: q += alpha * (reward + gamma * next_best - q).
  /// Bumps both the action's and the state's visit counters.
  void q_update(const StateKey& s, const Action& a, double reward, double next_best,
                const PolicyParams& p);

  /// Highest stored value among `allowed` at `s`; unseen actions count as 0.
  double best_q(const StateKey& s, std::span<const Action> allowed) const;

  const StateEntry* find(const StateKey& s) const;
  StateEntry& entry(const StateKey& s) { return states_[s]; }
  std::size_t state_count() const { return states_.size(); }
  std::vector<const StateKey*> sorted_state_keys() const;

  friend bool operator==(const QTable&, const QTable&) = default;

 private:
  std::unordered_map<StateKey, StateEntry> states_;
};

using ValidatorFn = std::function<Verdict(const AlgorithmDraft&)>;

/// Everything an episode needs that does not change between episodes.
struct LearnerEnv {
  PolicyParams policy{};
  RewardConfig rewards{};
  HeuristicConfig heuristics = HeuristicConfig::defaults();
  std::vector<Action> universe;
  ValidatorFn validator;

  static LearnerEnv make(const PolicyParams& policy, const RewardConfig& rewards,
                         const HeuristicConfig& heuristics, const OracleConfig& oracle);
};

struct BestAlgorithm {
  AlgorithmDraft draft;
  double reward = 0.0;
  std::uint64_t episode = 0;  // first episode that produced it
};

/// Mutable state of one simulation run; checkpointable.
struct SimulationState {
  std::uint64_t episodes_done = 0;
  std::mt19937_64 rng;
  QTable qtable;
  BlockedStateRegistry blocked;
  // Terminal key -> correctness verdict. Doubles as the oracle cache and the
  // distinct-algorithm counter.
  std::map<std::string, bool> algo_verdicts;
  std::uint64_t correct_count = 0;
  std::uint64_t incorrect_count = 0;
  std::optional<BestAlgorithm> best;
  std::optional<double> best_reward_so_far;

  explicit SimulationState(std::uint64_t seed = 0) : rng(seed) {}

  /// Rebuild the derived counters after loading algo_verdicts from disk.
  void recount_verdicts();
};

struct EpisodeResult {
  AlgorithmDraft draft;
  StateKey terminal_key;  // meaningful when completed
  bool completed = false;
  bool correct = false;
  bool new_algorithm = false;     // terminal key seen for the first time
  bool oracle_consulted = false;  // false on abort or cache hit
  std::uint64_t oracle_states = 0;
  int runtime_sum = 0;
  double total_reward = 0.0;  // runtime sum + terminal bonus/penalty
};

/// Grow one algorithm from the empty draft, updating the Q-table online and
/// applying the terminal bonus (or the flat penalty for incorrect drafts and
/// dead-end aborts) as an extra terminal-valued update on the last transition.
EpisodeResult run_episode(const LearnerEnv& env, SimulationState& sim);

/// Cumulative learning counters reported after each episode.
struct EpisodeStats {
  std::uint64_t episode = 0;  // 1-based, cumulative across resumes
  std::uint64_t cumulative_states = 0;
  std::uint64_t cumulative_algorithms = 0;
  std::uint64_t cumulative_correct = 0;
  std::uint64_t cumulative_incorrect = 0;
  double episode_reward = 0.0;
  double best_reward_so_far = 0.0;
};

using StatsSink = std::function<void(const EpisodeStats&)>;

/// Run `count` further episodes, maintaining best-algorithm and reward
/// tracking and invoking `sink` once per episode.
void run_episodes(const LearnerEnv& env, SimulationState& sim, std::uint64_t count,
                  const StatsSink& sink);

}  // namespace rbgen
