#include "rbgen/learner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rbgen {

Action QTable::select(const StateKey& s, std::span<const Action> allowed, double ucb_c,
                      std::mt19937_64& rng) const {
  if (allowed.empty()) throw std::invalid_argument("select requires a non-empty action set");
  const StateEntry* entry = find(s);
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < allowed.size(); ++i) {
    const ActionStats* st = nullptr;
    if (entry) {
      auto it = entry->actions.find(allowed[i]);
      if (it != entry->actions.end()) st = &it->second;
    }
    if (!st || st->visits == 0) candidates.push_back(i);
  }
  if (candidates.empty()) {
    const double log_total = std::log(static_cast<double>(entry->total_visits) + 1.0);
    double best_score = 0.0;
    for (std::size_t i = 0; i < allowed.size(); ++i) {
      const ActionStats& st = entry->actions.at(allowed[i]);
      const double score =
          st.q + ucb_c * std::sqrt(log_total / static_cast<double>(st.visits));
      if (candidates.empty() || score > best_score) {
        best_score = score;
        candidates.assign(1, i);
      } else if (score == best_score) {
        candidates.push_back(i);
      }
    }
  }
  const std::size_t pick =
      candidates.size() == 1 ? 0 : static_cast<std::size_t>(rng() % candidates.size());
  return allowed[candidates[pick]];
}

void QTable::q_update(const StateKey& s, const Action& a, double reward, double next_best,
                      const PolicyParams& p) {
  StateEntry& e = states_[s];
  ActionStats& st = e.actions[a];
  st.q += p.alpha * (reward + p.gamma * next_best - st.q);
  ++st.visits;
  ++e.total_visits;
}

double QTable::best_q(const StateKey& s, std::span<const Action> allowed) const {
  const StateEntry* entry = find(s);
  double best = 0.0;
  if (!entry) return allowed.empty() ? 0.0 : best;
  for (const auto& a : allowed) {
    auto it = entry->actions.find(a);
    const double q = it == entry->actions.end() ? 0.0 : it->second.q;
    best = std::max(best, q);
  }
  return best;
}

const QTable::StateEntry* QTable::find(const StateKey& s) const {
  auto it = states_.find(s);
  return it == states_.end() ? nullptr : &it->second;
}

std::vector<const StateKey*> QTable::sorted_state_keys() const {
  std::vector<const StateKey*> keys;
  keys.reserve(states_.size());
  for (const auto& [k, v] : states_) keys.push_back(&k);
  std::sort(keys.begin(), keys.end(),
            [](const StateKey* a, const StateKey* b) { return a->value < b->value; });
  return keys;
}

LearnerEnv LearnerEnv::make(const PolicyParams& policy, const RewardConfig& rewards,
                            const HeuristicConfig& heuristics, const OracleConfig& oracle) {
  LearnerEnv env;
  env.policy = policy;
  env.rewards = rewards;
  env.heuristics = heuristics;
  env.universe = enumerate_actions(heuristics.max_types);
  env.validator = [oracle](const AlgorithmDraft& alg) { return validate(alg, oracle); };
  return env;
}

void SimulationState::recount_verdicts() {
  correct_count = 0;
  incorrect_count = 0;
  for (const auto& [key, correct] : algo_verdicts) {
    if (correct)
      ++correct_count;
    else
      ++incorrect_count;
  }
}

EpisodeResult run_episode(const LearnerEnv& env, SimulationState& sim) {
  EpisodeResult res;
  AlgorithmDraft draft;
  EpisodeLedger ledger;

  struct Pending {
    StateKey state;
    Action action;
    double reward;
  };
  std::optional<Pending> prev;

  while (!draft.complete()) {
    StateKey here = canonical_key(draft);
    auto allowed = allowed_actions(draft, env.universe, env.heuristics, sim.blocked);
    if (prev) {
      sim.qtable.q_update(prev->state, prev->action, prev->reward,
                          sim.qtable.best_q(here, allowed), env.policy);
    }
    if (allowed.empty()) break;  // dead end; abandon without consulting the oracle
    Action a = sim.qtable.select(here, allowed, env.policy.ucb_c, sim.rng);
    const int r = runtime_reward(a, draft.current_handler(), draft, env.rewards);
    ledger.add(here, a, r);
    draft.append(a);
    prev = Pending{std::move(here), a, static_cast<double>(r)};
  }

  res.completed = draft.complete();
  int bonus = env.rewards.incorrect_reward;
  if (res.completed) {
    // The loop exits right after the closing Stop, so the last transition has
    // not received its regular (terminal, next_best = 0) update yet.
    if (prev) sim.qtable.q_update(prev->state, prev->action, prev->reward, 0.0, env.policy);
    res.terminal_key = canonical_key(draft);
    auto [it, fresh] = sim.algo_verdicts.try_emplace(res.terminal_key.value, false);
    if (fresh) {
      Verdict v = env.validator(draft);
      it->second = v.correct;
      res.new_algorithm = true;
      res.oracle_consulted = true;
      res.oracle_states = v.states_explored;
      if (v.correct) {
        ++sim.correct_count;
      } else {
        ++sim.incorrect_count;
        sim.blocked.record_incorrect(res.terminal_key);
      }
    }
    res.correct = it->second;
    bonus = bonus_reward(res.correct, ledger, env.rewards);
  }
  // Terminal bonus (or dead-end penalty) as an extra terminal-valued update.
  if (prev) sim.qtable.q_update(prev->state, prev->action, bonus, 0.0, env.policy);

  res.draft = std::move(draft);
  res.runtime_sum = ledger.runtime_sum();
  res.total_reward = ledger.runtime_sum() + bonus;
  return res;
}

void run_episodes(const LearnerEnv& env, SimulationState& sim, std::uint64_t count,
                  const StatsSink& sink) {
  for (std::uint64_t i = 0; i < count; ++i) {
    EpisodeResult res = run_episode(env, sim);
    ++sim.episodes_done;
    if (res.completed && res.correct &&
        (!sim.best || res.total_reward > sim.best->reward)) {
      sim.best = BestAlgorithm{res.draft, res.total_reward, sim.episodes_done};
    }
    if (!sim.best_reward_so_far || res.total_reward > *sim.best_reward_so_far)
      sim.best_reward_so_far = res.total_reward;
    if (sink) {
      EpisodeStats st;
      st.episode = sim.episodes_done;
      st.cumulative_states = sim.qtable.state_count();
      st.cumulative_algorithms = sim.algo_verdicts.size();
      st.cumulative_correct = sim.correct_count;
      st.cumulative_incorrect = sim.incorrect_count;
      st.episode_reward = res.total_reward;
      st.best_reward_so_far = *sim.best_reward_so_far;
      sink(st);
    }
  }
}

}  // namespace rbgen
