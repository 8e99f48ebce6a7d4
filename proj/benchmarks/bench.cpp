#include <benchmark/benchmark.h>

#include <vector>

#include "rbgen/heuristics.hpp"
#include "rbgen/learner.hpp"
#include "rbgen/oracle.hpp"
#include "rbgen/protocol.hpp"

namespace {

using namespace rbgen;

Action act(const char* code) { return *action_from_code(code); }

AlgorithmDraft draft_of(std::vector<Action> broadcast, std::vector<Action> receive) {
  return AlgorithmDraft::from_handlers(std::move(broadcast), std::move(receive));
}

AlgorithmDraft single_round_broadcast() {
  return draft_of({act("A0z"), act("X")}, {act("Dz"), act("X")});
}
AlgorithmDraft self_seeded_relay() {
  return draft_of({act("S0z"), act("X")}, {act("N1z"), act("Dz"), act("X")});
}
AlgorithmDraft quorum_echo() {
  return draft_of({act("A0z"), act("X")}, {act("A1o0"), act("Dh1"), act("A1f1"), act("X")});
}

OracleConfig oracle_for(std::vector<FailureMode> modes) {
  OracleConfig cfg;
  cfg.modes = std::move(modes);
  return cfg;
}

void BM_EnumerateUniverse(benchmark::State& state) {
  for (auto _ : state) {
    auto universe = enumerate_actions(static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(universe);
  }
}
BENCHMARK(BM_EnumerateUniverse)->Arg(2)->Arg(4);

void BM_AllowedActions(benchmark::State& state) {
  const auto universe = enumerate_actions(2);
  const auto cfg = HeuristicConfig::defaults();
  const BlockedStateRegistry blocked;
  AlgorithmDraft draft;
  draft.append(act("A0z"));
  draft.append(act("X"));
  draft.append(act("A1o0"));
  for (auto _ : state) {
    auto allowed = allowed_actions(draft, universe, cfg, blocked);
    benchmark::DoNotOptimize(allowed);
  }
}
BENCHMARK(BM_AllowedActions);

void BM_CanonicalKey(benchmark::State& state) {
  const AlgorithmDraft alg = quorum_echo();
  for (auto _ : state) {
    auto key = canonical_key(alg);
    benchmark::DoNotOptimize(key);
  }
}
BENCHMARK(BM_CanonicalKey);

void BM_ValidateNoFailure(benchmark::State& state) {
  const AlgorithmDraft alg = single_round_broadcast();
  const OracleConfig cfg = oracle_for({FailureMode::NoFailure});
  for (auto _ : state) {
    auto verdict = validate(alg, cfg);
    benchmark::DoNotOptimize(verdict);
  }
}
BENCHMARK(BM_ValidateNoFailure);

void BM_ValidateCrash(benchmark::State& state) {
  const AlgorithmDraft alg = self_seeded_relay();
  const OracleConfig cfg = oracle_for({FailureMode::NoFailure, FailureMode::Crash});
  for (auto _ : state) {
    auto verdict = validate(alg, cfg);
    benchmark::DoNotOptimize(verdict);
  }
}
BENCHMARK(BM_ValidateCrash);

void BM_ValidateByzantine(benchmark::State& state) {
  const AlgorithmDraft alg = quorum_echo();
  const OracleConfig cfg = oracle_for(
      {FailureMode::NoFailure, FailureMode::Crash, FailureMode::Byzantine});
  for (auto _ : state) {
    auto verdict = validate(alg, cfg);
    benchmark::DoNotOptimize(verdict);
  }
}
BENCHMARK(BM_ValidateByzantine);

void BM_LearningEpisode(benchmark::State& state) {
  const LearnerEnv env =
      LearnerEnv::make(PolicyParams{100.0, 0.1, 1.0}, RewardConfig{},
                       HeuristicConfig::defaults(), oracle_for({FailureMode::NoFailure}));
  SimulationState sim(1);
  for (auto _ : state) {
    auto res = run_episode(env, sim);
    benchmark::DoNotOptimize(res);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_LearningEpisode);

}  // namespace

BENCHMARK_MAIN();
