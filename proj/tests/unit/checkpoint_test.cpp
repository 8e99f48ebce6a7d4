#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "rbgen/checkpoint.hpp"
#include "rbgen/errors.hpp"
#include "test_util.hpp"

using namespace rbgen;
using namespace rbgen::test;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// A simulation with organically grown state: q-table, rng stream position,
/// verdict cache, blocked keys and a best algorithm.
SimulationState grown_sim() {
  OracleConfig oracle;
  oracle.modes = {FailureMode::NoFailure, FailureMode::Crash};
  LearnerEnv env = LearnerEnv::make(PolicyParams{100.0, 0.1, 1.0}, RewardConfig{},
                                    HeuristicConfig::defaults(), oracle);
  SimulationState sim(42);
  run_episodes(env, sim, 400, nullptr);
  return sim;
}

}  // namespace

TEST_SUITE_BEGIN("checkpoint");

TEST_CASE("action lists encode to comma-joined codes and back") {
  const std::vector<Action> body = {act("A0z"), act("N1o0"), act("Dh1"), act("X")};
  CHECK(encode_actions(body) == "A0z,N1o0,Dh1,X");
  CHECK(decode_actions("A0z,N1o0,Dh1,X") == body);
  CHECK(decode_actions("X") == std::vector<Action>{act("X")});
  CHECK_THROWS_AS(decode_actions(""), std::invalid_argument);
  CHECK_THROWS_AS(decode_actions("A0z,,X"), std::invalid_argument);
  CHECK_THROWS_AS(decode_actions("Q9"), std::invalid_argument);
}

TEST_CASE("a saved simulation loads back bit-exact") {
  TempDir dir;
  const fs::path path = dir.path() / "sim.ckpt";
  SimulationState sim = grown_sim();
  REQUIRE(sim.best.has_value());
  REQUIRE(sim.blocked.size() > 0);

  save_checkpoint(path, "fp-1234", sim);
  CheckpointData loaded = load_checkpoint(path);

  CHECK(loaded.config_fingerprint == "fp-1234");
  CHECK(loaded.sim.episodes_done == sim.episodes_done);
  CHECK(loaded.sim.rng == sim.rng);  // exact generator state, mid-stream
  CHECK(loaded.sim.qtable == sim.qtable);
  CHECK(loaded.sim.algo_verdicts == sim.algo_verdicts);
  CHECK(loaded.sim.correct_count == sim.correct_count);
  CHECK(loaded.sim.incorrect_count == sim.incorrect_count);
  CHECK(loaded.sim.blocked.sorted_keys() == sim.blocked.sorted_keys());
  REQUIRE(loaded.sim.best.has_value());
  CHECK(loaded.sim.best->draft == sim.best->draft);
  CHECK(loaded.sim.best->reward == sim.best->reward);
  CHECK(loaded.sim.best->episode == sim.best->episode);
  REQUIRE(loaded.sim.best_reward_so_far.has_value());
  CHECK(*loaded.sim.best_reward_so_far == *sim.best_reward_so_far);
}

TEST_CASE("a resumed run continues exactly where the original left off") {
  OracleConfig oracle;
  oracle.modes = {FailureMode::NoFailure};
  LearnerEnv env = LearnerEnv::make(PolicyParams{100.0, 0.1, 1.0}, RewardConfig{},
                                    HeuristicConfig::defaults(), oracle);

  SimulationState straight(7);
  run_episodes(env, straight, 200, nullptr);

  SimulationState original(7);
  run_episodes(env, original, 120, nullptr);
  TempDir dir;
  save_checkpoint(dir.path() / "sim.ckpt", "fp", original);
  SimulationState resumed = load_checkpoint(dir.path() / "sim.ckpt").sim;
  run_episodes(env, resumed, 80, nullptr);

  CHECK(resumed.episodes_done == straight.episodes_done);
  CHECK(resumed.rng == straight.rng);
  CHECK(resumed.qtable == straight.qtable);
  CHECK(resumed.algo_verdicts == straight.algo_verdicts);
  CHECK(resumed.blocked.sorted_keys() == straight.blocked.sorted_keys());
}

TEST_CASE("saving twice produces byte-identical files") {
  TempDir dir;
  SimulationState sim = grown_sim();
  save_checkpoint(dir.path() / "a.ckpt", "fp", sim);
  save_checkpoint(dir.path() / "b.ckpt", "fp", sim);
  CHECK(slurp(dir.path() / "a.ckpt") == slurp(dir.path() / "b.ckpt"));
}

TEST_CASE("saving leaves no temporary files behind") {
  TempDir dir;
  save_checkpoint(dir.path() / "sim.ckpt", "fp", SimulationState(1));
  int entries = 0;
  for (const auto& e : fs::directory_iterator(dir.path())) {
    ++entries;
    CHECK(e.path().filename() == "sim.ckpt");
  }
  CHECK(entries == 1);
}

TEST_CASE("a fresh simulation round-trips too") {
  TempDir dir;
  SimulationState sim(123);  // untouched rng, empty tables
  save_checkpoint(dir.path() / "sim.ckpt", "fp", sim);
  CheckpointData loaded = load_checkpoint(dir.path() / "sim.ckpt");
  CHECK(loaded.sim.rng == sim.rng);
  CHECK(loaded.sim.qtable.state_count() == 0);
  CHECK(loaded.sim.algo_verdicts.empty());
  CHECK_FALSE(loaded.sim.best.has_value());
  CHECK_FALSE(loaded.sim.best_reward_so_far.has_value());
}

TEST_CASE("the verdict cache rebuilds the blocked registry on load") {
  TempDir dir;
  SimulationState sim(1);
  sim.algo_verdicts = {{"B:A0z,X|R:Dz,X|P:D", true}, {"B:N0z,X|R:Dz,X|P:D", false}};
  sim.recount_verdicts();
  sim.blocked.record_incorrect(StateKey{"B:N0z,X|R:Dz,X|P:D"});
  save_checkpoint(dir.path() / "sim.ckpt", "fp", sim);

  SimulationState loaded = load_checkpoint(dir.path() / "sim.ckpt").sim;
  CHECK(loaded.blocked.size() == 1);
  CHECK(loaded.blocked.contains(StateKey{"B:N0z,X|R:Dz,X|P:D"}));
  CHECK_FALSE(loaded.blocked.contains(StateKey{"B:A0z,X|R:Dz,X|P:D"}));
  CHECK(loaded.correct_count == 1);
  CHECK(loaded.incorrect_count == 1);
}

TEST_CASE("malformed checkpoints fail with the offending line") {
  TempDir dir;
  const fs::path path = dir.path() / "sim.ckpt";

  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_checkpoint(dir.path() / "absent.ckpt"), ConfigError);
  }
  SUBCASE("wrong magic") {
    std::ofstream(path) << "not a checkpoint\n";
    try {
      load_checkpoint(path);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 1);
    }
  }
  SUBCASE("truncated rng state") {
    SimulationState sim(1);
    save_checkpoint(path, "fp", sim);
    std::string text = slurp(path);
    const auto pos = text.find("rng ");
    REQUIRE(pos != std::string::npos);
    const auto eol = text.find('\n', pos);
    std::string cut = text.substr(0, pos) + "rng 1 2 3\n" + text.substr(eol + 1);
    std::ofstream(path, std::ios::binary) << cut;
    CHECK_THROWS_AS(load_checkpoint(path), ParseError);
  }
  SUBCASE("garbage action statistics") {
    SimulationState sim(1);
    PolicyParams p;
    sim.qtable.q_update(StateKey{"B:|R:|P:B"}, act("A0z"), 1.0, 0.0, p);
    save_checkpoint(path, "fp", sim);
    std::string text = slurp(path);
    const auto pos = text.find("\nA ");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 3, "\nA x");
    std::ofstream(path, std::ios::binary) << text;
    CHECK_THROWS_AS(load_checkpoint(path), ParseError);
  }
}

TEST_SUITE_END();
