#include <doctest.h>

#include <set>
#include <string>

#include "rbgen/errors.hpp"
#include "rbgen/oracle.hpp"
#include "test_util.hpp"

using namespace rbgen;
using namespace rbgen::test;

namespace {

OracleConfig no_failure_cfg() {
  OracleConfig cfg;
  cfg.modes = {FailureMode::NoFailure};
  return cfg;
}

OracleConfig crash_cfg() {
  OracleConfig cfg;
  cfg.modes = {FailureMode::NoFailure, FailureMode::Crash};
  return cfg;
}

OracleConfig byzantine_cfg() {
  return OracleConfig{};  // all three modes at the stock sizes
}

OracleConfig modified_cfg() {
  OracleConfig cfg;
  cfg.modes = {FailureMode::NoFailure, FailureMode::Crash};
  cfg.crash = SystemParams{4, 1};
  return cfg;
}

}  // namespace

TEST_SUITE_BEGIN("oracle");

TEST_CASE("scenario counts follow the mode structure") {
  const auto alg1 = single_round_broadcast();  // one message type
  const auto alg3 = quorum_echo();             // two message types

  CHECK(build_scenarios(alg1, no_failure_cfg()).size() == 1);
  CHECK(build_scenarios(alg1, crash_cfg()).size() == 3);
  // Byzantine: 2 fault placements x |alphabet| x 2 contents x (N-F+1) target counts.
  CHECK(build_scenarios(alg1, byzantine_cfg()).size() == 3 + 2 * 1 * 2 * 4);
  CHECK(build_scenarios(alg3, byzantine_cfg()).size() == 3 + 2 * 2 * 2 * 4);
}

TEST_CASE("fault placement toggles drop the matching scenarios") {
  const auto alg = self_seeded_relay();
  OracleConfig cfg = crash_cfg();
  cfg.fault_in_broadcast = false;  // no faulty-initiator scenarios
  CHECK(build_scenarios(alg, cfg).size() == 2);
  cfg.fault_in_broadcast = true;
  cfg.fault_in_receive = false;
  CHECK(build_scenarios(alg, cfg).size() == 2);
}

TEST_CASE("a crash mode with a zero fault budget collapses to one plain scenario") {
  OracleConfig cfg;
  cfg.modes = {FailureMode::Crash};
  cfg.crash = SystemParams{3, 0};
  const auto scs = build_scenarios(single_round_broadcast(), cfg);
  REQUIRE(scs.size() == 1);
  CHECK(scs[0].faulty.empty());
  CHECK(scs[0].adversary.kind == Adversary::Kind::None);
}

TEST_CASE("scenario descriptions are stable") {
  const auto scs = build_scenarios(quorum_echo(), byzantine_cfg());
  CHECK(scs.front().describe() == "no_failure n=3 f=0 initiator=p0 faulty={}");
  CHECK(scs[1].describe() == "crash n=3 f=1 initiator=p0 faulty={p0}");
  CHECK(scs[2].describe() == "crash n=3 f=1 initiator=p0 faulty={p1}");
  CHECK(scs[3].mode == FailureMode::Byzantine);
  CHECK(scs.back().describe() ==
        "byzantine n=4 f=1 initiator=p0 faulty={p1} inject=(type1,m',k=3)");
}

TEST_CASE("single-round broadcast is correct without failures") {
  const auto v = validate(single_round_broadcast(), no_failure_cfg());
  CHECK(v.correct);
  CHECK(v.states_explored == 4);
}

TEST_CASE("single-round broadcast loses agreement under a crashing initiator") {
  const auto v = validate(single_round_broadcast(), crash_cfg());
  REQUIRE_FALSE(v.correct);
  CHECK(v.property == Property::Agreement);
  REQUIRE(v.scenario.has_value());
  CHECK(v.scenario->describe() == "crash n=3 f=1 initiator=p0 faulty={p0}");
}

TEST_CASE("self-seeded relay tolerates crashes but not byzantine forgery") {
  const auto crash_verdict = validate(self_seeded_relay(), crash_cfg());
  CHECK(crash_verdict.correct);
  CHECK(crash_verdict.states_explored == 46);

  const auto byz_verdict = validate(self_seeded_relay(), byzantine_cfg());
  REQUIRE_FALSE(byz_verdict.correct);
  CHECK(byz_verdict.property == Property::Integrity);
  REQUIRE(byz_verdict.scenario.has_value());
  CHECK(byz_verdict.scenario->describe() ==
        "byzantine n=4 f=1 initiator=p0 faulty={p1} inject=(type1,m',k=1)");
}

TEST_CASE("the quorum echo is correct under every stock mode") {
  const auto v = validate(quorum_echo(), byzantine_cfg());
  CHECK(v.correct);
  CHECK(v.states_explored == 559);

  const auto crash_only = validate(quorum_echo(), crash_cfg());
  CHECK(crash_only.correct);
  CHECK(crash_only.states_explored == 139);
}

TEST_CASE("the neighbour echo needs the stricter fault ratio") {
  const auto loose = validate(neighbour_echo_fplus1(), modified_cfg());
  CHECK(loose.correct);
  CHECK(loose.states_explored == 212);

  const auto tight = validate(neighbour_echo_fplus1(), crash_cfg());
  REQUIRE_FALSE(tight.correct);
  CHECK(tight.property == Property::Agreement);
  REQUIRE(tight.scenario.has_value());
  CHECK(tight.scenario->describe() == "crash n=3 f=1 initiator=p0 faulty={p0}");
}

TEST_CASE("forged first-round content is exempt, relayed and delivered uniformly") {
  // Deliver-on-receipt with a type0 relay: a forged type0 is indistinguishable
  // from a legitimate broadcast, and the relay spreads it to every process.
  const auto gossip = draft_of({"N0z", "X"}, {"N0o0", "Dz", "X"});
  CHECK(validate(gossip, byzantine_cfg()).correct);
}

TEST_CASE("validate reports the first violation in configured mode order") {
  const auto alg = single_round_broadcast();
  OracleConfig crash_first;
  crash_first.modes = {FailureMode::Crash, FailureMode::NoFailure};
  const auto v = validate(alg, crash_first);
  REQUIRE_FALSE(v.correct);
  CHECK(v.scenario->mode == FailureMode::Crash);
}

TEST_CASE("faulty initiators branch per crash point of the broadcast burst") {
  Scenario sc;
  sc.mode = FailureMode::Crash;
  sc.params = {3, 1};
  sc.initiator = 0;
  sc.faulty = {0};
  sc.adversary.kind = Adversary::Kind::CrashDuringSend;

  // SEND to all has fanout 3: crash after 0, 1 or 2 sends, or complete.
  CHECK(exploration_roots(single_round_broadcast(), sc).size() == 4);
  // SEND to myself has fanout 1: crash before it or complete.
  CHECK(exploration_roots(self_seeded_relay(), sc).size() == 2);

  Scenario correct_initiator = sc;
  correct_initiator.faulty = {1};
  CHECK(exploration_roots(single_round_broadcast(), correct_initiator).size() == 1);
}

TEST_CASE("deliveries to crash-faulty processes branch, others are deterministic") {
  Scenario sc;
  sc.mode = FailureMode::Crash;
  sc.params = {3, 1};
  sc.initiator = 0;
  sc.faulty = {1};
  sc.adversary.kind = Adversary::Kind::CrashDuringSend;

  const auto alg = self_seeded_relay();
  auto roots = exploration_roots(alg, sc);
  REQUIRE(roots.size() == 1);

  // The initiator's self-send is the only message in flight.
  GlobalState g = roots[0].state;
  REQUIRE(g.in_flight.size() == 1);
  const auto self_msg = SimMessage::unpack(g.in_flight[0]);
  CHECK(self_msg.dest == 0);
  auto after_self = step_deliver(g, self_msg, alg, sc);
  REQUIRE(after_self.size() == 1);  // correct destination: no branching

  // The relay burst now targets p1 and p2; delivering to faulty p1 branches
  // into crash-after-0, crash-after-1 and survive-the-burst.
  g = after_self[0].state;
  for (auto packed : g.in_flight) {
    const auto msg = SimMessage::unpack(packed);
    const auto outcomes = step_deliver(g, msg, alg, sc);
    if (msg.dest == 1) {
      CHECK(outcomes.size() == 3);
      int crashed = 0, survived = 0;
      for (const auto& o : outcomes)
        o.state.procs[1].crashed ? ++crashed : ++survived;
      CHECK(crashed == 2);
      CHECK(survived == 1);
    } else {
      CHECK(outcomes.size() == 1);
    }
  }
}

TEST_CASE("the state budget aborts exploration with a resource error") {
  OracleConfig cfg = byzantine_cfg();
  cfg.state_budget = 1;
  try {
    validate(quorum_echo(), cfg);
    FAIL("expected ResourceLimitError");
  } catch (const ResourceLimitError& e) {
    CHECK(e.states_seen() >= 1);
  }
}

TEST_CASE("memoized and unmemoized exploration agree on every corpus verdict") {
  struct Case {
    AlgorithmDraft alg;
    OracleConfig cfg;
  };
  const Case corpus[] = {
      {single_round_broadcast(), no_failure_cfg()},
      {single_round_broadcast(), crash_cfg()},
      {self_seeded_relay(), crash_cfg()},
      {self_seeded_relay(), byzantine_cfg()},
      {quorum_echo(), byzantine_cfg()},
      {neighbour_echo_fplus1(), modified_cfg()},
      {neighbour_echo_fplus1(), crash_cfg()},
  };
  for (const auto& c : corpus) {
    OracleConfig memo = c.cfg, plain = c.cfg;
    memo.memoize = true;
    plain.memoize = false;
    const auto a = validate(c.alg, memo);
    const auto b = validate(c.alg, plain);
    CHECK(a.correct == b.correct);
    if (!a.correct) {
      CHECK(a.property == b.property);
      CHECK(a.scenario->describe() == b.scenario->describe());
    }
    CHECK(a.states_explored <= b.states_explored);
  }
}

TEST_CASE("counterexample traces replay to the violating terminal state") {
  const auto alg = single_round_broadcast();
  const auto v = validate(alg, crash_cfg());
  REQUIRE_FALSE(v.correct);
  REQUIRE(v.scenario.has_value());
  REQUIRE_FALSE(v.trace.steps.empty());

  const GlobalState terminal = replay_trace(alg, *v.scenario, v.trace);
  CHECK(terminal.procs[0].crashed);
  CHECK((terminal.procs[1].delivered_mask & 1u) == 1u);  // p1 delivered m
  CHECK(terminal.procs[2].delivered_mask == 0u);         // p2 never did

  const std::string text = render_trace(alg, v);
  CHECK(text.find("violated property: RB-Agreement") == 0);
  CHECK(text.find("scenario: crash n=3 f=1 initiator=p0 faulty={p0}") != std::string::npos);
  CHECK(text.find("terminal deliveries:") != std::string::npos);
  CHECK(text.find("  p1: {m}") != std::string::npos);
}

TEST_CASE("traces of correct algorithms render as a clean verdict") {
  const auto v = validate(single_round_broadcast(), no_failure_cfg());
  CHECK(render_trace(single_round_broadcast(), v) == "verdict: correct\n");
}

TEST_SUITE_END();
