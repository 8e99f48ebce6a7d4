#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rbgen/protocol.hpp"

namespace rbgen {

enum class FailureMode : std::uint8_t { NoFailure = 0, Crash, Byzantine };

enum class Property : std::uint8_t { Validity = 0, Agreement, Integrity };

const char* to_string(FailureMode m);
const char* to_string(Property p);

/// Message contents tracked by the checker: the initiator's payload and one
/// attacker-chosen payload that only faulty processes can introduce.
enum class ContentId : std::uint8_t { Legit = 0, Malicious = 1 };
inline constexpr int kContentCount = 2;

struct Adversary {
  enum class Kind : std::uint8_t { None = 0, CrashDuringSend, ByzantineInject };
  Kind kind = Kind::None;
  // ByzantineInject: every faulty process sends (inject_type, inject_content)
  // to the first inject_targets correct processes, then absorbs all input.
  std::uint8_t inject_type = 0;
  ContentId inject_content = ContentId::Legit;
  int inject_targets = 0;
};

struct Scenario {
  FailureMode mode = FailureMode::NoFailure;
  SystemParams params{};
  int initiator = 0;
  std::vector<int> faulty;
  Adversary adversary{};

  bool is_faulty(int process) const;
  bool initiator_faulty() const { return is_faulty(initiator); }
  std::string describe() const;
};

struct OracleConfig {
  std::vector<FailureMode> modes = {FailureMode::NoFailure, FailureMode::Crash,
                                    FailureMode::Byzantine};
  SystemParams no_failure{3, 0};
  SystemParams crash{3, 1};
  SystemParams byzantine{4, 1};
  bool fault_in_broadcast = true;  // include faulty-initiator scenarios
  bool fault_in_receive = true;    // include faulty-non-initiator scenarios
  bool check_validity = true;
  bool check_agreement = true;
  bool check_integrity = true;
  std::uint64_t state_budget = 50'000'000;  // per scenario
  bool memoize = true;
  bool capture_traces = true;

  const SystemParams& params_for(FailureMode m) const;
};

/// Snapshot of one process during exploration. `received` holds a distinct-
/// sender bitmask per (type, content) pair, index = type * 2 + content.
struct ProcessState {
  std::vector<std::uint32_t> received;
  std::uint32_t sent_guard = 0;     // bit per (type, content)
  std::uint8_t delivered_mask = 0;  // bit per content
  bool crashed = false;

  friend bool operator==(const ProcessState&, const ProcessState&) = default;
};

/// Packed in-flight message: sender, destination, type, content.
struct SimMessage {
  std::uint8_t sender = 0, dest = 0, type = 0;
  ContentId content = ContentId::Legit;

  std::uint32_t packed() const {
    return (std::uint32_t(sender) << 24) | (std::uint32_t(dest) << 16) |
           (std::uint32_t(type) << 8) | std::uint32_t(content);
  }
  static SimMessage unpack(std::uint32_t v) {
    return {std::uint8_t(v >> 24), std::uint8_t(v >> 16), std::uint8_t(v >> 8),
            static_cast<ContentId>(v & 0xff)};
  }
};

struct GlobalState {
  std::vector<ProcessState> procs;
  std::vector<std::uint32_t> in_flight;  // packed messages, multiset
  std::uint32_t total_sent = 0;          // diagnostic, not part of identity

  std::string fingerprint() const;
};

/// One step of a counterexample: either the initiator's broadcast event or
/// the delivery of an in-flight message. `crash_prefixes` records, per send
/// burst the event fired on a crashing process, how many destinations were
/// reached (burst fanout = completed, less = crashed mid-burst).
struct TraceStep {
  enum class Kind : std::uint8_t { Broadcast = 0, Deliver };
  Kind kind = Kind::Broadcast;
  SimMessage message{};  // Deliver only
  std::vector<int> crash_prefixes;
};

struct Trace {
  std::vector<TraceStep> steps;
};

struct Verdict {
  bool correct = true;
  Property property = Property::Validity;  // meaningful when !correct
  std::optional<Scenario> scenario;        // scenario that failed
  Trace trace;                             // populated when capture_traces
  std::uint64_t states_explored = 0;

  static Verdict ok() { return {}; }
};

/// All fault scenarios the configured modes imply for `alg`, in deterministic
/// order: modes as configured; within Crash, faulty initiator then faulty
/// non-initiator; within Byzantine, model-major over injected type (alg's
/// alphabet, ascending), content (legit, malicious) and target count 0..N-F.
std::vector<Scenario> build_scenarios(const AlgorithmDraft& alg, const OracleConfig& cfg);

/// Initial state for a scenario: broadcast handler ran (when the initiator
/// participates) and injections seeded. Crash-mode faulty initiators branch;
/// all roots are returned with their trace prefix.
struct ExplorationRoot {
  GlobalState state;
  Trace prefix;
};
std::vector<ExplorationRoot> exploration_roots(const AlgorithmDraft& alg, const Scenario& sc);

/// Deliver one in-flight message and run the destination's receive handler.
/// Crash-mode faulty destinations branch per send-burst prefix; every other
/// delivery yields exactly one successor. Successor order is deterministic.
struct EventOutcome {
  GlobalState state;
  std::vector<int> crash_prefixes;
};
std::vector<EventOutcome> step_deliver(const GlobalState& g, const SimMessage& msg,
                                       const AlgorithmDraft& alg, const Scenario& sc);

/// Exhaustive DFS over delivery interleavings (and crash points) for one
/// scenario. Returns the first violation in DFS order, or Correct. Throws
/// ResourceLimitError when the state budget is exhausted.
Verdict explore(const AlgorithmDraft& alg, const Scenario& sc, const OracleConfig& cfg);

/// Runs every scenario in order and returns the first violation, if any.
Verdict validate(const AlgorithmDraft& alg, const OracleConfig& cfg);

/// Re-execute a recorded trace; returns the terminal state it leads to.
GlobalState replay_trace(const AlgorithmDraft& alg, const Scenario& sc, const Trace& trace);

/// Human-readable rendering of a verdict's counterexample.
std::string render_trace(const AlgorithmDraft& alg, const Verdict& v);

}  // namespace rbgen
