#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rbgen {

/// System size and fault budget used when instantiating thresholds.
struct SystemParams {
  int n = 3;
  int f = 0;

  friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

/// Guard thresholds an action can wait on. Symbolic; resolved against
/// SystemParams by threshold_count().
enum class ThresholdKind : std::uint8_t {
  Zero = 0,
  One,
  FPlusOne,
  HalfNPlusF,
  NMinusF,
};

inline constexpr int kThresholdKindCount = 5;

/// Messages received of `msg_type` from at least threshold_count() distinct
/// senders. A Zero threshold is satisfied by any receive event, so its
/// msg_type is normalized to 0 and carries no meaning.
struct Condition {
  ThresholdKind threshold = ThresholdKind::Zero;
  std::uint8_t msg_type = 0;

  static Condition zero() { return {}; }
  static Condition of(ThresholdKind k, std::uint8_t type) {
    if (k == ThresholdKind::Zero) return {};
    return {k, type};
  }

  auto operator<=>(const Condition&) const = default;
};

enum class LogicKind : std::uint8_t {
  SendToAll = 0,
  SendToNeighbours,
  SendToSelf,
  Deliver,
  Stop,
};

inline constexpr int kLogicKindCount = 5;

/// One guarded statement of a handler. `send_type` is meaningful only for the
/// three send logics and is normalized to 0 otherwise; Stop always carries the
/// Zero condition.
struct Action {
  LogicKind logic = LogicKind::Stop;
  std::uint8_t send_type = 0;
  Condition condition{};

  static Action send(LogicKind fanout, std::uint8_t type, Condition c);
  static Action deliver(Condition c) { return {LogicKind::Deliver, 0, c}; }
  static Action stop() { return {LogicKind::Stop, 0, Condition::zero()}; }

  bool is_send() const {
    return logic == LogicKind::SendToAll || logic == LogicKind::SendToNeighbours ||
           logic == LogicKind::SendToSelf;
  }
  bool is_deliver() const { return logic == LogicKind::Deliver; }
  bool is_stop() const { return logic == LogicKind::Stop; }

  auto operator<=>(const Action&) const = default;
};

enum class HandlerId : std::uint8_t { Broadcast = 0, Receive = 1 };

enum class Phase : std::uint8_t { Broadcast = 0, Receive = 1, Done = 2 };

/// Resolve a symbolic threshold to a message count.
/// HalfNPlusF means "at least (N+F)/2", i.e. ceil((N+F)/2) for odd sums.
int threshold_count(ThresholdKind k, const SystemParams& p);

/// Compact reversible encoding of an action, e.g. "A1o0" for
/// SendToAll(type1) guarded on one type0 message. Used by state keys and
/// checkpoint files.
std::string action_code(const Action& a);
std::optional<Action> action_from_code(std::string_view code);

/// Full action universe for algorithms over `max_types` message types:
/// sends (fanout-major, then sent type, then condition), delivers, stop.
/// Conditions enumerate Zero first, then threshold-major over types.
std::vector<Action> enumerate_actions(int max_types);

/// A partially or fully built two-handler algorithm. Actions are appended to
/// the handler selected by the current phase; appending Stop closes that
/// handler and advances the phase. Nothing can follow Stop within a handler.
class AlgorithmDraft {
 public:
  AlgorithmDraft() = default;

  /// Build a complete algorithm from closed handler bodies. Both must end
  /// with exactly one trailing Stop. Throws std::invalid_argument otherwise.
  static AlgorithmDraft from_handlers(std::vector<Action> broadcast,
                                      std::vector<Action> receive);

  void append(const Action& a);

  Phase phase() const { return phase_; }
  bool complete() const { return phase_ == Phase::Done; }
  HandlerId current_handler() const;

  const std::vector<Action>& broadcast_actions() const { return broadcast_; }
  const std::vector<Action>& receive_actions() const { return receive_; }
  const std::vector<Action>& handler_actions(HandlerId h) const {
    return h == HandlerId::Broadcast ? broadcast_ : receive_;
  }

  /// Distinct message types mentioned anywhere (sent or waited on), ascending.
  std::vector<std::uint8_t> alphabet() const;
  /// Types sent by the Broadcast handler (the protocol's initiation types).
  std::vector<std::uint8_t> broadcast_sent_types() const;

  friend bool operator==(const AlgorithmDraft&, const AlgorithmDraft&) = default;

 private:
  std::vector<Action> broadcast_;
  std::vector<Action> receive_;
  Phase phase_ = Phase::Broadcast;
};

/// Canonical fingerprint of a draft: per-handler action multisets plus phase.
/// Drafts that differ only in intra-handler action order map to the same key.
struct StateKey {
  std::string value;

  friend bool operator==(const StateKey&, const StateKey&) = default;
  friend auto operator<=>(const StateKey&, const StateKey&) = default;
};

StateKey canonical_key(const AlgorithmDraft& d);

struct EfficiencyMetrics {
  long long messages_worst_case = 0;
  int comm_steps = 0;
  int deliver_cost = 0;

  friend bool operator==(const EfficiencyMetrics&, const EfficiencyMetrics&) = default;
};

/// Worst-case cost profile of a complete algorithm at the given system size.
/// Throws std::invalid_argument on incomplete drafts.
EfficiencyMetrics efficiency_metrics(const AlgorithmDraft& alg, const SystemParams& p);

}  // namespace rbgen

template <>
struct std::hash<rbgen::StateKey> {
  std::size_t operator()(const rbgen::StateKey& k) const noexcept {
    return std::hash<std::string>{}(k.value);
  }
};
