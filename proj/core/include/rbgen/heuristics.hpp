#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <unordered_set>
#include <vector>

#include "rbgen/protocol.hpp"

namespace rbgen {

/// Generation heuristics GH1..GH10, each independently switchable. All are
/// conjunctive filters over the action universe; disabling one can only grow
/// the allowed set.
struct HeuristicConfig {
  std::array<bool, 10> enabled = {true, true, true, true, true,
                                  true, true, true, true, true};

  // GH2: logic kinds admissible per handler (bit per LogicKind).
  std::uint8_t broadcast_logics = 0;
  std::uint8_t receive_logics = 0;
  // GH3: threshold kinds admissible per handler (bit per ThresholdKind).
  std::uint8_t broadcast_thresholds = 0;
  std::uint8_t receive_thresholds = 0;
  // GH6: handler size bounds, Stop included.
  int min_actions = 2;
  int max_actions = 4;
  // GH5: the only type the Broadcast handler may send.
  std::uint8_t broadcast_send_type = 0;
  // GH10: sends of type indices >= max_types are dropped.
  int max_types = 2;

  static HeuristicConfig defaults();

  bool gh(int number) const { return enabled[number - 1]; }
  std::uint8_t logics_for(HandlerId h) const {
    return h == HandlerId::Broadcast ? broadcast_logics : receive_logics;
  }
  std::uint8_t thresholds_for(HandlerId h) const {
    return h == HandlerId::Broadcast ? broadcast_thresholds : receive_thresholds;
  }
};

constexpr std::uint8_t logic_bit(LogicKind k) {
  return static_cast<std::uint8_t>(1u << static_cast<int>(k));
}
constexpr std::uint8_t threshold_bit(ThresholdKind k) {
  return static_cast<std::uint8_t>(1u << static_cast<int>(k));
}

/// Terminal state keys of algorithms already proven incorrect. GH9 refuses
/// the closing Stop that would recreate one of them.
class BlockedStateRegistry {
 public:
  void record_incorrect(const StateKey& terminal_key) { keys_.insert(terminal_key.value); }
  bool contains(const StateKey& terminal_key) const {
    return keys_.count(terminal_key.value) != 0;
  }
  std::size_t size() const { return keys_.size(); }
  std::vector<std::string> sorted_keys() const;

 private:
  std::unordered_set<std::string> keys_;
};

/// Subset of `universe` admissible as the next action of `d`'s open handler,
/// in universe order. An empty result means the draft is a dead end; the
/// caller abandons the episode without consulting the oracle.
std::vector<Action> allowed_actions(const AlgorithmDraft& d, std::span<const Action> universe,
                                    const HeuristicConfig& cfg,
                                    const BlockedStateRegistry& blocked);

}  // namespace rbgen
