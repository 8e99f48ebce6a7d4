#pragma once

#include <array>
#include <vector>

#include "rbgen/protocol.hpp"

namespace rbgen {

/// Additive reward schedule. Entries are costs (usually <= 0); the bonus
/// rewards correctness while preserving the preference for cheaper algorithms.
struct RewardConfig {
  // Indexed by LogicKind: all, neighbours, self, deliver, stop.
  std::array<int, kLogicKindCount> logic = {-3, -2, -1, -1, 0};
  // Indexed by ThresholdKind: zero, one, F+1, (N+F)/2, N-F.
  std::array<int, kThresholdKindCount> threshold = {0, -1, -2, -3, -4};
  int handler_broadcast = 0;
  int handler_receive = -1;
  int correct_bonus_base = 100;
  int incorrect_reward = -1;

  // First send of typeK anywhere in the draft costs -K.
  int type_intro(int type_index) const { return -type_index; }
  int handler_modifier(HandlerId h) const {
    return h == HandlerId::Broadcast ? handler_broadcast : handler_receive;
  }
};

/// Immediate reward for appending `a` to `draft_so_far`'s open `handler`:
/// logic cost + threshold cost + type introduction (first send of that type
/// only) + handler modifier.
int runtime_reward(const Action& a, HandlerId handler, const AlgorithmDraft& draft_so_far,
                   const RewardConfig& cfg);

/// Per-episode accounting of accumulated runtime cost.
struct LedgerEntry {
  StateKey state;
  Action action;
  int reward = 0;
};

class EpisodeLedger {
 public:
  void add(StateKey state, const Action& action, int reward) {
    runtime_sum_ += reward;
    entries_.push_back({std::move(state), action, reward});
  }
  int runtime_sum() const { return runtime_sum_; }
  const std::vector<LedgerEntry>& entries() const { return entries_; }

 private:
  int runtime_sum_ = 0;
  std::vector<LedgerEntry> entries_;
};

/// Terminal bonus: base + accumulated runtime cost for correct algorithms
/// (cheaper algorithms keep a strictly higher bonus), flat penalty otherwise.
int bonus_reward(bool correct, const EpisodeLedger& ledger, const RewardConfig& cfg);

}  // namespace rbgen
