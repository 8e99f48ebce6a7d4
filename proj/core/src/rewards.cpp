#include "rbgen/rewards.hpp"

namespace rbgen {

int runtime_reward(const Action& a, HandlerId handler, const AlgorithmDraft& draft_so_far,
                   const RewardConfig& cfg) {
  int r = cfg.logic[static_cast<int>(a.logic)];
  if (!a.is_stop()) r += cfg.threshold[static_cast<int>(a.condition.threshold)];
  if (a.is_send()) {
    bool seen = false;
    for (auto h : {HandlerId::Broadcast, HandlerId::Receive}) {
      for (const auto& prev : draft_so_far.handler_actions(h))
        seen |= prev.is_send() && prev.send_type == a.send_type;
    }
    if (!seen) r += cfg.type_intro(a.send_type);
  }
  r += cfg.handler_modifier(handler);
  return r;
}

int bonus_reward(bool correct, const EpisodeLedger& ledger, const RewardConfig& cfg) {
  if (!correct) return cfg.incorrect_reward;
  return cfg.correct_bonus_base + ledger.runtime_sum();
}

}  // namespace rbgen
