#include "rbgen/heuristics.hpp"

#include <algorithm>

namespace rbgen {

HeuristicConfig HeuristicConfig::defaults() {
  HeuristicConfig cfg;
  cfg.broadcast_logics = logic_bit(LogicKind::SendToAll) | logic_bit(LogicKind::SendToNeighbours) |
                         logic_bit(LogicKind::SendToSelf) | logic_bit(LogicKind::Stop);
  cfg.receive_logics = cfg.broadcast_logics | logic_bit(LogicKind::Deliver);
  cfg.broadcast_thresholds = threshold_bit(ThresholdKind::Zero);
  cfg.receive_thresholds =
      threshold_bit(ThresholdKind::Zero) | threshold_bit(ThresholdKind::One) |
      threshold_bit(ThresholdKind::FPlusOne) | threshold_bit(ThresholdKind::HalfNPlusF) |
      threshold_bit(ThresholdKind::NMinusF);
  return cfg;
}

std::vector<std::string> BlockedStateRegistry::sorted_keys() const {
  std::vector<std::string> out(keys_.begin(), keys_.end());
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

bool contains_action(const AlgorithmDraft& d, const Action& a) {
  for (auto h : {HandlerId::Broadcast, HandlerId::Receive}) {
    const auto& body = d.handler_actions(h);
    if (std::find(body.begin(), body.end(), a) != body.end()) return true;
  }
  return false;
}

bool send_with_same_type_and_condition(const AlgorithmDraft& d, const Action& a) {
  for (auto h : {HandlerId::Broadcast, HandlerId::Receive}) {
    for (const auto& prev : d.handler_actions(h)) {
      if (prev.is_send() && prev.send_type == a.send_type && prev.condition == a.condition)
        return true;
    }
  }
  return false;
}

bool type_already_sent(const AlgorithmDraft& d, std::uint8_t type) {
  for (auto h : {HandlerId::Broadcast, HandlerId::Receive}) {
    for (const auto& prev : d.handler_actions(h))
      if (prev.is_send() && prev.send_type == type) return true;
  }
  return false;
}

bool has_deliver(const AlgorithmDraft& d) {
  for (auto h : {HandlerId::Broadcast, HandlerId::Receive}) {
    for (const auto& prev : d.handler_actions(h))
      if (prev.is_deliver()) return true;
  }
  return false;
}

}  // namespace

std::vector<Action> allowed_actions(const AlgorithmDraft& d, std::span<const Action> universe,
                                    const HeuristicConfig& cfg,
                                    const BlockedStateRegistry& blocked) {
  const HandlerId handler = d.current_handler();
  const auto open_size = static_cast<int>(d.handler_actions(handler).size());

  std::vector<Action> out;
  out.reserve(universe.size());
  for (const auto& a : universe) {
    // GH1: no repeated action anywhere in the draft; Stop is exempt.
    if (cfg.gh(1) && !a.is_stop() && contains_action(d, a)) continue;
    // GH2: per-handler logic allow-list.
    if (cfg.gh(2) && !(cfg.logics_for(handler) & logic_bit(a.logic))) continue;
    // GH3: per-handler threshold allow-list (Stop's zero guard is implicit).
    if (cfg.gh(3) && !a.is_stop() &&
        !(cfg.thresholds_for(handler) & threshold_bit(a.condition.threshold)))
      continue;
    // GH4: one send per (sent type, condition) across the whole draft.
    if (cfg.gh(4) && a.is_send() && send_with_same_type_and_condition(d, a)) continue;
    // GH5: the Broadcast handler only initiates with its designated type.
    if (cfg.gh(5) && a.is_send() && handler == HandlerId::Broadcast &&
        a.send_type != cfg.broadcast_send_type)
      continue;
    // GH6: handler size bounds, Stop included.
    if (cfg.gh(6)) {
      if (a.is_stop() && open_size < cfg.min_actions - 1) continue;
      if (!a.is_stop() && open_size >= cfg.max_actions - 1) continue;
    }
    // GH7: conditions may only wait on types some earlier action sends.
    if (cfg.gh(7) && !a.is_stop() && a.condition.threshold != ThresholdKind::Zero &&
        !type_already_sent(d, a.condition.msg_type))
      continue;
    // GH8: the algorithm must deliver before it can close.
    if (cfg.gh(8) && a.is_stop() && handler == HandlerId::Receive && !has_deliver(d)) continue;
    // GH9: refuse to recreate a terminal state already proven incorrect.
    if (cfg.gh(9) && a.is_stop() && handler == HandlerId::Receive) {
      AlgorithmDraft closed = d;
      closed.append(Action::stop());
      if (blocked.contains(canonical_key(closed))) continue;
    }
    // GH10: sends are limited to the configured number of message types.
    if (cfg.gh(10) && a.is_send() && a.send_type >= cfg.max_types) continue;
    out.push_back(a);
  }
  return out;
}

}  // namespace rbgen
