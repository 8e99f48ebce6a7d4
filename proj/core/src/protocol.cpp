#include "rbgen/protocol.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <stdexcept>

namespace rbgen {

int threshold_count(ThresholdKind k, const SystemParams& p) {
  switch (k) {
    case ThresholdKind::Zero:
      return 0;
    case ThresholdKind::One:
      return 1;
    case ThresholdKind::FPlusOne:
      return p.f + 1;
    case ThresholdKind::HalfNPlusF:
      return (p.n + p.f + 1) / 2;
    case ThresholdKind::NMinusF:
      return p.n - p.f;
  }
  throw std::logic_error("unreachable threshold kind");
}

Action Action::send(LogicKind fanout, std::uint8_t type, Condition c) {
  if (fanout != LogicKind::SendToAll && fanout != LogicKind::SendToNeighbours &&
      fanout != LogicKind::SendToSelf) {
    throw std::invalid_argument("send() requires a send fanout");
  }
  return {fanout, type, c};
}

namespace {

constexpr char kLogicChars[kLogicKindCount] = {'A', 'N', 'S', 'D', 'X'};
constexpr char kThresholdChars[kThresholdKindCount] = {'z', 'o', 'f', 'h', 'n'};

std::optional<int> logic_from_char(char c) {
  for (int i = 0; i < kLogicKindCount; ++i)
    if (kLogicChars[i] == c) return i;
  return std::nullopt;
}

std::optional<int> threshold_from_char(char c) {
  for (int i = 0; i < kThresholdKindCount; ++i)
    if (kThresholdChars[i] == c) return i;
  return std::nullopt;
}

std::vector<Condition> enumerate_conditions(int max_types) {
  std::vector<Condition> out;
  out.push_back(Condition::zero());
  for (auto k : {ThresholdKind::One, ThresholdKind::FPlusOne, ThresholdKind::HalfNPlusF,
                 ThresholdKind::NMinusF}) {
    for (int t = 0; t < max_types; ++t)
      out.push_back(Condition::of(k, static_cast<std::uint8_t>(t)));
  }
  return out;
}

}  // namespace

std::string action_code(const Action& a) {
  std::string s;
  s += kLogicChars[static_cast<int>(a.logic)];
  if (a.is_send()) s += static_cast<char>('0' + a.send_type);
  if (!a.is_stop()) {
    s += kThresholdChars[static_cast<int>(a.condition.threshold)];
    if (a.condition.threshold != ThresholdKind::Zero)
      s += static_cast<char>('0' + a.condition.msg_type);
  }
  return s;
}

std::optional<Action> action_from_code(std::string_view code) {
  if (code.empty()) return std::nullopt;
  std::size_t i = 0;
  auto logic = logic_from_char(code[i++]);
  if (!logic) return std::nullopt;
  Action a;
  a.logic = static_cast<LogicKind>(*logic);
  if (a.is_send()) {
    if (i >= code.size() || code[i] < '0' || code[i] > '9') return std::nullopt;
    a.send_type = static_cast<std::uint8_t>(code[i++] - '0');
  }
  if (a.is_stop()) return i == code.size() ? std::optional<Action>(a) : std::nullopt;
  if (i >= code.size()) return std::nullopt;
  auto th = threshold_from_char(code[i++]);
  if (!th) return std::nullopt;
  auto kind = static_cast<ThresholdKind>(*th);
  std::uint8_t cond_type = 0;
  if (kind != ThresholdKind::Zero) {
    if (i >= code.size() || code[i] < '0' || code[i] > '9') return std::nullopt;
    cond_type = static_cast<std::uint8_t>(code[i++] - '0');
  }
  if (i != code.size()) return std::nullopt;
  a.condition = Condition::of(kind, cond_type);
  return a;
}

std::vector<Action> enumerate_actions(int max_types) {
  if (max_types < 1) throw std::invalid_argument("max_types must be >= 1");
  const auto conditions = enumerate_conditions(max_types);
  std::vector<Action> out;
  for (auto fanout :
       {LogicKind::SendToAll, LogicKind::SendToNeighbours, LogicKind::SendToSelf}) {
    for (int t = 0; t < max_types; ++t)
      for (const auto& c : conditions)
        out.push_back(Action::send(fanout, static_cast<std::uint8_t>(t), c));
  }
  for (const auto& c : conditions) out.push_back(Action::deliver(c));
  out.push_back(Action::stop());
  return out;
}

AlgorithmDraft AlgorithmDraft::from_handlers(std::vector<Action> broadcast,
                                             std::vector<Action> receive) {
  AlgorithmDraft d;
  for (const auto* body : {&broadcast, &receive}) {
    if (body->empty() || !body->back().is_stop())
      throw std::invalid_argument("handler body must end with Stop");
    for (std::size_t i = 0; i + 1 < body->size(); ++i)
      if ((*body)[i].is_stop())
        throw std::invalid_argument("Stop must be the handler's last action");
  }
  for (const auto& a : broadcast) d.append(a);
  for (const auto& a : receive) d.append(a);
  return d;
}

void AlgorithmDraft::append(const Action& a) {
  switch (phase_) {
    case Phase::Broadcast:
      broadcast_.push_back(a);
      if (a.is_stop()) phase_ = Phase::Receive;
      return;
    case Phase::Receive:
      receive_.push_back(a);
      if (a.is_stop()) phase_ = Phase::Done;
      return;
    case Phase::Done:
      throw std::logic_error("append to a complete algorithm");
  }
}

HandlerId AlgorithmDraft::current_handler() const {
  if (phase_ == Phase::Done) throw std::logic_error("complete algorithm has no open handler");
  return phase_ == Phase::Broadcast ? HandlerId::Broadcast : HandlerId::Receive;
}

std::vector<std::uint8_t> AlgorithmDraft::alphabet() const {
  std::set<std::uint8_t> types;
  for (const auto* body : {&broadcast_, &receive_}) {
    for (const auto& a : *body) {
      if (a.is_send()) types.insert(a.send_type);
      if (!a.is_stop() && a.condition.threshold != ThresholdKind::Zero)
        types.insert(a.condition.msg_type);
    }
  }
  return {types.begin(), types.end()};
}

std::vector<std::uint8_t> AlgorithmDraft::broadcast_sent_types() const {
  std::set<std::uint8_t> types;
  for (const auto& a : broadcast_)
    if (a.is_send()) types.insert(a.send_type);
  return {types.begin(), types.end()};
}

StateKey canonical_key(const AlgorithmDraft& d) {
  auto sorted_codes = [](const std::vector<Action>& actions) {
    std::vector<std::string> codes;
    codes.reserve(actions.size());
    for (const auto& a : actions) codes.push_back(action_code(a));
    std::sort(codes.begin(), codes.end());
    std::string joined;
    for (std::size_t i = 0; i < codes.size(); ++i) {
      if (i) joined += ',';
      joined += codes[i];
    }
    return joined;
  };
  static constexpr char kPhaseChars[] = {'B', 'R', 'D'};
  std::string v = "B:" + sorted_codes(d.broadcast_actions());
  v += "|R:" + sorted_codes(d.receive_actions());
  v += "|P:";
  v += kPhaseChars[static_cast<int>(d.phase())];
  return StateKey{std::move(v)};
}

EfficiencyMetrics efficiency_metrics(const AlgorithmDraft& alg, const SystemParams& p) {
  if (!alg.complete())
    throw std::invalid_argument("efficiency metrics require a complete algorithm");

  EfficiencyMetrics m;
  std::set<std::uint8_t> wire_types;
  for (auto h : {HandlerId::Broadcast, HandlerId::Receive}) {
    const long long multiplicity = h == HandlerId::Broadcast ? 1 : p.n;
    // Sends of one type within a handler share the not-already-sent guard, so
    // only one fires; the worst case uses the widest fanout among them.
    std::array<long long, 256> fanout_by_type{};
    for (const auto& a : alg.handler_actions(h)) {
      if (!a.is_send()) continue;
      long long fanout = a.logic == LogicKind::SendToAll         ? p.n
                         : a.logic == LogicKind::SendToNeighbours ? p.n - 1
                                                                  : 1;
      fanout_by_type[a.send_type] = std::max(fanout_by_type[a.send_type], fanout);
      if (a.logic != LogicKind::SendToSelf) wire_types.insert(a.send_type);
    }
    for (long long fanout : fanout_by_type) m.messages_worst_case += fanout * multiplicity;
  }
  m.comm_steps = static_cast<int>(wire_types.size());

  int best = 0;
  for (auto h : {HandlerId::Broadcast, HandlerId::Receive}) {
    for (const auto& a : alg.handler_actions(h)) {
      if (!a.is_deliver()) continue;
      int cost = std::max(1, threshold_count(a.condition.threshold, p));
      best = best == 0 ? cost : std::min(best, cost);
    }
  }
  m.deliver_cost = best;
  return m;
}

}  // namespace rbgen
