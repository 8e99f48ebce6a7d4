#include "rbgen/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <unordered_set>

#include "rbgen/errors.hpp"

namespace rbgen {

const char* to_string(FailureMode m) {
  switch (m) {
    case FailureMode::NoFailure:
      return "no_failure";
    case FailureMode::Crash:
      return "crash";
    case FailureMode::Byzantine:
      return "byzantine";
  }
  return "?";
}

const char* to_string(Property p) {
  switch (p) {
    case Property::Validity:
      return "RB-Validity";
    case Property::Agreement:
      return "RB-Agreement";
    case Property::Integrity:
      return "RB-Integrity";
  }
  return "?";
}

bool Scenario::is_faulty(int process) const {
  return std::find(faulty.begin(), faulty.end(), process) != faulty.end();
}

std::string Scenario::describe() const {
  std::string s = to_string(mode);
  s += " n=" + std::to_string(params.n) + " f=" + std::to_string(params.f);
  s += " initiator=p" + std::to_string(initiator);
  s += " faulty={";
  for (std::size_t i = 0; i < faulty.size(); ++i) {
    if (i) s += ",";
    s += "p" + std::to_string(faulty[i]);
  }
  s += "}";
  if (adversary.kind == Adversary::Kind::ByzantineInject) {
    s += " inject=(type" + std::to_string(adversary.inject_type);
    s += adversary.inject_content == ContentId::Legit ? ",m" : ",m'";
    s += ",k=" + std::to_string(adversary.inject_targets) + ")";
  }
  return s;
}

const SystemParams& OracleConfig::params_for(FailureMode m) const {
  switch (m) {
    case FailureMode::NoFailure:
      return no_failure;
    case FailureMode::Crash:
      return crash;
    case FailureMode::Byzantine:
      return byzantine;
  }
  throw std::logic_error("unreachable failure mode");
}

namespace {

constexpr int pair_index(int type, ContentId c) { return type * kContentCount + static_cast<int>(c); }
constexpr std::uint8_t content_bit(ContentId c) {
  return static_cast<std::uint8_t>(1u << static_cast<int>(c));
}

int state_num_types(const AlgorithmDraft& alg, const Scenario& sc) {
  int n = 1;
  for (auto t : alg.alphabet()) n = std::max(n, int(t) + 1);
  if (sc.adversary.kind == Adversary::Kind::ByzantineInject)
    n = std::max(n, int(sc.adversary.inject_type) + 1);
  return n;
}

bool byzantine_faulty(const Scenario& sc, int proc) {
  return sc.mode == FailureMode::Byzantine && sc.is_faulty(proc);
}

std::vector<int> fanout_dests(LogicKind fanout, int proc, int n) {
  std::vector<int> out;
  switch (fanout) {
    case LogicKind::SendToAll:
      for (int i = 0; i < n; ++i) out.push_back(i);
      break;
    case LogicKind::SendToNeighbours:
      for (int i = 0; i < n; ++i)
        if (i != proc) out.push_back(i);
      break;
    case LogicKind::SendToSelf:
      out.push_back(proc);
      break;
    default:
      break;
  }
  return out;
}

struct ExecCtx {
  const AlgorithmDraft& alg;
  const Scenario& sc;
  int num_types;

  // Every process sends each (type, content) at most once, so the message
  // count of any execution is bounded; exceeding it means a checker bug.
  std::uint32_t sent_bound() const {
    const int n = sc.params.n;
    return std::uint32_t(n) * n * num_types * kContentCount +
           std::uint32_t(sc.faulty.size()) * n;
  }
};

void push_message(GlobalState& g, const ExecCtx& ctx, int sender, int dest, int type,
                  ContentId c) {
  g.in_flight.push_back(SimMessage{std::uint8_t(sender), std::uint8_t(dest), std::uint8_t(type), c}
                            .packed());
  if (++g.total_sent > ctx.sent_bound())
    throw std::logic_error("message bound exceeded (checker invariant)");
}

bool condition_met(const ProcessState& ps, const Condition& cond, ContentId content,
                   const ExecCtx& ctx) {
  if (cond.threshold == ThresholdKind::Zero) return true;
  if (cond.msg_type >= ctx.num_types) return false;
  const auto mask = ps.received[pair_index(cond.msg_type, content)];
  return std::popcount(mask) >= threshold_count(cond.threshold, ctx.sc.params);
}

const char* content_name(ContentId c) { return c == ContentId::Legit ? "m" : "m'"; }

std::string message_text(int type, ContentId c) {
  return "<type" + std::to_string(type) + "," + content_name(c) + ">";
}

/// Execute one event handler for `proc` with the handler's message binding
/// `content`. When `crashable`, each fired send burst either branches over
/// every crash prefix (script == nullptr) or follows the scripted prefix.
/// Completed executions are appended to `out`.
void exec_handler(GlobalState g, std::span<const Action> actions, int proc, ContentId content,
                  bool crashable, const ExecCtx& ctx, const std::vector<int>* script,
                  std::size_t* script_pos, std::vector<int> prefixes,
                  std::vector<EventOutcome>& out, std::string* log) {
  const int n = ctx.sc.params.n;
  for (const auto& a : actions) {
    if (a.is_stop()) continue;
    if (!condition_met(g.procs[proc], a.condition, content, ctx)) continue;
    if (a.is_deliver()) {
      auto& ps = g.procs[proc];
      if (!(ps.delivered_mask & content_bit(content))) {
        ps.delivered_mask |= content_bit(content);
        if (log) *log += "    p" + std::to_string(proc) + ": DELIVER(" +
                         std::string(content_name(content)) + ")\n";
      }
      continue;
    }
    // Send: shared not-already-sent guard per (type, content).
    const int pair = pair_index(a.send_type, content);
    if (g.procs[proc].sent_guard & (1u << pair)) continue;
    const auto dests = fanout_dests(a.logic, proc, n);
    int prefix = static_cast<int>(dests.size());
    if (crashable) {
      if (script) {
        prefix = script->at((*script_pos)++);
      } else {
        for (int j = 0; j < static_cast<int>(dests.size()); ++j) {
          GlobalState branch = g;
          for (int d = 0; d < j; ++d)
            push_message(branch, ctx, proc, dests[d], a.send_type, content);
          branch.procs[proc].sent_guard |= 1u << pair;
          branch.procs[proc].crashed = true;
          auto p = prefixes;
          p.push_back(j);
          out.push_back({std::move(branch), std::move(p)});
        }
      }
    }
    if (prefix < static_cast<int>(dests.size())) {
      // Scripted mid-burst crash.
      for (int d = 0; d < prefix; ++d)
        push_message(g, ctx, proc, dests[d], a.send_type, content);
      g.procs[proc].sent_guard |= 1u << pair;
      g.procs[proc].crashed = true;
      prefixes.push_back(prefix);
      if (log) *log += "    p" + std::to_string(proc) + " crashes after " +
                       std::to_string(prefix) + " of " + std::to_string(dests.size()) +
                       " sends of " + message_text(a.send_type, content) + "\n";
      out.push_back({std::move(g), std::move(prefixes)});
      return;
    }
    for (int d : dests) push_message(g, ctx, proc, d, a.send_type, content);
    g.procs[proc].sent_guard |= 1u << pair;
    if (crashable) prefixes.push_back(prefix);
    if (log) {
      static constexpr const char* kFanoutNames[] = {"all", "neighbours", "myself"};
      *log += "    p" + std::to_string(proc) + ": SEND to " +
              kFanoutNames[static_cast<int>(a.logic)] + "(" +
              message_text(a.send_type, content) + ")\n";
    }
  }
  out.push_back({std::move(g), std::move(prefixes)});
}

GlobalState initial_state(const Scenario& sc, const ExecCtx& ctx) {
  GlobalState g;
  g.procs.assign(sc.params.n,
                 ProcessState{std::vector<std::uint32_t>(ctx.num_types * kContentCount, 0)});
  if (sc.adversary.kind == Adversary::Kind::ByzantineInject) {
    std::vector<int> targets;
    for (int p = 0; p < sc.params.n && static_cast<int>(targets.size()) <
                                           sc.adversary.inject_targets;
         ++p) {
      if (!sc.is_faulty(p)) targets.push_back(p);
    }
    for (int f : sc.faulty)
      for (int t : targets)
        push_message(g, ctx, f, t, sc.adversary.inject_type, sc.adversary.inject_content);
  }
  return g;
}

std::vector<EventOutcome> broadcast_event(const GlobalState& g, const AlgorithmDraft& alg,
                                          const Scenario& sc, const ExecCtx& ctx,
                                          const std::vector<int>* script,
                                          std::size_t* script_pos, std::string* log) {
  std::vector<EventOutcome> out;
  const bool crashable = sc.mode == FailureMode::Crash && sc.is_faulty(sc.initiator);
  exec_handler(g, alg.broadcast_actions(), sc.initiator, ContentId::Legit, crashable, ctx,
               script, script_pos, {}, out, log);
  return out;
}

std::vector<EventOutcome> deliver_event(const GlobalState& g, const SimMessage& msg,
                                        const AlgorithmDraft& alg, const Scenario& sc,
                                        const ExecCtx& ctx, const std::vector<int>* script,
                                        std::size_t* script_pos, std::string* log) {
  GlobalState next = g;
  const auto packed = msg.packed();
  auto it = std::find(next.in_flight.begin(), next.in_flight.end(), packed);
  if (it == next.in_flight.end()) throw std::logic_error("delivering a message not in flight");
  next.in_flight.erase(it);

  std::vector<EventOutcome> out;
  auto& dest = next.procs[msg.dest];
  if (dest.crashed || byzantine_faulty(sc, msg.dest)) {
    out.push_back({std::move(next), {}});
    return out;
  }
  dest.received[pair_index(msg.type, msg.content)] |= 1u << msg.sender;
  const bool crashable = sc.mode == FailureMode::Crash && sc.is_faulty(msg.dest);
  exec_handler(std::move(next), alg.receive_actions(), msg.dest, msg.content, crashable, ctx,
               script, script_pos, {}, out, log);
  return out;
}

struct PropertyChecker {
  const Scenario& sc;
  const OracleConfig& cfg;
  std::uint8_t exempt_mask;  // contents whose delivery never breaks Integrity

  PropertyChecker(const AlgorithmDraft& alg, const Scenario& s, const OracleConfig& c)
      : sc(s), cfg(c) {
    exempt_mask = content_bit(ContentId::Legit);
    if (sc.adversary.kind == Adversary::Kind::ByzantineInject) {
      // Injecting an initiation-type message is the faulty process starting
      // its own broadcast instance; delivering that content consistently is
      // legitimate. Forged response-type traffic stays checked.
      auto bcast_types = alg.broadcast_sent_types();
      if (std::find(bcast_types.begin(), bcast_types.end(), sc.adversary.inject_type) !=
          bcast_types.end())
        exempt_mask |= content_bit(sc.adversary.inject_content);
    }
  }

  std::optional<Property> violated(const GlobalState& g) const {
    const bool initiator_correct = !sc.initiator_faulty();
    if (cfg.check_validity && initiator_correct &&
        !(g.procs[sc.initiator].delivered_mask & content_bit(ContentId::Legit)))
      return Property::Validity;
    if (cfg.check_agreement) {
      for (int c = 0; c < kContentCount; ++c) {
        int delivered = 0, correct = 0;
        for (int p = 0; p < sc.params.n; ++p) {
          if (sc.is_faulty(p)) continue;
          ++correct;
          if (g.procs[p].delivered_mask & (1u << c)) ++delivered;
        }
        if (delivered != 0 && delivered != correct) return Property::Agreement;
      }
    }
    if (cfg.check_integrity && initiator_correct) {
      for (int p = 0; p < sc.params.n; ++p) {
        if (sc.is_faulty(p)) continue;
        if (g.procs[p].delivered_mask & ~exempt_mask) return Property::Integrity;
      }
    }
    return std::nullopt;
  }
};

struct DepthFirstSearch {
  const AlgorithmDraft& alg;
  const Scenario& sc;
  const OracleConfig& cfg;
  const ExecCtx& ctx;
  PropertyChecker checker;
  std::unordered_set<std::string> visited;
  std::vector<TraceStep> path;
  std::uint64_t states = 0;
  std::optional<Verdict> violation;

  DepthFirstSearch(const AlgorithmDraft& a, const Scenario& s, const OracleConfig& c,
                   const ExecCtx& x)
      : alg(a), sc(s), cfg(c), ctx(x), checker(a, s, c) {}

  // Delivery to a live crash-faulty process forks the exploration (crash
  // prefixes plus ordering against its other deliveries). Everything else is
  // confluent: conditions are monotone in the received multisets and actions
  // are once-guarded, so a correct process's contribution to the terminal
  // state depends only on the set of messages it eventually receives, not on
  // their order. Such deliveries are applied in canonical order without
  // branching; the reachable terminal states are unchanged.
  bool branching_dest(const GlobalState& g, int dest) const {
    return sc.mode == FailureMode::Crash && sc.is_faulty(dest) && !g.procs[dest].crashed;
  }

  bool enter(const SimMessage& msg, EventOutcome&& oc) {
    path.push_back({TraceStep::Kind::Deliver, msg, std::move(oc.crash_prefixes)});
    if (run(oc.state)) return true;
    path.pop_back();
    return false;
  }

  bool run(const GlobalState& g) {
    if (cfg.memoize && !visited.insert(g.fingerprint()).second) return false;
    if (++states > cfg.state_budget)
      throw ResourceLimitError("state budget exceeded exploring scenario: " + sc.describe(),
                               states);
    if (g.in_flight.empty()) {
      if (auto p = checker.violated(g)) {
        Verdict v;
        v.correct = false;
        v.property = *p;
        v.scenario = sc;
        v.states_explored = states;
        if (cfg.capture_traces) v.trace.steps = path;
        violation = std::move(v);
        return true;
      }
      return false;
    }
    auto pending = g.in_flight;
    std::sort(pending.begin(), pending.end());
    pending.erase(std::unique(pending.begin(), pending.end()), pending.end());
    for (auto packed : pending) {
      const SimMessage msg = SimMessage::unpack(packed);
      if (branching_dest(g, msg.dest)) continue;
      auto outcomes = deliver_event(g, msg, alg, sc, ctx, nullptr, nullptr, nullptr);
      return enter(msg, std::move(outcomes.front()));
    }
    for (auto packed : pending) {
      const SimMessage msg = SimMessage::unpack(packed);
      auto outcomes = deliver_event(g, msg, alg, sc, ctx, nullptr, nullptr, nullptr);
      for (auto& oc : outcomes) {
        if (enter(msg, std::move(oc))) return true;
      }
    }
    return false;
  }
};

}  // namespace

std::vector<Scenario> build_scenarios(const AlgorithmDraft& alg, const OracleConfig& cfg) {
  std::vector<Scenario> out;
  for (auto mode : cfg.modes) {
    const SystemParams& p = cfg.params_for(mode);
    if (mode == FailureMode::NoFailure || p.f == 0) {
      out.push_back({mode, p, 0, {}, {}});
      continue;
    }
    auto faulty_set = [&](bool include_initiator) {
      std::vector<int> ids;
      for (int i = include_initiator ? 0 : 1; static_cast<int>(ids.size()) < p.f; ++i)
        ids.push_back(i);
      return ids;
    };
    if (mode == FailureMode::Crash) {
      Adversary adv{Adversary::Kind::CrashDuringSend, 0, ContentId::Legit, 0};
      if (cfg.fault_in_broadcast) out.push_back({mode, p, 0, faulty_set(true), adv});
      if (cfg.fault_in_receive) out.push_back({mode, p, 0, faulty_set(false), adv});
      continue;
    }
    // Byzantine: model-major product over injected type, content, target count.
    for (bool faulty_initiator : {true, false}) {
      if (faulty_initiator && !cfg.fault_in_broadcast) continue;
      if (!faulty_initiator && !cfg.fault_in_receive) continue;
      for (auto type : alg.alphabet()) {
        for (auto content : {ContentId::Legit, ContentId::Malicious}) {
          for (int k = 0; k <= p.n - p.f; ++k) {
            Adversary adv{Adversary::Kind::ByzantineInject, type, content, k};
            out.push_back({mode, p, 0, faulty_set(faulty_initiator), adv});
          }
        }
      }
    }
  }
  return out;
}

std::string GlobalState::fingerprint() const {
  std::string s;
  s.reserve(procs.size() * (2 + 4 + (procs.empty() ? 0 : procs[0].received.size()) * 4) +
            in_flight.size() * 4 + 4);
  auto put_u32 = [&s](std::uint32_t v) {
    s += char(v & 0xff);
    s += char((v >> 8) & 0xff);
    s += char((v >> 16) & 0xff);
    s += char((v >> 24) & 0xff);
  };
  for (const auto& p : procs) {
    s += char(p.crashed);
    s += char(p.delivered_mask);
    put_u32(p.sent_guard);
    for (auto mask : p.received) put_u32(mask);
  }
  auto sorted = in_flight;
  std::sort(sorted.begin(), sorted.end());
  for (auto m : sorted) put_u32(m);
  return s;
}

std::vector<ExplorationRoot> exploration_roots(const AlgorithmDraft& alg, const Scenario& sc) {
  ExecCtx ctx{alg, sc, state_num_types(alg, sc)};
  GlobalState g0 = initial_state(sc, ctx);
  std::vector<ExplorationRoot> roots;
  if (byzantine_faulty(sc, sc.initiator)) {
    // A Byzantine initiator's only behavior is the injection itself.
    roots.push_back({std::move(g0), {}});
    return roots;
  }
  auto outcomes = broadcast_event(g0, alg, sc, ctx, nullptr, nullptr, nullptr);
  for (auto& oc : outcomes) {
    Trace prefix;
    prefix.steps.push_back({TraceStep::Kind::Broadcast, {}, std::move(oc.crash_prefixes)});
    roots.push_back({std::move(oc.state), std::move(prefix)});
  }
  return roots;
}

std::vector<EventOutcome> step_deliver(const GlobalState& g, const SimMessage& msg,
                                       const AlgorithmDraft& alg, const Scenario& sc) {
  ExecCtx ctx{alg, sc, state_num_types(alg, sc)};
  return deliver_event(g, msg, alg, sc, ctx, nullptr, nullptr, nullptr);
}

Verdict explore(const AlgorithmDraft& alg, const Scenario& sc, const OracleConfig& cfg) {
  if (!alg.complete()) throw std::invalid_argument("explore requires a complete algorithm");
  ExecCtx ctx{alg, sc, state_num_types(alg, sc)};
  DepthFirstSearch dfs(alg, sc, cfg, ctx);
  for (auto& root : exploration_roots(alg, sc)) {
    dfs.path = std::move(root.prefix.steps);
    if (dfs.run(root.state)) return *std::move(dfs.violation);
  }
  Verdict v = Verdict::ok();
  v.states_explored = dfs.states;
  return v;
}

Verdict validate(const AlgorithmDraft& alg, const OracleConfig& cfg) {
  std::uint64_t total_states = 0;
  for (const auto& sc : build_scenarios(alg, cfg)) {
    Verdict v = explore(alg, sc, cfg);
    total_states += v.states_explored;
    if (!v.correct) {
      v.states_explored = total_states;
      return v;
    }
  }
  Verdict v = Verdict::ok();
  v.states_explored = total_states;
  return v;
}

namespace {

GlobalState replay_impl(const AlgorithmDraft& alg, const Scenario& sc, const Trace& trace,
                        std::string* log) {
  ExecCtx ctx{alg, sc, state_num_types(alg, sc)};
  GlobalState g = initial_state(sc, ctx);
  if (log && sc.adversary.kind == Adversary::Kind::ByzantineInject &&
      sc.adversary.inject_targets > 0) {
    *log += "  faulty injection seeds " + std::to_string(g.in_flight.size()) + " x " +
            message_text(sc.adversary.inject_type, sc.adversary.inject_content) + "\n";
  }
  for (const auto& step : trace.steps) {
    std::size_t pos = 0;
    std::vector<EventOutcome> out;
    if (step.kind == TraceStep::Kind::Broadcast) {
      if (log) *log += "  RB-Broadcast(m) at p" + std::to_string(sc.initiator) + "\n";
      out = broadcast_event(g, alg, sc, ctx, &step.crash_prefixes, &pos, log);
    } else {
      const auto& m = step.message;
      if (log)
        *log += "  deliver " + message_text(m.type, m.content) + " from p" +
                std::to_string(m.sender) + " to p" + std::to_string(m.dest) + "\n";
      out = deliver_event(g, m, alg, sc, ctx, &step.crash_prefixes, &pos, log);
    }
    if (out.size() != 1) throw std::logic_error("scripted replay must be deterministic");
    g = std::move(out.front().state);
  }
  return g;
}

}  // namespace

GlobalState replay_trace(const AlgorithmDraft& alg, const Scenario& sc, const Trace& trace) {
  return replay_impl(alg, sc, trace, nullptr);
}

std::string render_trace(const AlgorithmDraft& alg, const Verdict& v) {
  if (v.correct) return "verdict: correct\n";
  std::string out = "violated property: ";
  out += to_string(v.property);
  out += "\n";
  if (!v.scenario) return out;
  out += "scenario: " + v.scenario->describe() + "\n";
  if (v.trace.steps.empty()) {
    out += "(trace capture disabled)\n";
    return out;
  }
  std::string body;
  GlobalState terminal = replay_impl(alg, *v.scenario, v.trace, &body);
  out += body;
  out += "terminal deliveries:\n";
  for (int p = 0; p < v.scenario->params.n; ++p) {
    out += "  p" + std::to_string(p);
    if (v.scenario->is_faulty(p)) out += " (faulty)";
    out += ": {";
    bool first = true;
    for (int c = 0; c < kContentCount; ++c) {
      if (terminal.procs[p].delivered_mask & (1u << c)) {
        if (!first) out += ",";
        out += content_name(static_cast<ContentId>(c));
        first = false;
      }
    }
    out += "}\n";
  }
  return out;
}

}  // namespace rbgen
