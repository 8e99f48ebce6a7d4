#include "rbgen/text_format.hpp"

#include <fstream>
#include <sstream>

#include "rbgen/errors.hpp"

namespace rbgen {

namespace {

std::string threshold_text(ThresholdKind k) {
  switch (k) {
    case ThresholdKind::Zero:
      return "0";
    case ThresholdKind::One:
      return "1";
    case ThresholdKind::FPlusOne:
      return "F+1";
    case ThresholdKind::HalfNPlusF:
      return "(N+F)/2";
    case ThresholdKind::NMinusF:
      return "N-F";
  }
  return {};
}

std::string condition_text(const Condition& c) {
  std::string s = "if received (<type";
  s += std::to_string(c.msg_type);
  s += ",m>) from ";
  s += threshold_text(c.threshold);
  s += " distinct parties";
  return s;
}

std::string fanout_text(LogicKind k) {
  switch (k) {
    case LogicKind::SendToAll:
      return "all";
    case LogicKind::SendToNeighbours:
      return "neighbours";
    case LogicKind::SendToSelf:
      return "myself";
    default:
      return {};
  }
}

std::string action_line(const Action& a) {
  if (a.is_stop()) return "STOP " + condition_text(a.condition) + ";";
  if (a.is_deliver())
    return "DELIVER(<m>) " + condition_text(a.condition) + " and not already delivered;";
  std::string s = "SEND to ";
  s += fanout_text(a.logic);
  s += "(<type";
  s += std::to_string(a.send_type);
  s += ",m>) ";
  s += condition_text(a.condition);
  s += " and not already sent;";
  return s;
}

// --- parsing ---------------------------------------------------------------

struct Cursor {
  std::string_view text;
  int line;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
  }
  bool eat(std::string_view token) {
    skip_ws();
    if (text.substr(pos, token.size()) == token) {
      pos += token.size();
      return true;
    }
    return false;
  }
  void expect(std::string_view token) {
    if (!eat(token))
      throw ParseError(line, "expected '" + std::string(token) + "' near '" +
                                 std::string(text.substr(pos, 16)) + "'");
  }
  bool at_end() {
    skip_ws();
    return pos == text.size();
  }
};

std::uint8_t parse_type(Cursor& c) {
  c.expect("<type");
  c.skip_ws();
  if (c.pos >= c.text.size() || c.text[c.pos] < '0' || c.text[c.pos] > '9')
    throw ParseError(c.line, "expected message type digit");
  std::uint8_t t = static_cast<std::uint8_t>(c.text[c.pos] - '0');
  ++c.pos;
  c.expect(",m>");
  return t;
}

ThresholdKind parse_threshold(Cursor& c) {
  if (c.eat("(N+F)/2")) return ThresholdKind::HalfNPlusF;
  if (c.eat("N-F")) return ThresholdKind::NMinusF;
  if (c.eat("F+1")) return ThresholdKind::FPlusOne;
  if (c.eat("0")) return ThresholdKind::Zero;
  if (c.eat("1")) return ThresholdKind::One;
  throw ParseError(c.line, "expected threshold (0, 1, F+1, (N+F)/2 or N-F)");
}

Condition parse_condition(Cursor& c) {
  c.expect("if received");
  c.expect("(");
  std::uint8_t type = parse_type(c);
  c.expect(")");
  c.expect("from");
  ThresholdKind k = parse_threshold(c);
  if (!c.eat("distinct parties") && !c.eat("distinct party"))
    throw ParseError(c.line, "expected 'distinct parties'");
  return Condition::of(k, type);
}

Action parse_action_line(std::string_view text, int line) {
  Cursor c{text, line};
  Action a;
  if (c.eat("STOP")) {
    Condition cond = parse_condition(c);
    if (cond != Condition::zero())
      throw ParseError(line, "STOP takes the zero condition");
    a = Action::stop();
  } else if (c.eat("DELIVER")) {
    c.expect("(<m>)");
    Condition cond = parse_condition(c);
    c.expect("and not already delivered");
    a = Action::deliver(cond);
  } else if (c.eat("SEND to")) {
    LogicKind fanout;
    if (c.eat("all")) {
      fanout = LogicKind::SendToAll;
    } else if (c.eat("neighbours")) {
      fanout = LogicKind::SendToNeighbours;
    } else if (c.eat("myself")) {
      fanout = LogicKind::SendToSelf;
    } else {
      throw ParseError(line, "expected fanout (all, neighbours or myself)");
    }
    c.expect("(");
    std::uint8_t type = parse_type(c);
    c.expect(")");
    Condition cond = parse_condition(c);
    c.expect("and not already sent");
    a = Action::send(fanout, type, cond);
  } else {
    throw ParseError(line, "expected SEND, DELIVER or STOP");
  }
  c.eat(";");
  if (!c.at_end())
    throw ParseError(line, "trailing input: '" +
                               std::string(c.text.substr(c.pos, 16)) + "'");
  return a;
}

}  // namespace

std::string render_pseudocode(const AlgorithmDraft& alg) {
  if (!alg.complete())
    throw std::invalid_argument("pseudocode rendering requires a complete algorithm");
  std::string out = "when RB-Broadcast(m) do:\n";
  for (const auto& a : alg.broadcast_actions()) out += "  " + action_line(a) + "\n";
  out += "\nwhen receive(m) do:\n";
  for (const auto& a : alg.receive_actions()) out += "  " + action_line(a) + "\n";
  return out;
}

AlgorithmDraft parse_algorithm(std::string_view text) {
  std::vector<Action> handlers[2];
  int handler = -1;
  bool closed[2] = {false, false};

  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(start, end - start);
    ++line_no;
    start = end + 1;

    Cursor probe{raw, line_no};
    if (probe.at_end() || probe.eat("#")) continue;

    if (probe.eat("when RB-Broadcast(m) do") || probe.eat("when RB-Broadcast (m) do")) {
      probe.eat(":");
      if (!probe.at_end()) throw ParseError(line_no, "trailing input after handler header");
      if (handler >= 0) throw ParseError(line_no, "RB-Broadcast handler must come first");
      handler = 0;
      continue;
    }
    if (probe.eat("when receive(m) do") || probe.eat("when receive (m) do")) {
      probe.eat(":");
      if (!probe.at_end()) throw ParseError(line_no, "trailing input after handler header");
      if (handler != 0 || !closed[0])
        throw ParseError(line_no, "receive handler requires a closed RB-Broadcast handler");
      handler = 1;
      continue;
    }

    if (handler < 0) throw ParseError(line_no, "expected 'when RB-Broadcast(m) do:'");
    if (closed[handler]) throw ParseError(line_no, "action after STOP");
    Action a = parse_action_line(raw, line_no);
    handlers[handler].push_back(a);
    if (a.is_stop()) closed[handler] = true;
  }

  if (handler < 1 || !closed[0] || !closed[1])
    throw ParseError(line_no, "incomplete algorithm: both handlers must end with STOP");
  return AlgorithmDraft::from_handlers(std::move(handlers[0]), std::move(handlers[1]));
}

AlgorithmDraft load_algorithm_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("algorithm file not found: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_algorithm(buf.str());
}

}  // namespace rbgen
