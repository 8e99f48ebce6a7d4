#include "rbgen/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "rbgen/errors.hpp"

namespace rbgen {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError(path + ": " + msg);
}

/// Strict accessor over one JSON object: every key must be consumed, every
/// error names the full key path.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "must be an object");
  }

  ~Section() = default;

  bool has(const std::string& key) const { return j_.contains(key); }

  std::string path(const std::string& key) const { return path_ + "." + key; }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  template <typename T>
  void read_int(const std::string& key, T& out, long long min_value, long long max_value) {
    if (!has(key)) return;
    const json& v = raw(key);
    if (!v.is_number_integer()) fail(path(key), "must be an integer");
    const long long n = v.get<long long>();
    if (n < min_value || n > max_value)
      fail(path(key), "must be in [" + std::to_string(min_value) + ", " +
                          std::to_string(max_value) + "]");
    out = static_cast<T>(n);
  }

  void read_u64(const std::string& key, std::uint64_t& out, std::uint64_t min_value) {
    if (!has(key)) return;
    const json& v = raw(key);
    if (!v.is_number_unsigned() && !v.is_number_integer())
      fail(path(key), "must be a non-negative integer");
    if (v.is_number_integer() && v.get<long long>() < 0)
      fail(path(key), "must be a non-negative integer");
    const std::uint64_t n = v.get<std::uint64_t>();
    if (n < min_value) fail(path(key), "must be >= " + std::to_string(min_value));
    out = n;
  }

  void read_double(const std::string& key, double& out, double min_value, double max_value) {
    if (!has(key)) return;
    const json& v = raw(key);
    if (!v.is_number()) fail(path(key), "must be a number");
    const double d = v.get<double>();
    if (d < min_value || d > max_value) fail(path(key), "out of range");
    out = d;
  }

  void read_bool(const std::string& key, bool& out) {
    if (!has(key)) return;
    const json& v = raw(key);
    if (!v.is_boolean()) fail(path(key), "must be a boolean");
    out = v.get<bool>();
  }

  void read_string(const std::string& key, std::string& out) {
    if (!has(key)) return;
    const json& v = raw(key);
    if (!v.is_string()) fail(path(key), "must be a string");
    out = v.get<std::string>();
  }

  /// Call after consuming every supported key.
  void reject_unknown() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.contains(it.key())) fail(path_ + "." + it.key(), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

FailureMode mode_from_name(const std::string& name, const std::string& path) {
  if (name == "no_failure") return FailureMode::NoFailure;
  if (name == "crash") return FailureMode::Crash;
  if (name == "byzantine") return FailureMode::Byzantine;
  fail(path, "unknown failure mode '" + name + "'");
}

int fault_ratio_divisor(const std::string& ratio, const std::string& path) {
  std::string s;
  for (char c : ratio)
    if (c != ' ') s += c;
  if (s == "(n-1)/2") return 2;
  if (s == "(n-1)/3") return 3;
  fail(path, "ratio must be \"(n-1)/2\" or \"(n-1)/3\"");
}

SystemParams parse_mode_params(Section& parent, const std::string& key, SystemParams defaults,
                               int default_divisor, bool allow_faults) {
  if (!parent.has(key)) return defaults;
  Section s(parent.raw(key), parent.path(key));
  int n = defaults.n;
  s.read_int("n", n, 1, 31);
  SystemParams p{n, 0};
  if (allow_faults) {
    int divisor = default_divisor;
    if (s.has("ratio")) {
      std::string ratio;
      s.read_string("ratio", ratio);
      divisor = fault_ratio_divisor(ratio, s.path("ratio"));
    }
    p.f = (n - 1) / divisor;
    if (s.has("f")) {
      s.read_int("f", p.f, 0, n - 1);
    }
  } else if (s.has("ratio") || s.has("f")) {
    fail(parent.path(key), "no-failure mode admits no faults");
  }
  s.reject_unknown();
  return p;
}

std::uint8_t parse_logic_mask(Section& s, const std::string& key, std::uint8_t fallback) {
  if (!s.has(key)) return fallback;
  const json& arr = s.raw(key);
  if (!arr.is_array()) fail(s.path(key), "must be an array of logic names");
  std::uint8_t mask = 0;
  for (const auto& item : arr) {
    if (!item.is_string()) fail(s.path(key), "must be an array of logic names");
    const std::string name = item.get<std::string>();
    if (name == "send_to_all")
      mask |= logic_bit(LogicKind::SendToAll);
    else if (name == "send_to_neighbours")
      mask |= logic_bit(LogicKind::SendToNeighbours);
    else if (name == "send_to_self")
      mask |= logic_bit(LogicKind::SendToSelf);
    else if (name == "deliver")
      mask |= logic_bit(LogicKind::Deliver);
    else if (name == "stop")
      mask |= logic_bit(LogicKind::Stop);
    else
      fail(s.path(key), "unknown logic '" + name + "'");
  }
  return mask;
}

std::uint8_t parse_threshold_mask(Section& s, const std::string& key, std::uint8_t fallback) {
  if (!s.has(key)) return fallback;
  const json& arr = s.raw(key);
  if (!arr.is_array()) fail(s.path(key), "must be an array of threshold names");
  std::uint8_t mask = 0;
  for (const auto& item : arr) {
    if (!item.is_string()) fail(s.path(key), "must be an array of threshold names");
    const std::string name = item.get<std::string>();
    if (name == "zero")
      mask |= threshold_bit(ThresholdKind::Zero);
    else if (name == "one")
      mask |= threshold_bit(ThresholdKind::One);
    else if (name == "f_plus_one")
      mask |= threshold_bit(ThresholdKind::FPlusOne);
    else if (name == "half_n_plus_f")
      mask |= threshold_bit(ThresholdKind::HalfNPlusF);
    else if (name == "n_minus_f")
      mask |= threshold_bit(ThresholdKind::NMinusF);
    else
      fail(s.path(key), "unknown threshold '" + name + "'");
  }
  return mask;
}

void parse_generation(Section& root, RunConfig& cfg) {
  if (!root.has("generation")) return;
  Section s(root.raw("generation"), "generation");
  s.read_int("simulations", cfg.generation.simulations, 1, 1000);
  s.read_u64("episodes", cfg.generation.episodes, 1);
  s.read_u64("seed", cfg.generation.seed, 0);
  s.read_double("ucb_c", cfg.generation.policy.ucb_c, 0.0, 1e6);
  s.read_double("alpha", cfg.generation.policy.alpha, 1e-9, 1.0);
  s.read_double("gamma", cfg.generation.policy.gamma, 0.0, 1.0);
  s.reject_unknown();
}

void parse_validation(Section& root, RunConfig& cfg) {
  if (!root.has("validation")) return;
  Section s(root.raw("validation"), "validation");
  if (s.has("modes")) {
    const json& arr = s.raw("modes");
    if (!arr.is_array() || arr.empty()) fail("validation.modes", "must be a non-empty array");
    std::vector<FailureMode> modes;
    for (const auto& item : arr) {
      if (!item.is_string()) fail("validation.modes", "must be an array of mode names");
      FailureMode m = mode_from_name(item.get<std::string>(), "validation.modes");
      if (std::find(modes.begin(), modes.end(), m) != modes.end())
        fail("validation.modes", "duplicate mode");
      modes.push_back(m);
    }
    cfg.validation.modes = std::move(modes);
  }
  cfg.validation.no_failure =
      parse_mode_params(s, "no_failure", cfg.validation.no_failure, 2, false);
  cfg.validation.crash = parse_mode_params(s, "crash", cfg.validation.crash, 2, true);
  cfg.validation.byzantine =
      parse_mode_params(s, "byzantine", cfg.validation.byzantine, 3, true);
  s.read_bool("fault_in_broadcast", cfg.validation.fault_in_broadcast);
  s.read_bool("fault_in_receive", cfg.validation.fault_in_receive);
  s.read_bool("check_validity", cfg.validation.check_validity);
  s.read_bool("check_agreement", cfg.validation.check_agreement);
  s.read_bool("check_integrity", cfg.validation.check_integrity);
  s.read_u64("state_budget", cfg.validation.state_budget, 1);
  s.read_bool("memoize", cfg.validation.memoize);
  s.read_bool("capture_traces", cfg.validation.capture_traces);
  if (!cfg.validation.fault_in_broadcast && !cfg.validation.fault_in_receive)
    fail("validation.fault_in_receive", "at least one fault placement must stay enabled");
  s.reject_unknown();
}

void parse_heuristics(Section& root, RunConfig& cfg) {
  if (!root.has("heuristics")) return;
  Section s(root.raw("heuristics"), "heuristics");
  for (int i = 1; i <= 10; ++i)
    s.read_bool("gh" + std::to_string(i), cfg.heuristics.enabled[i - 1]);
  s.read_int("min_actions", cfg.heuristics.min_actions, 1, 64);
  s.read_int("max_actions", cfg.heuristics.max_actions, 1, 64);
  s.read_int("max_types", cfg.heuristics.max_types, 1, 9);
  s.read_int("broadcast_send_type", cfg.heuristics.broadcast_send_type, 0, 8);
  cfg.heuristics.broadcast_logics =
      parse_logic_mask(s, "broadcast_logics", cfg.heuristics.broadcast_logics);
  cfg.heuristics.receive_logics =
      parse_logic_mask(s, "receive_logics", cfg.heuristics.receive_logics);
  cfg.heuristics.broadcast_thresholds =
      parse_threshold_mask(s, "broadcast_thresholds", cfg.heuristics.broadcast_thresholds);
  cfg.heuristics.receive_thresholds =
      parse_threshold_mask(s, "receive_thresholds", cfg.heuristics.receive_thresholds);
  if (cfg.heuristics.min_actions > cfg.heuristics.max_actions)
    fail("heuristics.min_actions", "must be <= heuristics.max_actions");
  if (cfg.heuristics.broadcast_send_type >= cfg.heuristics.max_types)
    fail("heuristics.broadcast_send_type", "must be < heuristics.max_types");
  s.reject_unknown();
}

void parse_rewards(Section& root, RunConfig& cfg) {
  if (!root.has("rewards")) return;
  Section s(root.raw("rewards"), "rewards");
  if (s.has("logic")) {
    Section l(s.raw("logic"), "rewards.logic");
    l.read_int("send_to_all", cfg.rewards.logic[0], -1000, 1000);
    l.read_int("send_to_neighbours", cfg.rewards.logic[1], -1000, 1000);
    l.read_int("send_to_self", cfg.rewards.logic[2], -1000, 1000);
    l.read_int("deliver", cfg.rewards.logic[3], -1000, 1000);
    l.read_int("stop", cfg.rewards.logic[4], -1000, 1000);
    l.reject_unknown();
  }
  if (s.has("threshold")) {
    Section t(s.raw("threshold"), "rewards.threshold");
    t.read_int("zero", cfg.rewards.threshold[0], -1000, 1000);
    t.read_int("one", cfg.rewards.threshold[1], -1000, 1000);
    t.read_int("f_plus_one", cfg.rewards.threshold[2], -1000, 1000);
    t.read_int("half_n_plus_f", cfg.rewards.threshold[3], -1000, 1000);
    t.read_int("n_minus_f", cfg.rewards.threshold[4], -1000, 1000);
    t.reject_unknown();
  }
  s.read_int("handler_broadcast", cfg.rewards.handler_broadcast, -1000, 1000);
  s.read_int("handler_receive", cfg.rewards.handler_receive, -1000, 1000);
  s.read_int("correct_bonus_base", cfg.rewards.correct_bonus_base, -100000, 100000);
  s.read_int("incorrect_reward", cfg.rewards.incorrect_reward, -100000, 100000);
  s.reject_unknown();
}

void parse_output(Section& root, RunConfig& cfg) {
  if (!root.has("output")) return;
  Section s(root.raw("output"), "output");
  s.read_string("directory", cfg.output.directory);
  if (cfg.output.directory.empty()) fail("output.directory", "must not be empty");
  s.read_u64("checkpoint_every", cfg.output.checkpoint_every, 1);
  if (s.has("report_formats")) {
    const json& arr = s.raw("report_formats");
    if (!arr.is_array()) fail("output.report_formats", "must be an array");
    cfg.output.report_json = false;
    cfg.output.report_text = false;
    for (const auto& item : arr) {
      if (!item.is_string()) fail("output.report_formats", "must be an array of strings");
      const std::string name = item.get<std::string>();
      if (name == "json")
        cfg.output.report_json = true;
      else if (name == "text")
        cfg.output.report_text = true;
      else
        fail("output.report_formats", "unknown format '" + name + "'");
    }
  }
  s.reject_unknown();
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text, nullptr, true, true);  // allow comments
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config root must be an object");
  RunConfig cfg;
  Section root(doc, "config");
  parse_generation(root, cfg);
  parse_validation(root, cfg);
  parse_heuristics(root, cfg);
  parse_rewards(root, cfg);
  parse_output(root, cfg);
  // Consume the section keys themselves for unknown-key detection.
  root.reject_unknown();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string config_fingerprint(const RunConfig& cfg) {
  std::string dump;
  auto add = [&dump](const std::string& s) {
    dump += s;
    dump += ';';
  };
  auto add_d = [&](double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%a", v);
    add(buf);
  };
  add(std::to_string(cfg.generation.simulations));
  add(std::to_string(cfg.generation.episodes));
  add(std::to_string(cfg.generation.seed));
  add_d(cfg.generation.policy.ucb_c);
  add_d(cfg.generation.policy.alpha);
  add_d(cfg.generation.policy.gamma);
  for (auto m : cfg.validation.modes) add(to_string(m));
  for (const auto* p :
       {&cfg.validation.no_failure, &cfg.validation.crash, &cfg.validation.byzantine}) {
    add(std::to_string(p->n));
    add(std::to_string(p->f));
  }
  add(std::to_string(cfg.validation.fault_in_broadcast));
  add(std::to_string(cfg.validation.fault_in_receive));
  add(std::to_string(cfg.validation.check_validity));
  add(std::to_string(cfg.validation.check_agreement));
  add(std::to_string(cfg.validation.check_integrity));
  for (bool g : cfg.heuristics.enabled) add(std::to_string(g));
  add(std::to_string(cfg.heuristics.broadcast_logics));
  add(std::to_string(cfg.heuristics.receive_logics));
  add(std::to_string(cfg.heuristics.broadcast_thresholds));
  add(std::to_string(cfg.heuristics.receive_thresholds));
  add(std::to_string(cfg.heuristics.min_actions));
  add(std::to_string(cfg.heuristics.max_actions));
  add(std::to_string(cfg.heuristics.broadcast_send_type));
  add(std::to_string(cfg.heuristics.max_types));
  for (int v : cfg.rewards.logic) add(std::to_string(v));
  for (int v : cfg.rewards.threshold) add(std::to_string(v));
  add(std::to_string(cfg.rewards.handler_broadcast));
  add(std::to_string(cfg.rewards.handler_receive));
  add(std::to_string(cfg.rewards.correct_bonus_base));
  add(std::to_string(cfg.rewards.incorrect_reward));

  std::uint64_t h = 1469598103934665603ull;  // FNV-1a 64
  for (unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace rbgen
