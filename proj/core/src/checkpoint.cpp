#include "rbgen/checkpoint.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "rbgen/errors.hpp"

namespace rbgen {

namespace {

constexpr const char* kMagic = "rbgenckpt 1";

std::string hexfloat(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

double parse_double(const std::string& s, int line) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') throw ParseError(line, "bad float: " + s);
  return v;
}

std::uint64_t parse_u64(const std::string& s, int line) {
  if (s.empty()) throw ParseError(line, "missing integer");
  char* end = nullptr;
  const std::uint64_t v = std::strtoull(s.c_str(), &end, 10);
  if (*end != '\0') throw ParseError(line, "bad integer: " + s);
  return v;
}

struct LineReader {
  std::istream& in;
  int line_no = 0;
  std::string line;

  bool next() {
    if (!std::getline(in, line)) return false;
    ++line_no;
    return true;
  }
  std::string require(const std::string& what) {
    if (!next()) throw ParseError(line_no + 1, "unexpected end of checkpoint, wanted " + what);
    return line;
  }
};

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream iss(line);
  std::string field;
  while (iss >> field) out.push_back(field);
  return out;
}

// Expects "<tag> <payload...>" and returns the payload fields.
std::vector<std::string> tagged_fields(LineReader& r, const std::string& tag,
                                       std::size_t payload_count) {
  auto fields = split_fields(r.require(tag));
  if (fields.empty() || fields[0] != tag)
    throw ParseError(r.line_no, "expected '" + tag + "' record");
  if (fields.size() != payload_count + 1)
    throw ParseError(r.line_no, "'" + tag + "' record needs " + std::to_string(payload_count) +
                                    " fields");
  fields.erase(fields.begin());
  return fields;
}

}  // namespace

std::string encode_actions(const std::vector<Action>& actions) {
  std::string out;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (i) out += ',';
    out += action_code(actions[i]);
  }
  return out;
}

std::vector<Action> decode_actions(const std::string& encoded) {
  std::vector<Action> out;
  std::size_t start = 0;
  while (start <= encoded.size()) {
    const std::size_t comma = encoded.find(',', start);
    const std::string code =
        encoded.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    auto a = action_from_code(code);
    if (!a) throw std::invalid_argument("bad action code: " + code);
    out.push_back(*a);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const std::string& config_fingerprint,
                     const SimulationState& sim) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw ConfigError("cannot write checkpoint: " + tmp.string());
    out << kMagic << "\n";
    out << "config " << config_fingerprint << "\n";
    out << "episodes " << sim.episodes_done << "\n";
    out << "rng " << sim.rng << "\n";
    if (sim.best_reward_so_far)
      out << "best_reward " << hexfloat(*sim.best_reward_so_far) << "\n";
    else
      out << "best_reward none\n";
    if (sim.best) {
      out << "best " << sim.best->episode << " " << hexfloat(sim.best->reward) << " "
          << encode_actions(sim.best->draft.broadcast_actions()) << " "
          << encode_actions(sim.best->draft.receive_actions()) << "\n";
    } else {
      out << "best none\n";
    }
    out << "verdicts " << sim.algo_verdicts.size() << "\n";
    for (const auto& [key, correct] : sim.algo_verdicts)
      out << "V " << (correct ? 1 : 0) << " " << key << "\n";
    const auto state_keys = sim.qtable.sorted_state_keys();
    out << "qtable " << state_keys.size() << "\n";
    for (const StateKey* key : state_keys) {
      const QTable::StateEntry& e = *sim.qtable.find(*key);
      out << "S " << e.total_visits << " " << e.actions.size() << " " << key->value << "\n";
      for (const auto& [action, stats] : e.actions) {
        out << "A " << stats.visits << " " << hexfloat(stats.q) << " " << action_code(action)
            << "\n";
      }
    }
    out << "end\n";
    if (!out) throw ConfigError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

CheckpointData load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open checkpoint: " + path.string());
  LineReader r{in};

  if (r.require("header") != kMagic) throw ParseError(r.line_no, "not a checkpoint file");
  CheckpointData data;
  SimulationState& sim = data.sim;

  {
    const std::string line = r.require("config");
    if (line.rfind("config ", 0) != 0) throw ParseError(r.line_no, "expected 'config'");
    data.config_fingerprint = line.substr(7);
  }
  sim.episodes_done = parse_u64(tagged_fields(r, "episodes", 1)[0], r.line_no);
  {
    const std::string line = r.require("rng");
    if (line.rfind("rng ", 0) != 0) throw ParseError(r.line_no, "expected 'rng'");
    std::istringstream iss(line.substr(4));
    iss >> sim.rng;
    if (!iss) throw ParseError(r.line_no, "bad rng state");
  }
  {
    auto fields = tagged_fields(r, "best_reward", 1);
    if (fields[0] != "none") sim.best_reward_so_far = parse_double(fields[0], r.line_no);
  }
  {
    auto fields = split_fields(r.require("best"));
    if (fields.empty() || fields[0] != "best")
      throw ParseError(r.line_no, "expected 'best' record");
    if (fields.size() == 2 && fields[1] == "none") {
      // no correct algorithm yet
    } else if (fields.size() == 5) {
      BestAlgorithm best;
      best.episode = parse_u64(fields[1], r.line_no);
      best.reward = parse_double(fields[2], r.line_no);
      try {
        best.draft = AlgorithmDraft::from_handlers(decode_actions(fields[3]),
                                                   decode_actions(fields[4]));
      } catch (const std::invalid_argument& e) {
        throw ParseError(r.line_no, e.what());
      }
      sim.best = std::move(best);
    } else {
      throw ParseError(r.line_no, "'best' record needs 4 fields or 'none'");
    }
  }
  const std::uint64_t verdict_count = parse_u64(tagged_fields(r, "verdicts", 1)[0], r.line_no);
  for (std::uint64_t i = 0; i < verdict_count; ++i) {
    auto fields = tagged_fields(r, "V", 2);
    const bool correct = fields[0] == "1";
    if (!correct && fields[0] != "0") throw ParseError(r.line_no, "verdict must be 0 or 1");
    sim.algo_verdicts.emplace(fields[1], correct);
    if (!correct) sim.blocked.record_incorrect(StateKey{fields[1]});
  }
  sim.recount_verdicts();
  const std::uint64_t state_count = parse_u64(tagged_fields(r, "qtable", 1)[0], r.line_no);
  for (std::uint64_t i = 0; i < state_count; ++i) {
    auto fields = tagged_fields(r, "S", 3);
    QTable::StateEntry& e = sim.qtable.entry(StateKey{fields[2]});
    e.total_visits = parse_u64(fields[0], r.line_no);
    const std::uint64_t action_count = parse_u64(fields[1], r.line_no);
    for (std::uint64_t j = 0; j < action_count; ++j) {
      auto af = tagged_fields(r, "A", 3);
      auto action = action_from_code(af[2]);
      if (!action) throw ParseError(r.line_no, "bad action code: " + af[2]);
      ActionStats stats;
      stats.visits = parse_u64(af[0], r.line_no);
      stats.q = parse_double(af[1], r.line_no);
      e.actions.emplace(*action, stats);
    }
  }
  if (r.require("end") != "end") throw ParseError(r.line_no, "expected 'end'");
  return data;
}

}  // namespace rbgen
