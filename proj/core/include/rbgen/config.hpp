#pragma once

#include <cstdint>
#include <string>

#include "rbgen/heuristics.hpp"
#include "rbgen/learner.hpp"
#include "rbgen/oracle.hpp"
#include "rbgen/rewards.hpp"

namespace rbgen {

struct GenerationConfig {
  int simulations = 5;
  std::uint64_t episodes = 12000;
  std::uint64_t seed = 1;
  PolicyParams policy{};
};

struct OutputConfig {
  std::string directory = "out";
  std::uint64_t checkpoint_every = 1000;  // episodes between checkpoint writes
  bool report_json = true;
  bool report_text = true;
};

/// Full run configuration. Defaults reproduce the stock broadcast-synthesis
/// setup; every field can be overridden from the config file.
struct RunConfig {
  GenerationConfig generation{};
  OracleConfig validation{};
  HeuristicConfig heuristics = HeuristicConfig::defaults();
  RewardConfig rewards{};
  OutputConfig output{};
};

/// Parse a JSON config document with sections `generation`, `validation`,
/// `heuristics`, `rewards`, `output`. Unknown keys and invariant breaches
/// throw ConfigError naming the offending key path.
RunConfig parse_config_text(const std::string& text);

/// parse_config_text over a file. Missing file throws ConfigError.
RunConfig load_config(const std::string& path);

/// Stable fingerprint of the effective configuration (FNV-1a over a
/// canonical dump). Changing any field that affects learning changes it.
std::string config_fingerprint(const RunConfig& cfg);

}  // namespace rbgen
