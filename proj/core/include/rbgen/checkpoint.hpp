#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rbgen/learner.hpp"

namespace rbgen {

/// Comma-joined action codes for a handler body, e.g. "A0z,X".
std::string encode_actions(const std::vector<Action>& actions);
std::vector<Action> decode_actions(const std::string& encoded);

/// Serialized simulation snapshot. The format is line-based text with
/// doubles stored as hexfloats, so a round trip is bit-exact and diffable.
struct CheckpointData {
  std::string config_fingerprint;
  SimulationState sim;
};

/// Atomically write `sim` to `path` (tmp file + rename). The fingerprint
/// guards against resuming under a different configuration.
void save_checkpoint(const std::filesystem::path& path, const std::string& config_fingerprint,
                     const SimulationState& sim);

/// Parse a checkpoint file. Throws ParseError (malformed content) or
/// ResourceLimitError does not apply here; I/O failures throw ConfigError.
CheckpointData load_checkpoint(const std::filesystem::path& path);

}  // namespace rbgen
