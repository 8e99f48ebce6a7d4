#pragma once

#include <string>
#include <string_view>

#include "rbgen/protocol.hpp"

namespace rbgen {

/// Deterministic plain-text rendering of a complete algorithm:
///
///   when RB-Broadcast(m) do:
///     SEND to all(<type0,m>) if received (<type0,m>) from 0 distinct parties
///       and not already sent;
///     STOP if received (<type0,m>) from 0 distinct parties;
///
///   when receive(m) do:
///     ...
///
/// One line per action in stored order; repeated calls are byte-identical.
/// Throws std::invalid_argument on incomplete drafts.
std::string render_pseudocode(const AlgorithmDraft& alg);

/// Inverse of render_pseudocode. Accepts flexible whitespace and both
/// "party"/"parties". Throws ParseError naming the offending line.
AlgorithmDraft parse_algorithm(std::string_view text);

/// parse_algorithm over a file's contents. Throws ParseError / ConfigError
/// (missing file).
AlgorithmDraft load_algorithm_file(const std::string& path);

}  // namespace rbgen
