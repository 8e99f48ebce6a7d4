#pragma once

#include <stdexcept>
#include <string>

namespace rbgen {

/// Malformed algorithm text or statistics input.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Missing config file, unknown key, or invariant breach; the message names
/// the offending key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exploration exceeded its state budget. Distinct from any verdict.
class ResourceLimitError : public std::runtime_error {
 public:
  ResourceLimitError(const std::string& what, std::uint64_t states_seen)
      : std::runtime_error(what), states_seen_(states_seen) {}
  std::uint64_t states_seen() const { return states_seen_; }

 private:
  std::uint64_t states_seen_;
};

}  // namespace rbgen
