#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace rlaar {

/// Precondition violated by a caller-supplied argument.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An internal contract between components was broken (e.g. stale
/// log-probabilities, a reward dispatched against the wrong task kind).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed input text. `line` is 1-based; 0 when not line-oriented.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A metric whose denominator is zero (e.g. LiC with zero Concat accuracy).
class UndefinedMetricError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The acting policy failed during a rollout.
class RolloutError : public std::runtime_error {
 public:
  RolloutError(std::string task_id, std::size_t turn, const std::string& cause)
      : std::runtime_error("rollout of task '" + task_id + "' failed at turn " +
                           std::to_string(turn) + ": " + cause),
        task_id_(std::move(task_id)),
        turn_(turn) {}
  const std::string& task_id() const noexcept { return task_id_; }
  std::size_t turn() const noexcept { return turn_; }

 private:
  std::string task_id_;
  std::size_t turn_;
};

/// Invalid run configuration. `key` names the offending config key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Remote backend could not be reached (timeouts, exhausted retries).
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Remote backend answered with something that is not a chat completion.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rlaar
