#pragma once

#include <stdexcept>
#include <string>

namespace hybridrank {

// Malformed input file. line is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
public:
  explicit ParseError(const std::string& message, std::size_t line = 0)
      : std::runtime_error(line ? message + " (line " + std::to_string(line) + ")" : message),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

// Invalid run configuration. field is a dotted path like "thresholds.t_p".
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

// A pipeline stage failed. Stage names are stable identifiers ("ingest", "train", ...).
class StageError : public std::runtime_error {
public:
  StageError(std::string stage, const std::string& message)
      : std::runtime_error(message), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

private:
  std::string stage_;
};

}  // namespace hybridrank
