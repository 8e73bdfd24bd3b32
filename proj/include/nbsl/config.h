#pragma once

// Scenario files: a nested key-value (YAML) text format mapping one-to-one onto
// Scenario. Unknown keys are rejected; every error carries its key path.

#include <filesystem>
#include <stdexcept>
#include <string>

#include "nbsl/simulation.h"

namespace nbsl {

class ConfigError : public std::runtime_error {
 public:
  enum class Kind { Parse, UnknownKey, InvalidValue };

  ConfigError(Kind kind, std::string path, int line, const std::string& message);

  Kind kind() const { return kind_; }
  const std::string& path() const { return path_; }
  int line() const { return line_; }  // 1-based, 0 when unknown

 private:
  Kind kind_;
  std::string path_;
  int line_;
};

const char* to_string(ConfigError::Kind kind);

Scenario parse_config_string(const std::string& text);
Scenario parse_config(const std::filesystem::path& path);

/// Emits a config that parses back to an equal Scenario.
std::string write_config(const Scenario& scenario);

}  // namespace nbsl
