#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "nbsl/simulation.h"

namespace nbsl {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitParse = 2,
  kExitValidation = 3,
  kExitIo = 4,
};

/// Scalar fields that may be overridden from the command line.
struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> horizon;
  std::optional<std::uint64_t> runs;
  std::optional<std::string> out;       // results path; summary path is re-derived
  std::optional<std::string> evidence;  // evidence plan name
  std::optional<bool> linear;
  unsigned threads = 0;
};

/// Applies overrides; throws ScenarioError for an unknown plan name.
void apply_overrides(Scenario& scenario, const RunOverrides& overrides);

/// Executes the ensemble and writes the results table and JSON summary.
int cmd_run(const std::filesystem::path& config, const RunOverrides& overrides,
            std::ostream& out, std::ostream& err);

/// Prints the connectivity and identifiability verdicts, the per-agent
/// indistinguishable sets and the KL table. Exit code 3 if a connectivity
/// condition fails; identifiability failure is reported but not an error.
int cmd_check(const std::filesystem::path& config, std::ostream& out, std::ostream& err);

/// Reads NBSL_LOG (trace, debug, info, warn, error, off) into the spdlog level.
void configure_logging_from_env();

}  // namespace nbsl
