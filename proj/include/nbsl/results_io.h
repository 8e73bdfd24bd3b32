#pragma once

// Results table (one CSV row per run, checkpoint, agent and hypothesis) and the
// JSON summary written next to it.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "nbsl/network.h"
#include "nbsl/simulation.h"

namespace nbsl {

/// Shortest decimal form that parses back to the same double; "inf", "-inf",
/// "nan" for non-finite values.
std::string format_double(double v);
/// Inverse of format_double. Throws std::invalid_argument on malformed text.
double parse_double(const std::string& text);

inline constexpr const char* kResultsHeader = "run,t,agent,hypothesis,log_belief";
inline constexpr const char* kLinearResultsHeader = "run,t,agent,hypothesis,belief";

struct ResultRecord {
  std::uint64_t run = 0;
  std::uint64_t t = 0;
  std::size_t agent = 0;
  std::size_t hypothesis = 0;
  double value = 0.0;

  bool operator==(const ResultRecord&) const = default;
};

struct ResultsTable {
  bool linear = false;
  std::vector<ResultRecord> records;
};

/// Writes the table. With `linear`, exp(log_belief) is written instead (which
/// may print as "inf" once beliefs overflow).
void write_results(std::ostream& os, const std::vector<RunResult>& runs, bool linear);
ResultsTable read_results(std::istream& is);
ResultsTable read_results(const std::filesystem::path& path);

/// Summary document: per-run centralized targets and verdicts, ensemble gap
/// series, the identifiability report and the connectivity checks.
std::string summary_json(const Scenario& scenario, const EnsembleResult& result,
                         const IdentifiabilityReport& identifiability,
                         const NetworkReport& network);

}  // namespace nbsl
