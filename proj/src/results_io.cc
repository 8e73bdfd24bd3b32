#include "nbsl/results_io.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace nbsl {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

double parse_double(const std::string& text) {
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw std::invalid_argument("not a number: '" + text + "'");
  }
  return v;
}

void write_results(std::ostream& os, const std::vector<RunResult>& runs, bool linear) {
  os << (linear ? kLinearResultsHeader : kResultsHeader) << '\n';
  for (const auto& r : runs) {
    for (std::size_t c = 0; c < r.checkpoints.size(); ++c) {
      const auto& b = r.log_beliefs[c];
      for (std::size_t i = 0; i < b.rows(); ++i) {
        for (std::size_t k = 0; k < b.cols(); ++k) {
          const double v = linear ? std::exp(b(i, k)) : b(i, k);
          os << r.run << ',' << r.checkpoints[c] << ',' << i << ',' << k << ','
             << format_double(v) << '\n';
        }
      }
    }
  }
}

namespace {

template <typename T>
T parse_field(const std::string& text, std::size_t line) {
  T v{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw std::runtime_error("results line " + std::to_string(line) + ": bad field '" + text + "'");
  }
  return v;
}

}  // namespace

ResultsTable read_results(std::istream& is) {
  ResultsTable table;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("results: missing header");
  if (line == kLinearResultsHeader) {
    table.linear = true;
  } else if (line != kResultsHeader) {
    throw std::runtime_error("results: unexpected header '" + line + "'");
  }
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() != 5) {
      throw std::runtime_error("results line " + std::to_string(lineno) + ": expected 5 fields");
    }
    ResultRecord rec;
    rec.run = parse_field<std::uint64_t>(fields[0], lineno);
    rec.t = parse_field<std::uint64_t>(fields[1], lineno);
    rec.agent = parse_field<std::size_t>(fields[2], lineno);
    rec.hypothesis = parse_field<std::size_t>(fields[3], lineno);
    rec.value = parse_double(fields[4]);
    table.records.push_back(rec);
  }
  return table;
}

ResultsTable read_results(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_results(in);
}

namespace {

using nlohmann::ordered_json;

// JSON has no infinities; non-finite values become strings.
ordered_json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

}  // namespace

std::string summary_json(const Scenario& scenario, const EnsembleResult& result,
                         const IdentifiabilityReport& ident, const NetworkReport& net) {
  ordered_json doc;
  doc["agents"] = scenario.agents();
  ordered_json names = ordered_json::array();
  for (const auto& h : scenario.hypotheses) names.push_back(h.name);
  doc["hypotheses"] = names;
  doc["evidence_plan"] = scenario.active_plan().name;
  doc["horizon"] = scenario.horizon;
  doc["runs"] = scenario.runs;
  doc["seed"] = scenario.seed;
  doc["upsilon"] = scenario.upsilon;

  doc["assumptions"] = {
      {"doubly_stochastic", net.doubly_stochastic},
      {"positive_diagonal", net.positive_diagonal},
      {"strongly_connected", net.strongly_connected},
      {"identifiable", ident.identifiable},
  };
  ordered_json per_agent = ordered_json::array();
  for (const auto& set : ident.per_agent) per_agent.push_back(set);
  doc["identifiability"] = {
      {"intersection", ident.intersection},
      {"indistinguishable_sets", per_agent},
      {"holders", ident.holders},
  };

  ordered_json runs = ordered_json::array();
  for (const auto& r : result.runs) {
    ordered_json run;
    run["run"] = r.run;
    ordered_json targets = ordered_json::array();
    for (double v : r.centralized_target) targets.push_back(number(v));
    run["centralized_target"] = targets;
    ordered_json verdicts = ordered_json::array();
    for (const auto& row : r.verdicts) {
      ordered_json vr = ordered_json::array();
      for (auto v : row) vr.push_back(to_string(v));
      verdicts.push_back(vr);
    }
    run["verdicts"] = verdicts;
    ordered_json counts = ordered_json::array();
    for (const auto& row : r.evidence) {
      ordered_json cr = ordered_json::array();
      for (const auto& ev : row) cr.push_back(ev.dogmatic ? ordered_json("dogmatic") : ordered_json(ev.count));
      counts.push_back(cr);
    }
    run["evidence_counts"] = counts;
    runs.push_back(run);
  }
  doc["runs_detail"] = runs;

  ordered_json gap = ordered_json::array();
  for (const auto& series : result.diagnostics.mean_abs_log_gap) {
    ordered_json s = ordered_json::array();
    for (double v : series) s.push_back(number(v));
    gap.push_back(s);
  }
  doc["diagnostics"] = {
      {"checkpoints", result.diagnostics.checkpoints},
      {"mean_abs_log_gap", gap},
  };
  return doc.dump(2) + "\n";
}

}  // namespace nbsl
