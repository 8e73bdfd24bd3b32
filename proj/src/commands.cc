#include "nbsl/commands.h"

#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "nbsl/config.h"
#include "nbsl/network.h"
#include "nbsl/results_io.h"

namespace nbsl {

void configure_logging_from_env() {
  const char* level = std::getenv("NBSL_LOG");
  spdlog::set_level(level ? spdlog::level::from_str(level) : spdlog::level::warn);
}

void apply_overrides(Scenario& s, const RunOverrides& o) {
  if (o.seed) s.seed = *o.seed;
  if (o.horizon) s.horizon = *o.horizon;
  if (o.runs) s.runs = *o.runs;
  if (o.linear) s.output.linear = *o.linear;
  if (o.out) {
    s.output.results = *o.out;
    s.output.summary.clear();
  }
  if (o.evidence) {
    const auto idx = s.find_plan(*o.evidence);
    if (!idx) throw ScenarioError("evidence", "no evidence plan named '" + *o.evidence + "'");
    s.active_evidence = *idx;
  }
}

namespace {

std::string set_names(const std::set<std::size_t>& set, const Scenario& s) {
  std::string out = "{";
  bool first = true;
  for (auto k : set) {
    if (!first) out += ", ";
    out += s.hypotheses[k].name;
    first = false;
  }
  return out + "}";
}

const char* pass_fail(bool ok) { return ok ? "pass" : "FAIL"; }

}  // namespace

int cmd_check(const std::filesystem::path& config, std::ostream& out, std::ostream& err) {
  Scenario s;
  try {
    s = parse_config(config);
  } catch (const ConfigError& e) {
    err << config.string() << ": " << e.what() << '\n';
    return kExitParse;
  }

  const auto net = assess_network(s.network.matrix());
  const auto agents = s.agent_models();
  const auto table = s.hypothesis_table();
  const auto ident = check_global_identifiability(agents, table);

  out << "Assumption 1(a) doubly stochastic: " << pass_fail(net.doubly_stochastic);
  if (!net.doubly_stochastic) out << " (" << net.stochastic_detail << ")";
  out << "\nAssumption 1(b) positive diagonal: " << pass_fail(net.positive_diagonal);
  if (!net.positive_diagonal) out << " (" << net.diagonal_detail << ")";
  out << "\nAssumption 1(c) strongly connected: " << pass_fail(net.strongly_connected);
  if (!net.strongly_connected) out << " (" << net.connectivity_detail << ")";
  if (!net.square || !net.nonnegative) out << "\nweight matrix: " << net.shape_detail;
  out << "\nAssumption 2 global identifiability: " << pass_fail(ident.identifiable)
      << " (intersection " << set_names(ident.intersection, s) << ")\n";

  out << "\nIndistinguishable sets:\n";
  for (std::size_t i = 0; i < agents.size(); ++i) {
    out << "  agent " << i << ": " << set_names(ident.per_agent[i], s) << '\n';
  }

  out << "\nKL divergence D(truth || hypothesis):\n  agent";
  for (const auto& h : s.hypotheses) out << ' ' << std::setw(14) << h.name;
  out << '\n';
  for (std::size_t i = 0; i < agents.size(); ++i) {
    out << "  " << std::setw(5) << i;
    for (std::size_t k = 0; k < s.hypotheses.size(); ++k) {
      std::ostringstream cell;
      cell << std::setprecision(6) << kl_gaussian(s.truth[i], table[i][k]);
      out << ' ' << std::setw(14) << cell.str();
    }
    out << '\n';
  }
  return net.ok() ? kExitOk : kExitValidation;
}

int cmd_run(const std::filesystem::path& config, const RunOverrides& overrides,
            std::ostream& out, std::ostream& err) {
  Scenario s;
  try {
    s = parse_config(config);
    apply_overrides(s, overrides);
    s.validate();
  } catch (const ConfigError& e) {
    err << config.string() << ": " << e.what() << '\n';
    return kExitParse;
  } catch (const ScenarioError& e) {
    err << config.string() << ": InvalidValue (" << e.path() << "): " << e.what() << '\n';
    return kExitParse;
  }

  const auto net_report = assess_network(s.network.matrix());
  try {
    (void)s.network.build();
  } catch (const NetworkError& e) {
    err << "validation failed: " << e.what() << '\n';
    return kExitValidation;
  }

  const auto ident = check_global_identifiability(s.agent_models(), s.hypothesis_table());
  if (!ident.identifiable) {
    spdlog::warn("Assumption 2 does not hold: hypotheses {} are indistinguishable network-wide",
                 set_names(ident.intersection, s));
    err << "warning: Assumption 2 does not hold (intersection "
        << set_names(ident.intersection, s) << ")\n";
  }

  spdlog::info("running {} run(s), {} agents, horizon {}, evidence plan '{}'", s.runs, s.agents(),
               s.horizon, s.active_plan().name);
  EnsembleResult result;
  try {
    result = ensemble(s, EnsembleOptions{overrides.threads});
  } catch (const NetworkError& e) {
    err << "validation failed: " << e.what() << '\n';
    return kExitValidation;
  }

  const std::string results_path = s.output.results;
  const std::string summary_path = s.output.summary_path();
  {
    std::ofstream f(results_path, std::ios::binary);
    if (!f) {
      err << "cannot write " << results_path << '\n';
      return kExitIo;
    }
    write_results(f, result.runs, s.output.linear);
    if (!f) {
      err << "write failed: " << results_path << '\n';
      return kExitIo;
    }
  }
  {
    std::ofstream f(summary_path, std::ios::binary);
    if (!f) {
      err << "cannot write " << summary_path << '\n';
      return kExitIo;
    }
    f << summary_json(s, result, ident, net_report);
    if (!f) {
      err << "write failed: " << summary_path << '\n';
      return kExitIo;
    }
  }

  out << "wrote " << results_path << " and " << summary_path << '\n';
  const auto& last = result.runs.back();
  for (std::size_t k = 0; k < s.hypotheses.size(); ++k) {
    out << "  " << s.hypotheses[k].name << ": centralized target (run " << last.run
        << ") = " << format_double(last.centralized_target[k])
        << ", final spread = " << format_double(last.spread(s.horizon, k)) << '\n';
  }
  return kExitOk;
}

}  // namespace nbsl
