#pragma once

// Scenario description, seeded evidence generation, full simulation runs and
// Monte Carlo ensembles.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nbsl/gaussian_uncertain.h"
#include "nbsl/network.h"

namespace nbsl {

/// How much training evidence one (agent, hypothesis) pair gets.
struct EvidenceRegime {
  enum class Kind { Explicit, Range, Dogmatic, LargeSample };

  Kind kind = Kind::Explicit;
  std::uint64_t count = 0;  // Explicit and LargeSample
  std::uint64_t lo = 0;     // Range, inclusive
  std::uint64_t hi = 0;

  static EvidenceRegime explicit_count(std::uint64_t r) { return {Kind::Explicit, r, 0, 0}; }
  static EvidenceRegime range(std::uint64_t lo, std::uint64_t hi) { return {Kind::Range, 0, lo, hi}; }
  static EvidenceRegime dogmatic() { return {Kind::Dogmatic, 0, 0, 0}; }
  static EvidenceRegime large_sample(std::uint64_t r = 100'000'000) {
    return {Kind::LargeSample, r, 0, 0};
  }

  bool operator==(const EvidenceRegime&) const = default;
};

/// Replaces the base regime for a matching agent and/or hypothesis. An unset
/// selector matches everything; later overrides win.
struct EvidenceOverride {
  std::optional<std::size_t> agent;
  std::optional<std::size_t> hypothesis;
  EvidenceRegime regime;

  bool operator==(const EvidenceOverride&) const = default;
};

struct EvidencePlan {
  std::string name;
  EvidenceRegime base;
  std::vector<EvidenceOverride> overrides;

  EvidenceRegime resolve(std::size_t agent, std::size_t hypothesis) const;
  bool operator==(const EvidencePlan&) const = default;
};

struct NetworkSpec {
  enum class Builder { DirectedCycle, Explicit };

  Builder builder = Builder::DirectedCycle;
  std::size_t agents = 2;
  double self_weight = 0.5;
  Matrix weights;  // Explicit only

  std::size_t size() const {
    return builder == Builder::Explicit ? weights.rows() : agents;
  }
  Matrix matrix() const;
  /// Throws NetworkError if the matrix violates a connectivity condition.
  Network build() const;
  /// Compares only the fields the builder reads.
  bool operator==(const NetworkSpec& other) const {
    if (builder != other.builder) return false;
    if (builder == Builder::Explicit) return weights == other.weights;
    return agents == other.agents && self_weight == other.self_weight;
  }
};

struct Hypothesis {
  std::string name;
  std::vector<GaussianParams> params;  // one per agent

  bool operator==(const Hypothesis&) const = default;
};

struct OutputSpec {
  std::string results = "results.csv";
  std::string summary;  // empty: derived from `results`
  bool linear = false;

  std::string summary_path() const;
  bool operator==(const OutputSpec&) const = default;
};

class ScenarioError : public std::invalid_argument {
 public:
  ScenarioError(std::string path, const std::string& what)
      : std::invalid_argument(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct Scenario {
  NetworkSpec network;
  std::vector<Hypothesis> hypotheses;
  std::vector<GaussianParams> truth;  // one per agent
  std::vector<EvidencePlan> evidence;
  std::size_t active_evidence = 0;
  GaussGammaParams prior = GaussGammaParams::noninformative();
  std::uint64_t horizon = 10'000;
  std::uint64_t seed = 0;
  std::uint64_t runs = 1;
  double upsilon = 10.0;
  bool fixed_evidence = false;
  unsigned checkpoints_per_decade = 20;
  OutputSpec output;

  std::size_t agents() const { return network.size(); }
  std::size_t hypothesis_count() const { return hypotheses.size(); }
  const EvidencePlan& active_plan() const { return evidence.at(active_evidence); }
  /// Index of the evidence plan with this name, if any.
  std::optional<std::size_t> find_plan(const std::string& name) const;
  /// Agent-major table of configured hypothesis parameters.
  std::vector<std::vector<GaussianParams>> hypothesis_table() const;
  std::vector<AgentModel> agent_models() const;

  /// Checks structural invariants (sizes, ranges, positivity). Throws
  /// ScenarioError naming the offending field. Does not check the network.
  void validate() const;

  bool operator==(const Scenario&) const = default;
};

/// Geometric checkpoint grid on [1, horizon]: round(10^(k / per_decade)),
/// deduplicated, always ending at `horizon`.
std::vector<std::uint64_t> checkpoint_grid(std::uint64_t horizon, unsigned per_decade);

using EvidenceTable = std::vector<std::vector<EvidenceSummary>>;  // [agent][hypothesis]

/// Draws every (agent, hypothesis) evidence summary from the evidence substream
/// of (scenario.seed, run). Deterministic in (scenario, run).
EvidenceTable generate_evidence(const Scenario& scenario, std::uint64_t run);

enum class Verdict { Accept, Reject, Unsure };

const char* to_string(Verdict v);

/// Accept if log_belief >= ln υ, Reject if log_belief < -ln υ, else Unsure.
Verdict verdict(double log_belief, double upsilon);

struct RunResult {
  std::uint64_t run = 0;
  std::vector<std::uint64_t> checkpoints;
  std::vector<Matrix> log_beliefs;  // per checkpoint, agents × hypotheses
  /// Σ_i of each agent's accumulated ln ℓ, per checkpoint and hypothesis.
  std::vector<std::vector<double>> network_log_ulr;
  Matrix final_log_ulr;  // agents × hypotheses, accumulated ln ℓ at the horizon
  EvidenceTable evidence;
  Matrix agent_targets;                   // ln Ñ per agent and hypothesis, ±inf if dogmatic
  std::vector<double> centralized_target; // per hypothesis, mean of agent_targets
  std::vector<std::vector<Verdict>> verdicts;  // [agent][hypothesis] at the horizon

  std::size_t agents() const { return agent_targets.rows(); }
  std::size_t hypotheses() const { return agent_targets.cols(); }
  /// Index of checkpoint t; throws if t is not on the grid.
  std::size_t checkpoint_index(std::uint64_t t) const;
  double log_belief(std::uint64_t t, std::size_t agent, std::size_t hypothesis) const;
  /// (1/m) Σ_i |ln μ_it(θ) - target(θ)| at every checkpoint.
  std::vector<double> mean_abs_log_gap(std::size_t hypothesis) const;
  /// max_i ln μ_it(θ) - min_i ln μ_it(θ) at checkpoint t.
  double spread(std::uint64_t t, std::size_t hypothesis) const;
};

RunResult run_simulation(const Scenario& scenario, std::uint64_t run_index);
RunResult run_simulation(const Scenario& scenario, const Network& net,
                         std::uint64_t run_index);

struct EnsembleDiagnostics {
  std::vector<std::uint64_t> checkpoints;
  /// [hypothesis][checkpoint]: (1/(m·runs)) Σ_runs Σ_i |ln μ_it(θ) - target|.
  std::vector<std::vector<double>> mean_abs_log_gap;
};

struct EnsembleResult {
  std::vector<RunResult> runs;
  EnsembleDiagnostics diagnostics;
};

struct EnsembleOptions {
  unsigned threads = 0;  // 0: hardware concurrency
};

EnsembleDiagnostics summarize(const std::vector<RunResult>& runs);

/// Runs scenario.runs independent simulations (in parallel when threads > 1).
/// Output depends only on the scenario, never on the thread count.
EnsembleResult ensemble(const Scenario& scenario, const EnsembleOptions& options = {});

/// The reference two-hypothesis study: m-agent directed cycle with self weight 0.5, two
/// hypotheses N(0, 1/0.5) and N(0, 1/0.4), truth N(0, 1/0.5), and the three
/// named evidence plans "low" [0, 100], "high" [1e3, 1e4] and "infinite".
Scenario reference_scenario(std::size_t agents, const std::string& plan = "low");

}  // namespace nbsl
