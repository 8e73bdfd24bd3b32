#include "nbsl/simulation.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "nbsl/random.h"

namespace nbsl {

EvidenceRegime EvidencePlan::resolve(std::size_t agent, std::size_t hypothesis) const {
  EvidenceRegime out = base;
  for (const auto& o : overrides) {
    if (o.agent && *o.agent != agent) continue;
    if (o.hypothesis && *o.hypothesis != hypothesis) continue;
    out = o.regime;
  }
  return out;
}

Matrix NetworkSpec::matrix() const {
  if (builder == Builder::Explicit) return weights;
  return directed_cycle(agents, self_weight).weights();
}

Network NetworkSpec::build() const {
  if (builder == Builder::Explicit) return validate_network(weights);
  return directed_cycle(agents, self_weight);
}

std::string OutputSpec::summary_path() const {
  if (!summary.empty()) return summary;
  const auto dot = results.find_last_of('.');
  const auto slash = results.find_last_of('/');
  const bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
  return (has_ext ? results.substr(0, dot) : results) + ".summary.json";
}

std::optional<std::size_t> Scenario::find_plan(const std::string& name) const {
  for (std::size_t k = 0; k < evidence.size(); ++k) {
    if (evidence[k].name == name) return k;
  }
  return std::nullopt;
}

std::vector<std::vector<GaussianParams>> Scenario::hypothesis_table() const {
  std::vector<std::vector<GaussianParams>> table(agents());
  for (std::size_t i = 0; i < agents(); ++i) {
    for (const auto& h : hypotheses) table[i].push_back(h.params.at(i));
  }
  return table;
}

std::vector<AgentModel> Scenario::agent_models() const {
  std::vector<AgentModel> out(agents());
  for (std::size_t i = 0; i < agents(); ++i) {
    out[i].truth = truth.at(i);
    out[i].evidence.resize(hypotheses.size());
  }
  return out;
}

namespace {

void check_gaussian(const GaussianParams& g, const std::string& path) {
  if (!std::isfinite(g.mu)) throw ScenarioError(path + ".mu", "must be finite");
  if (!(g.lambda > 0.0) || !std::isfinite(g.lambda)) {
    throw ScenarioError(path + ".lambda", "precision must be positive and finite");
  }
}

void check_regime(const EvidenceRegime& r, const std::string& path) {
  if (r.kind == EvidenceRegime::Kind::Range && r.lo > r.hi) {
    throw ScenarioError(path, "evidence range lo (" + std::to_string(r.lo) +
                                  ") exceeds hi (" + std::to_string(r.hi) + ")");
  }
  if (r.kind == EvidenceRegime::Kind::LargeSample && r.count == 0) {
    throw ScenarioError(path + ".count", "large-sample evidence needs a positive count");
  }
}

}  // namespace

void Scenario::validate() const {
  const std::size_t m = agents();
  if (network.builder == NetworkSpec::Builder::DirectedCycle) {
    if (network.agents < 2) throw ScenarioError("network.agents", "need at least 2 agents");
    if (!(network.self_weight > 0.0 && network.self_weight < 1.0)) {
      throw ScenarioError("network.self_weight", "must lie in (0, 1)");
    }
  } else if (m == 0 || network.weights.cols() != m) {
    throw ScenarioError("network.matrix", "must be a non-empty square matrix");
  }
  if (hypotheses.empty()) throw ScenarioError("hypotheses", "at least one hypothesis required");
  for (std::size_t k = 0; k < hypotheses.size(); ++k) {
    const std::string path = "hypotheses[" + std::to_string(k) + "]";
    if (hypotheses[k].params.size() != m) {
      throw ScenarioError(path, "needs parameters for each of the " + std::to_string(m) + " agents");
    }
    for (std::size_t i = 0; i < m; ++i) {
      check_gaussian(hypotheses[k].params[i], path + ".agents[" + std::to_string(i) + "]");
    }
  }
  if (truth.size() != m) throw ScenarioError("truth", "needs parameters for each agent");
  for (std::size_t i = 0; i < m; ++i) check_gaussian(truth[i], "truth.agents[" + std::to_string(i) + "]");
  if (evidence.empty()) throw ScenarioError("evidence", "at least one evidence plan required");
  for (std::size_t p = 0; p < evidence.size(); ++p) {
    const std::string path = "evidence[" + std::to_string(p) + "]";
    check_regime(evidence[p].base, path);
    for (std::size_t o = 0; o < evidence[p].overrides.size(); ++o) {
      const auto& ov = evidence[p].overrides[o];
      const std::string opath = path + ".overrides[" + std::to_string(o) + "]";
      if (ov.agent && *ov.agent >= m) throw ScenarioError(opath + ".agent", "agent index out of range");
      if (ov.hypothesis && *ov.hypothesis >= hypotheses.size()) {
        throw ScenarioError(opath + ".hypothesis", "hypothesis index out of range");
      }
      check_regime(ov.regime, opath);
    }
    for (std::size_t q = 0; q < p; ++q) {
      if (evidence[q].name == evidence[p].name) throw ScenarioError(path + ".name", "duplicate plan name");
    }
  }
  if (active_evidence >= evidence.size()) throw ScenarioError("active_evidence", "unknown plan");
  if (!prior.is_proper() || !std::isfinite(prior.mu)) {
    throw ScenarioError("prior", "kappa, alpha and beta must be positive");
  }
  if (horizon < 1) throw ScenarioError("horizon", "must be at least 1");
  if (runs < 1) throw ScenarioError("runs", "must be at least 1");
  if (!(upsilon > 1.0)) throw ScenarioError("upsilon", "threshold must exceed 1");
  if (checkpoints_per_decade < 1) throw ScenarioError("checkpoints_per_decade", "must be at least 1");
}

std::vector<std::uint64_t> checkpoint_grid(std::uint64_t horizon, unsigned per_decade) {
  std::vector<std::uint64_t> grid;
  if (horizon == 0) return grid;
  for (unsigned k = 0;; ++k) {
    const double t = std::round(std::pow(10.0, static_cast<double>(k) / per_decade));
    if (t >= static_cast<double>(horizon)) break;
    const auto ti = static_cast<std::uint64_t>(t);
    if (grid.empty() || grid.back() != ti) grid.push_back(ti);
  }
  grid.push_back(horizon);
  return grid;
}

EvidenceTable generate_evidence(const Scenario& scenario, std::uint64_t run) {
  const std::size_t m = scenario.agents();
  const std::size_t h = scenario.hypothesis_count();
  const auto& plan = scenario.active_plan();
  EvidenceTable table(m, std::vector<EvidenceSummary>(h));
  std::vector<double> samples;
  for (std::size_t i = 0; i < m; ++i) {
    RandomStream rng(derive_seed(scenario.seed, run, i, StreamPurpose::Evidence));
    for (std::size_t k = 0; k < h; ++k) {
      const auto regime = plan.resolve(i, k);
      const auto& params = scenario.hypotheses[k].params[i];
      std::uint64_t count = 0;
      switch (regime.kind) {
        case EvidenceRegime::Kind::Dogmatic:
          table[i][k] = EvidenceSummary::exact(params);
          continue;
        case EvidenceRegime::Kind::LargeSample:
          table[i][k] = EvidenceSummary::large_sample(params, regime.count);
          continue;
        case EvidenceRegime::Kind::Explicit:
          count = regime.count;
          break;
        case EvidenceRegime::Kind::Range:
          count = rng.uniform_int(regime.lo, regime.hi);
          break;
      }
      const double sd = std::sqrt(params.variance());
      samples.resize(count);
      for (auto& x : samples) x = rng.normal(params.mu, sd);
      table[i][k] = EvidenceSummary::from_samples(samples);
    }
  }
  return table;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Accept: return "accept";
    case Verdict::Reject: return "reject";
    case Verdict::Unsure: return "unsure";
  }
  return "unsure";
}

Verdict verdict(double log_belief, double upsilon) {
  if (!(upsilon > 1.0)) throw std::invalid_argument("verdict: upsilon must exceed 1");
  const double threshold = std::log(upsilon);
  if (log_belief >= threshold) return Verdict::Accept;
  if (log_belief < -threshold) return Verdict::Reject;
  return Verdict::Unsure;
}

std::size_t RunResult::checkpoint_index(std::uint64_t t) const {
  const auto it = std::lower_bound(checkpoints.begin(), checkpoints.end(), t);
  if (it == checkpoints.end() || *it != t) {
    throw std::out_of_range("t = " + std::to_string(t) + " is not a checkpoint");
  }
  return static_cast<std::size_t>(it - checkpoints.begin());
}

double RunResult::log_belief(std::uint64_t t, std::size_t agent, std::size_t hypothesis) const {
  return log_beliefs[checkpoint_index(t)](agent, hypothesis);
}

std::vector<double> RunResult::mean_abs_log_gap(std::size_t hypothesis) const {
  std::vector<double> out;
  out.reserve(checkpoints.size());
  const double target = centralized_target.at(hypothesis);
  for (const auto& b : log_beliefs) {
    if (!std::isfinite(target)) {
      out.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < b.rows(); ++i) sum += std::abs(b(i, hypothesis) - target);
    out.push_back(sum / static_cast<double>(b.rows()));
  }
  return out;
}

double RunResult::spread(std::uint64_t t, std::size_t hypothesis) const {
  const auto& b = log_beliefs[checkpoint_index(t)];
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < b.rows(); ++i) {
    lo = std::min(lo, b(i, hypothesis));
    hi = std::max(hi, b(i, hypothesis));
  }
  return hi - lo;
}

namespace {

double agent_target(const EvidenceSummary& ev, const GaussianParams& hyp,
                    const GaussianParams& truth, const GaussGammaParams& prior) {
  if (ev.dogmatic) {
    return hyp == truth ? std::numeric_limits<double>::infinity()
                        : -std::numeric_limits<double>::infinity();
  }
  return log_asymptotic_ulr(ev, truth, prior);
}

// Mean of per-agent targets; any -inf dominates, then any +inf.
double centralized(const Matrix& targets, std::size_t k) {
  bool neg_inf = false, pos_inf = false;
  double sum = 0.0;
  for (std::size_t i = 0; i < targets.rows(); ++i) {
    const double v = targets(i, k);
    if (v == -std::numeric_limits<double>::infinity()) neg_inf = true;
    else if (v == std::numeric_limits<double>::infinity()) pos_inf = true;
    else sum += v;
  }
  if (neg_inf) return -std::numeric_limits<double>::infinity();
  if (pos_inf) return std::numeric_limits<double>::infinity();
  return sum / static_cast<double>(targets.rows());
}

}  // namespace

RunResult run_simulation(const Scenario& scenario, std::uint64_t run_index) {
  scenario.validate();
  return run_simulation(scenario, scenario.network.build(), run_index);
}

RunResult run_simulation(const Scenario& scenario, const Network& net, std::uint64_t run_index) {
  const std::size_t m = scenario.agents();
  const std::size_t h = scenario.hypothesis_count();
  if (net.size() != m) {
    throw NetworkError(NetworkErrorKind::DimensionMismatch, "network size differs from scenario agent count");
  }

  RunResult result;
  result.run = run_index;
  result.checkpoints = checkpoint_grid(scenario.horizon, scenario.checkpoints_per_decade);
  result.evidence = generate_evidence(scenario, scenario.fixed_evidence ? 0 : run_index);

  std::vector<std::vector<UncertainModel>> models(m);
  result.agent_targets = Matrix(m, h);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < h; ++k) {
      const auto& ev = result.evidence[i][k];
      models[i].emplace_back(ev, scenario.prior);
      result.agent_targets(i, k) =
          agent_target(ev, scenario.hypotheses[k].params[i], scenario.truth[i], scenario.prior);
    }
  }
  for (std::size_t k = 0; k < h; ++k) {
    result.centralized_target.push_back(centralized(result.agent_targets, k));
  }

  std::vector<RandomStream> rngs;
  std::vector<double> sd(m);
  rngs.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    rngs.emplace_back(derive_seed(scenario.seed, run_index, i, StreamPurpose::Measurement));
    sd[i] = std::sqrt(scenario.truth[i].variance());
  }

  std::vector<ObservationStream> streams(m);
  BeliefMatrix current = BeliefMatrix::initial(m, h);
  BeliefMatrix next = BeliefMatrix::initial(m, h);
  Matrix log_ell(m, h);
  Matrix accumulated(m, h);
  auto checkpoint = result.checkpoints.begin();

  for (std::uint64_t t = 1; t <= scenario.horizon; ++t) {
    for (std::size_t i = 0; i < m; ++i) {
      const double x = rngs[i].normal(scenario.truth[i].mu, sd[i]);
      const auto& s = streams[i];
      const double ignorance =
          log_point_predictive(condition(scenario.prior, s.count(), s.mean(), s.m2()), x);
      for (std::size_t k = 0; k < h; ++k) {
        const double v = models[i][k].log_ell(s, x, ignorance);
        log_ell(i, k) = v;
        accumulated(i, k) += v;
      }
      streams[i].push(x);
    }
    belief_step_into(net, current, log_ell, next);
    std::swap(current, next);

    if (checkpoint != result.checkpoints.end() && *checkpoint == t) {
      result.log_beliefs.push_back(current.log_beliefs);
      std::vector<double> totals(h, 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t k = 0; k < h; ++k) totals[k] += accumulated(i, k);
      }
      result.network_log_ulr.push_back(std::move(totals));
      ++checkpoint;
    }
  }

  result.final_log_ulr = accumulated;
  result.verdicts.assign(m, std::vector<Verdict>(h));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < h; ++k) {
      result.verdicts[i][k] = verdict(current.log_beliefs(i, k), scenario.upsilon);
    }
  }
  return result;
}

EnsembleDiagnostics summarize(const std::vector<RunResult>& runs) {
  EnsembleDiagnostics diag;
  if (runs.empty()) return diag;
  diag.checkpoints = runs.front().checkpoints;
  const std::size_t h = runs.front().hypotheses();
  diag.mean_abs_log_gap.assign(h, std::vector<double>(diag.checkpoints.size(), 0.0));
  for (const auto& r : runs) {
    for (std::size_t k = 0; k < h; ++k) {
      const auto gap = r.mean_abs_log_gap(k);
      for (std::size_t c = 0; c < gap.size(); ++c) diag.mean_abs_log_gap[k][c] += gap[c];
    }
  }
  for (auto& series : diag.mean_abs_log_gap) {
    for (auto& v : series) v /= static_cast<double>(runs.size());
  }
  return diag;
}

EnsembleResult ensemble(const Scenario& scenario, const EnsembleOptions& options) {
  scenario.validate();
  const Network net = scenario.network.build();
  EnsembleResult out;
  out.runs.resize(scenario.runs);

  unsigned threads = options.threads == 0 ? std::thread::hardware_concurrency() : options.threads;
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(scenario.runs)));

  if (threads == 1) {
    for (std::uint64_t r = 0; r < scenario.runs; ++r) out.runs[r] = run_simulation(scenario, net, r);
  } else {
    std::atomic<std::uint64_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    {
      std::vector<std::jthread> pool;
      for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
          try {
            for (auto r = next++; r < scenario.runs; r = next++) {
              out.runs[r] = run_simulation(scenario, net, r);
            }
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  out.diagnostics = summarize(out.runs);
  return out;
}

Scenario reference_scenario(std::size_t agents, const std::string& plan) {
  Scenario s;
  s.network.builder = NetworkSpec::Builder::DirectedCycle;
  s.network.agents = agents;
  s.network.self_weight = 0.5;
  s.hypotheses = {{"theta1", std::vector<GaussianParams>(agents, {0.0, 0.5})},
                  {"theta2", std::vector<GaussianParams>(agents, {0.0, 0.4})}};
  s.truth.assign(agents, {0.0, 0.5});
  s.evidence = {{"low", EvidenceRegime::range(0, 100), {}},
                {"high", EvidenceRegime::range(1000, 10000), {}},
                {"infinite", EvidenceRegime::dogmatic(), {}}};
  const auto idx = s.find_plan(plan);
  if (!idx) throw ScenarioError("evidence", "unknown plan '" + plan + "'");
  s.active_evidence = *idx;
  return s;
}

}  // namespace nbsl
