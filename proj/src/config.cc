#include "nbsl/config.h"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "nbsl/results_io.h"

namespace nbsl {

const char* to_string(ConfigError::Kind kind) {
  switch (kind) {
    case ConfigError::Kind::Parse: return "ParseError";
    case ConfigError::Kind::UnknownKey: return "UnknownKey";
    case ConfigError::Kind::InvalidValue: return "InvalidValue";
  }
  return "ParseError";
}

namespace {

std::string describe(ConfigError::Kind kind, const std::string& path, int line,
                     const std::string& message) {
  std::ostringstream os;
  os << to_string(kind);
  if (line > 0) os << " at line " << line;
  if (!path.empty()) os << " (" << path << ")";
  os << ": " << message;
  return os.str();
}

}  // namespace

ConfigError::ConfigError(Kind kind, std::string path, int line, const std::string& message)
    : std::runtime_error(describe(kind, path, line, message)),
      kind_(kind),
      path_(std::move(path)),
      line_(line) {}

namespace {

using Kind = ConfigError::Kind;

int line_of(const YAML::Node& node) {
  const auto mark = node.Mark();
  return mark.line < 0 ? 0 : mark.line + 1;
}

[[noreturn]] void invalid(const YAML::Node& node, const std::string& path,
                          const std::string& message) {
  throw ConfigError(Kind::InvalidValue, path, line_of(node), message);
}

std::string join(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

std::string index_path(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

void require_map(const YAML::Node& node, const std::string& path) {
  if (!node.IsMap()) invalid(node, path, "expected a mapping");
}

void check_keys(const YAML::Node& node, const std::string& path,
                std::initializer_list<const char*> allowed) {
  require_map(node, path);
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ConfigError(Kind::UnknownKey, join(path, key), line_of(kv.first), "unknown key '" + key + "'");
  }
}

std::string scalar(const YAML::Node& node, const std::string& path) {
  if (!node.IsScalar()) invalid(node, path, "expected a scalar value");
  return node.Scalar();
}

double as_double(const YAML::Node& node, const std::string& path) {
  const auto text = scalar(node, path);
  try {
    const double v = parse_double(text);
    if (!std::isfinite(v)) invalid(node, path, "must be finite");
    return v;
  } catch (const std::invalid_argument&) {
    invalid(node, path, "expected a number, got '" + text + "'");
  }
}

std::uint64_t as_count(const YAML::Node& node, const std::string& path) {
  const auto text = scalar(node, path);
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec == std::errc() && ptr == end) return v;
  // Accept integral floating forms such as 1e4.
  double d = 0.0;
  const auto [dptr, dec] = std::from_chars(text.data(), end, d);
  if (dec == std::errc() && dptr == end && d >= 0.0 && d < 0x1.0p64 && std::floor(d) == d) {
    return static_cast<std::uint64_t>(d);
  }
  invalid(node, path, "expected a nonnegative integer, got '" + text + "'");
}

bool as_bool(const YAML::Node& node, const std::string& path) {
  const auto text = scalar(node, path);
  if (text == "true" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "no" || text == "off") return false;
  invalid(node, path, "expected true or false, got '" + text + "'");
}

const YAML::Node required(const YAML::Node& parent, const char* key, const std::string& path) {
  const auto node = parent[key];
  if (!node) {
    throw ConfigError(Kind::InvalidValue, join(path, key), line_of(parent),
                      std::string("missing required key '") + key + "'");
  }
  return node;
}

GaussianParams parse_gaussian_fields(const YAML::Node& node, const std::string& path) {
  GaussianParams g;
  g.mu = as_double(required(node, "mu", path), join(path, "mu"));
  g.lambda = as_double(required(node, "lambda", path), join(path, "lambda"));
  if (!(g.lambda > 0.0)) invalid(node["lambda"], join(path, "lambda"), "precision must be positive");
  return g;
}

// {mu, lambda, agents: [{agent, mu, lambda}, ...]} expanded to one entry per agent.
std::vector<GaussianParams> parse_per_agent(const YAML::Node& node, const std::string& path,
                                            std::size_t m) {
  const auto base = parse_gaussian_fields(node, path);
  std::vector<GaussianParams> out(m, base);
  if (const auto agents = node["agents"]) {
    const auto apath = join(path, "agents");
    if (!agents.IsSequence()) invalid(agents, apath, "expected a list");
    for (std::size_t i = 0; i < agents.size(); ++i) {
      const auto entry = agents[i];
      const auto epath = index_path(apath, i);
      check_keys(entry, epath, {"agent", "mu", "lambda"});
      const auto a = as_count(required(entry, "agent", epath), join(epath, "agent"));
      if (a >= m) invalid(entry["agent"], join(epath, "agent"), "agent index out of range");
      out[a] = parse_gaussian_fields(entry, epath);
    }
  }
  return out;
}

EvidenceRegime parse_regime(const YAML::Node& node, const std::string& path) {
  const auto kind_node = required(node, "regime", path);
  const auto kind = scalar(kind_node, join(path, "regime"));
  if (kind == "explicit") {
    return EvidenceRegime::explicit_count(as_count(required(node, "count", path), join(path, "count")));
  }
  if (kind == "range") {
    const auto lo = as_count(required(node, "lo", path), join(path, "lo"));
    const auto hi = as_count(required(node, "hi", path), join(path, "hi"));
    if (lo > hi) {
      invalid(node, path, "evidence range lo (" + std::to_string(lo) + ") exceeds hi (" +
                              std::to_string(hi) + ")");
    }
    return EvidenceRegime::range(lo, hi);
  }
  if (kind == "dogmatic") return EvidenceRegime::dogmatic();
  if (kind == "large_sample") {
    EvidenceRegime r = EvidenceRegime::large_sample();
    if (const auto c = node["count"]) r.count = as_count(c, join(path, "count"));
    if (r.count == 0) invalid(node, join(path, "count"), "must be positive");
    return r;
  }
  invalid(kind_node, join(path, "regime"),
          "expected one of explicit, range, dogmatic, large_sample; got '" + kind + "'");
}

void check_regime_keys(const YAML::Node& node, const std::string& path, bool with_selectors) {
  if (with_selectors) {
    check_keys(node, path, {"agent", "hypothesis", "regime", "count", "lo", "hi"});
  } else {
    check_keys(node, path, {"name", "regime", "count", "lo", "hi", "overrides"});
  }
}

EvidencePlan parse_plan(const YAML::Node& node, const std::string& path, std::size_t m,
                        std::size_t h, std::size_t index) {
  check_regime_keys(node, path, false);
  EvidencePlan plan;
  plan.name = node["name"] ? scalar(node["name"], join(path, "name"))
                           : (index == 0 ? "default" : "plan" + std::to_string(index));
  plan.base = parse_regime(node, path);
  if (const auto ovs = node["overrides"]) {
    const auto opath = join(path, "overrides");
    if (!ovs.IsSequence()) invalid(ovs, opath, "expected a list");
    for (std::size_t o = 0; o < ovs.size(); ++o) {
      const auto entry = ovs[o];
      const auto epath = index_path(opath, o);
      check_regime_keys(entry, epath, true);
      EvidenceOverride ov;
      if (const auto a = entry["agent"]) {
        ov.agent = as_count(a, join(epath, "agent"));
        if (*ov.agent >= m) invalid(a, join(epath, "agent"), "agent index out of range");
      }
      if (const auto k = entry["hypothesis"]) {
        ov.hypothesis = as_count(k, join(epath, "hypothesis"));
        if (*ov.hypothesis >= h) invalid(k, join(epath, "hypothesis"), "hypothesis index out of range");
      }
      ov.regime = parse_regime(entry, epath);
      plan.overrides.push_back(ov);
    }
  }
  return plan;
}

NetworkSpec parse_network(const YAML::Node& node) {
  const std::string path = "network";
  check_keys(node, path, {"builder", "agents", "self_weight", "matrix"});
  NetworkSpec spec;
  const auto builder_node = required(node, "builder", path);
  const auto builder = scalar(builder_node, "network.builder");
  if (builder == "directed_cycle") {
    if (node["matrix"]) invalid(node["matrix"], "network.matrix", "only valid with builder 'explicit'");
    spec.builder = NetworkSpec::Builder::DirectedCycle;
    spec.agents = as_count(required(node, "agents", path), "network.agents");
    if (spec.agents < 2) invalid(node["agents"], "network.agents", "need at least 2 agents");
    if (const auto w = node["self_weight"]) {
      spec.self_weight = as_double(w, "network.self_weight");
      if (!(spec.self_weight > 0.0 && spec.self_weight < 1.0)) {
        invalid(w, "network.self_weight", "must lie in (0, 1)");
      }
    }
  } else if (builder == "explicit") {
    if (node["agents"] || node["self_weight"]) {
      invalid(node, path, "'agents' and 'self_weight' only apply to builder 'directed_cycle'");
    }
    const auto matrix = required(node, "matrix", path);
    if (!matrix.IsSequence() || matrix.size() == 0) invalid(matrix, "network.matrix", "expected a non-empty list of rows");
    const std::size_t n = matrix.size();
    spec.builder = NetworkSpec::Builder::Explicit;
    spec.weights = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = matrix[i];
      const auto rpath = index_path("network.matrix", i);
      if (!row.IsSequence() || row.size() != n) invalid(row, rpath, "expected a row of " + std::to_string(n) + " weights");
      for (std::size_t j = 0; j < n; ++j) {
        const double v = as_double(row[j], index_path(rpath, j));
        if (v < 0.0) invalid(row[j], index_path(rpath, j), "weights must be nonnegative");
        spec.weights(i, j) = v;
      }
    }
  } else {
    invalid(builder_node, "network.builder", "expected 'directed_cycle' or 'explicit', got '" + builder + "'");
  }
  return spec;
}

Scenario parse_document(const YAML::Node& root) {
  if (!root || root.IsNull()) throw ConfigError(Kind::Parse, "", 0, "configuration is empty");
  if (!root.IsMap()) throw ConfigError(Kind::Parse, "", line_of(root), "top level must be a mapping");
  check_keys(root, "", {"network", "hypotheses", "truth", "evidence", "active_evidence", "prior",
                        "horizon", "seed", "runs", "upsilon", "fixed_evidence",
                        "checkpoints_per_decade", "output"});

  Scenario s;
  s.network = parse_network(required(root, "network", ""));
  const std::size_t m = s.network.size();

  const auto hyps = required(root, "hypotheses", "");
  if (!hyps.IsSequence() || hyps.size() == 0) invalid(hyps, "hypotheses", "expected a non-empty list");
  for (std::size_t k = 0; k < hyps.size(); ++k) {
    const auto path = index_path("hypotheses", k);
    check_keys(hyps[k], path, {"name", "mu", "lambda", "agents"});
    Hypothesis hyp;
    hyp.name = hyps[k]["name"] ? scalar(hyps[k]["name"], join(path, "name")) : "theta" + std::to_string(k + 1);
    hyp.params = parse_per_agent(hyps[k], path, m);
    s.hypotheses.push_back(std::move(hyp));
  }

  const auto truth = required(root, "truth", "");
  check_keys(truth, "truth", {"mu", "lambda", "agents"});
  s.truth = parse_per_agent(truth, "truth", m);

  const auto ev = required(root, "evidence", "");
  if (ev.IsMap()) {
    s.evidence.push_back(parse_plan(ev, "evidence", m, s.hypotheses.size(), 0));
  } else if (ev.IsSequence() && ev.size() > 0) {
    for (std::size_t p = 0; p < ev.size(); ++p) {
      s.evidence.push_back(parse_plan(ev[p], index_path("evidence", p), m, s.hypotheses.size(), p));
      for (std::size_t q = 0; q < p; ++q) {
        if (s.evidence[q].name == s.evidence[p].name) {
          invalid(ev[p], index_path("evidence", p) + ".name", "duplicate plan name '" + s.evidence[p].name + "'");
        }
      }
    }
  } else {
    invalid(ev, "evidence", "expected an evidence plan or a non-empty list of plans");
  }
  if (const auto active = root["active_evidence"]) {
    const auto name = scalar(active, "active_evidence");
    const auto idx = s.find_plan(name);
    if (!idx) invalid(active, "active_evidence", "no evidence plan named '" + name + "'");
    s.active_evidence = *idx;
  }

  if (const auto prior = root["prior"]) {
    check_keys(prior, "prior", {"mu", "kappa", "alpha", "beta"});
    if (prior["mu"]) s.prior.mu = as_double(prior["mu"], "prior.mu");
    if (prior["kappa"]) s.prior.kappa = as_double(prior["kappa"], "prior.kappa");
    if (prior["alpha"]) s.prior.alpha = as_double(prior["alpha"], "prior.alpha");
    if (prior["beta"]) s.prior.beta = as_double(prior["beta"], "prior.beta");
    if (!s.prior.is_proper()) invalid(prior, "prior", "kappa, alpha and beta must be positive");
  }
  if (const auto n = root["horizon"]) {
    s.horizon = as_count(n, "horizon");
    if (s.horizon < 1) invalid(n, "horizon", "must be at least 1");
  }
  if (const auto n = root["seed"]) s.seed = as_count(n, "seed");
  if (const auto n = root["runs"]) {
    s.runs = as_count(n, "runs");
    if (s.runs < 1) invalid(n, "runs", "must be at least 1");
  }
  if (const auto n = root["upsilon"]) {
    s.upsilon = as_double(n, "upsilon");
    if (!(s.upsilon > 1.0)) invalid(n, "upsilon", "threshold must exceed 1");
  }
  if (const auto n = root["fixed_evidence"]) s.fixed_evidence = as_bool(n, "fixed_evidence");
  if (const auto n = root["checkpoints_per_decade"]) {
    const auto v = as_count(n, "checkpoints_per_decade");
    if (v < 1 || v > 1000) invalid(n, "checkpoints_per_decade", "must lie in [1, 1000]");
    s.checkpoints_per_decade = static_cast<unsigned>(v);
  }
  if (const auto out = root["output"]) {
    check_keys(out, "output", {"results", "summary", "linear"});
    if (out["results"]) s.output.results = scalar(out["results"], "output.results");
    if (out["summary"]) s.output.summary = scalar(out["summary"], "output.summary");
    if (out["linear"]) s.output.linear = as_bool(out["linear"], "output.linear");
  }

  try {
    s.validate();
  } catch (const ScenarioError& e) {
    throw ConfigError(Kind::InvalidValue, e.path(), 0, e.what());
  }
  return s;
}

}  // namespace

Scenario parse_config_string(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(Kind::Parse, "", e.mark.line + 1, e.msg);
  }
  try {
    return parse_document(root);
  } catch (const YAML::Exception& e) {
    throw ConfigError(Kind::Parse, "", e.mark.line + 1, e.msg);
  }
}

Scenario parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(Kind::Parse, "", 0, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_string(buffer.str());
}

namespace {

void emit_gaussian(YAML::Emitter& out, const GaussianParams& g) {
  out << YAML::Key << "mu" << YAML::Value << format_double(g.mu);
  out << YAML::Key << "lambda" << YAML::Value << format_double(g.lambda);
}

// Agent 0's parameters become the base; differing agents are listed.
void emit_per_agent(YAML::Emitter& out, const std::vector<GaussianParams>& params) {
  emit_gaussian(out, params.front());
  bool any = false;
  for (std::size_t i = 1; i < params.size(); ++i) {
    if (params[i] == params.front()) continue;
    if (!any) {
      out << YAML::Key << "agents" << YAML::Value << YAML::BeginSeq;
      any = true;
    }
    out << YAML::Flow << YAML::BeginMap << YAML::Key << "agent" << YAML::Value << i;
    emit_gaussian(out, params[i]);
    out << YAML::EndMap;
  }
  if (any) out << YAML::EndSeq;
}

void emit_regime(YAML::Emitter& out, const EvidenceRegime& r) {
  switch (r.kind) {
    case EvidenceRegime::Kind::Explicit:
      out << YAML::Key << "regime" << YAML::Value << "explicit";
      out << YAML::Key << "count" << YAML::Value << r.count;
      break;
    case EvidenceRegime::Kind::Range:
      out << YAML::Key << "regime" << YAML::Value << "range";
      out << YAML::Key << "lo" << YAML::Value << r.lo;
      out << YAML::Key << "hi" << YAML::Value << r.hi;
      break;
    case EvidenceRegime::Kind::Dogmatic:
      out << YAML::Key << "regime" << YAML::Value << "dogmatic";
      break;
    case EvidenceRegime::Kind::LargeSample:
      out << YAML::Key << "regime" << YAML::Value << "large_sample";
      out << YAML::Key << "count" << YAML::Value << r.count;
      break;
  }
}

}  // namespace

std::string write_config(const Scenario& s) {
  YAML::Emitter out;
  out << YAML::BeginMap;

  out << YAML::Key << "network" << YAML::Value << YAML::BeginMap;
  if (s.network.builder == NetworkSpec::Builder::DirectedCycle) {
    out << YAML::Key << "builder" << YAML::Value << "directed_cycle";
    out << YAML::Key << "agents" << YAML::Value << s.network.agents;
    out << YAML::Key << "self_weight" << YAML::Value << format_double(s.network.self_weight);
  } else {
    out << YAML::Key << "builder" << YAML::Value << "explicit";
    out << YAML::Key << "matrix" << YAML::Value << YAML::BeginSeq;
    for (std::size_t i = 0; i < s.network.weights.rows(); ++i) {
      out << YAML::Flow << YAML::BeginSeq;
      for (double v : s.network.weights.row(i)) out << format_double(v);
      out << YAML::EndSeq;
    }
    out << YAML::EndSeq;
  }
  out << YAML::EndMap;

  out << YAML::Key << "hypotheses" << YAML::Value << YAML::BeginSeq;
  for (const auto& h : s.hypotheses) {
    out << YAML::BeginMap << YAML::Key << "name" << YAML::Value << h.name;
    emit_per_agent(out, h.params);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "truth" << YAML::Value << YAML::BeginMap;
  emit_per_agent(out, s.truth);
  out << YAML::EndMap;

  out << YAML::Key << "evidence" << YAML::Value << YAML::BeginSeq;
  for (const auto& plan : s.evidence) {
    out << YAML::BeginMap << YAML::Key << "name" << YAML::Value << plan.name;
    emit_regime(out, plan.base);
    if (!plan.overrides.empty()) {
      out << YAML::Key << "overrides" << YAML::Value << YAML::BeginSeq;
      for (const auto& ov : plan.overrides) {
        out << YAML::Flow << YAML::BeginMap;
        if (ov.agent) out << YAML::Key << "agent" << YAML::Value << *ov.agent;
        if (ov.hypothesis) out << YAML::Key << "hypothesis" << YAML::Value << *ov.hypothesis;
        emit_regime(out, ov.regime);
        out << YAML::EndMap;
      }
      out << YAML::EndSeq;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "active_evidence" << YAML::Value << s.active_plan().name;

  out << YAML::Key << "prior" << YAML::Value << YAML::Flow << YAML::BeginMap;
  out << YAML::Key << "mu" << YAML::Value << format_double(s.prior.mu);
  out << YAML::Key << "kappa" << YAML::Value << format_double(s.prior.kappa);
  out << YAML::Key << "alpha" << YAML::Value << format_double(s.prior.alpha);
  out << YAML::Key << "beta" << YAML::Value << format_double(s.prior.beta);
  out << YAML::EndMap;

  out << YAML::Key << "horizon" << YAML::Value << s.horizon;
  out << YAML::Key << "seed" << YAML::Value << s.seed;
  out << YAML::Key << "runs" << YAML::Value << s.runs;
  out << YAML::Key << "upsilon" << YAML::Value << format_double(s.upsilon);
  out << YAML::Key << "fixed_evidence" << YAML::Value << (s.fixed_evidence ? "true" : "false");
  out << YAML::Key << "checkpoints_per_decade" << YAML::Value << s.checkpoints_per_decade;

  out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "results" << YAML::Value << s.output.results;
  if (!s.output.summary.empty()) out << YAML::Key << "summary" << YAML::Value << s.output.summary;
  out << YAML::Key << "linear" << YAML::Value << (s.output.linear ? "true" : "false");
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace nbsl
