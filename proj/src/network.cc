#include "nbsl/network.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace nbsl {

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.front().size();
  Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    if (rows[i].size() != c) {
      throw NetworkError(NetworkErrorKind::NotSquare, "matrix rows have unequal length");
    }
    std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  }
  return m;
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::vector<std::vector<double>> Matrix::to_rows() const {
  std::vector<std::vector<double>> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i].assign(row(i).begin(), row(i).end());
  return out;
}

Matrix Matrix::operator*(const Matrix& rhs) const {
  if (cols_ != rhs.rows_) {
    throw NetworkError(NetworkErrorKind::DimensionMismatch, "matrix product: inner dimensions differ");
  }
  Matrix out(rows_, rhs.cols_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = 0; k < cols_; ++k) {
      const double a = (*this)(i, k);
      if (a == 0.0) continue;
      for (std::size_t j = 0; j < rhs.cols_; ++j) out(i, j) += a * rhs(k, j);
    }
  }
  return out;
}

namespace {

std::vector<bool> reachable(const Matrix& w, bool transpose) {
  const std::size_t n = w.rows();
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    for (std::size_t v = 0; v < n; ++v) {
      const double weight = transpose ? w(v, u) : w(u, v);
      if (weight > 0.0 && !seen[v]) {
        seen[v] = true;
        stack.push_back(v);
      }
    }
  }
  return seen;
}

}  // namespace

NetworkReport assess_network(const Matrix& w) {
  NetworkReport report;
  const std::size_t n = w.rows();
  if (n == 0 || w.cols() != n) {
    report.square = false;
    report.shape_detail = "weight matrix must be square and non-empty";
    report.doubly_stochastic = report.positive_diagonal = report.strongly_connected = false;
    return report;
  }

  for (std::size_t i = 0; i < n && report.nonnegative; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!(w(i, j) >= 0.0) || !std::isfinite(w(i, j))) {
        report.nonnegative = false;
        std::ostringstream os;
        os << "entry (" << i << ", " << j << ") is negative or not finite";
        report.shape_detail = os.str();
        break;
      }
    }
  }

  std::ostringstream stoch;
  stoch.precision(17);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = w.row(i);
    const double sum = std::accumulate(r.begin(), r.end(), 0.0);
    if (!(std::abs(sum - 1.0) <= kStochasticTolerance)) {
      stoch << "row " << i << " sums to " << sum;
      report.doubly_stochastic = false;
      break;
    }
  }
  if (report.doubly_stochastic) {
    for (std::size_t j = 0; j < n; ++j) {
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) sum += w(i, j);
      if (!(std::abs(sum - 1.0) <= kStochasticTolerance)) {
        stoch << "column " << j << " sums to " << sum;
        report.doubly_stochastic = false;
        break;
      }
    }
  }
  report.stochastic_detail = stoch.str();

  for (std::size_t i = 0; i < n; ++i) {
    if (!(w(i, i) > 0.0)) {
      report.positive_diagonal = false;
      report.diagonal_detail = "diagonal entry " + std::to_string(i) + " is not positive";
      break;
    }
  }

  const auto fwd = reachable(w, false);
  const auto bwd = reachable(w, true);
  for (std::size_t i = 0; i < n; ++i) {
    if (!fwd[i] || !bwd[i]) {
      report.strongly_connected = false;
      report.connectivity_detail =
          "agent " + std::to_string(i) + " is not mutually reachable from agent 0";
      break;
    }
  }
  return report;
}

Network::Network(Matrix w) : weights_(std::move(w)), rows_(weights_.rows()) {
  for (std::size_t i = 0; i < weights_.rows(); ++i) {
    for (std::size_t j = 0; j < weights_.cols(); ++j) {
      if (weights_(i, j) > 0.0) rows_[i].push_back({j, weights_(i, j)});
    }
  }
}

std::size_t Network::edge_count() const {
  std::size_t n = 0;
  for (const auto& r : rows_) n += r.size();
  return n;
}

Network validate_network(const Matrix& w) {
  const auto report = assess_network(w);
  if (!report.square) throw NetworkError(NetworkErrorKind::NotSquare, report.shape_detail);
  if (!report.nonnegative) {
    throw NetworkError(NetworkErrorKind::NegativeWeight, report.shape_detail);
  }
  if (!report.doubly_stochastic) {
    throw NetworkError(NetworkErrorKind::NotDoublyStochastic,
                       "Assumption 1(a) violated: weight matrix is not doubly stochastic (" +
                           report.stochastic_detail + ")");
  }
  if (!report.positive_diagonal) {
    throw NetworkError(NetworkErrorKind::ZeroDiagonal,
                       "Assumption 1(b) violated: " + report.diagonal_detail);
  }
  if (!report.strongly_connected) {
    throw NetworkError(NetworkErrorKind::Disconnected,
                       "Assumption 1(c) violated: graph is not strongly connected (" +
                           report.connectivity_detail + ")");
  }
  return Network(w);
}

Network directed_cycle(std::size_t m, double self_weight) {
  if (m < 2) throw std::invalid_argument("directed_cycle: need at least 2 agents");
  if (!(self_weight > 0.0 && self_weight < 1.0)) {
    throw std::invalid_argument("directed_cycle: self_weight must lie in (0, 1)");
  }
  Matrix w(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    w(i, i) = self_weight;
    w(i, (i + m - 1) % m) += 1.0 - self_weight;
  }
  return validate_network(w);
}

double second_singular_value(const Network& net, int iterations) {
  const Matrix& a = net.weights();
  const std::size_t n = a.rows();
  if (n < 2) return 0.0;
  std::vector<double> x(n), y(n), z(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(1.0 + 3.7 * static_cast<double>(i));
  double estimate = 0.0;
  for (int it = 0; it < iterations; ++it) {
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    for (auto& v : x) v -= mean;
    double norm = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
    if (norm == 0.0) return 0.0;
    for (auto& v : x) v /= norm;
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = std::inner_product(a.row(i).begin(), a.row(i).end(), x.begin(), 0.0);
    }
    std::fill(z.begin(), z.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) z[j] += a(i, j) * y[i];
    }
    estimate = std::sqrt(std::inner_product(x.begin(), x.end(), z.begin(), 0.0));
    x.swap(z);
  }
  return estimate;
}

void belief_step_into(const Network& net, const BeliefMatrix& beliefs,
                      const Matrix& log_ell, BeliefMatrix& out) {
  const std::size_t m = net.size();
  const std::size_t h = beliefs.log_beliefs.cols();
  if (beliefs.log_beliefs.rows() != m || log_ell.rows() != m || log_ell.cols() != h) {
    throw NetworkError(NetworkErrorKind::DimensionMismatch,
                       "belief_step: beliefs and log-likelihood updates must be agents x hypotheses");
  }
  if (out.log_beliefs.rows() != m || out.log_beliefs.cols() != h) out.log_beliefs = Matrix(m, h);
  for (std::size_t i = 0; i < m; ++i) {
    auto dst = out.log_beliefs.row(i);
    const auto ell = log_ell.row(i);
    std::copy(ell.begin(), ell.end(), dst.begin());
    for (const auto& [j, weight] : net.neighbors(i)) {
      const auto src = beliefs.log_beliefs.row(j);
      for (std::size_t k = 0; k < h; ++k) dst[k] += weight * src[k];
    }
  }
  out.t = beliefs.t + 1;
}

BeliefMatrix belief_step(const Network& net, const BeliefMatrix& beliefs,
                         const Matrix& log_ell) {
  BeliefMatrix out;
  belief_step_into(net, beliefs, log_ell, out);
  return out;
}

std::set<std::size_t> distinguishable_set(const AgentModel& agent,
                                          std::span<const GaussianParams> hyp_truths) {
  std::set<std::size_t> out;
  for (std::size_t k = 0; k < hyp_truths.size(); ++k) {
    if (hyp_truths[k] == agent.truth) out.insert(k);
  }
  return out;
}

IdentifiabilityReport check_global_identifiability(
    std::span<const AgentModel> agents,
    const std::vector<std::vector<GaussianParams>>& hyp_truths) {
  if (hyp_truths.size() != agents.size()) {
    throw std::invalid_argument("check_global_identifiability: one parameter row per agent required");
  }
  IdentifiabilityReport report;
  const std::size_t h = agents.empty() ? 0 : hyp_truths.front().size();
  report.holders.resize(h);
  for (std::size_t k = 0; k < h; ++k) report.intersection.insert(k);
  for (std::size_t i = 0; i < agents.size(); ++i) {
    auto set = distinguishable_set(agents[i], hyp_truths[i]);
    for (std::size_t k : set) report.holders[k].push_back(i);
    std::set<std::size_t> kept;
    std::set_intersection(report.intersection.begin(), report.intersection.end(),
                          set.begin(), set.end(), std::inserter(kept, kept.end()));
    report.intersection = std::move(kept);
    report.per_agent.push_back(std::move(set));
  }
  if (agents.empty()) report.intersection.clear();
  report.identifiable = report.intersection.size() == 1;
  return report;
}

}  // namespace nbsl
