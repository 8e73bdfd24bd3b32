#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nbsl/gaussian_uncertain.h"

namespace nbsl {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);
  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::vector<std::vector<double>> to_rows() const;

  Matrix operator*(const Matrix& rhs) const;
  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

enum class NetworkErrorKind {
  NotSquare,
  NegativeWeight,
  NotDoublyStochastic,
  ZeroDiagonal,
  Disconnected,
  DimensionMismatch,
};

class NetworkError : public std::runtime_error {
 public:
  NetworkError(NetworkErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  NetworkErrorKind kind() const { return kind_; }

 private:
  NetworkErrorKind kind_;
};

inline constexpr double kStochasticTolerance = 1e-12;

/// Outcome of checking a weight matrix against each connectivity condition
/// separately. `detail` strings are empty when the condition holds.
struct NetworkReport {
  bool square = true;
  bool nonnegative = true;
  bool doubly_stochastic = true;  // 1(a)
  bool positive_diagonal = true;  // 1(b)
  bool strongly_connected = true; // 1(c)
  std::string stochastic_detail;
  std::string diagonal_detail;
  std::string connectivity_detail;
  std::string shape_detail;

  bool ok() const {
    return square && nonnegative && doubly_stochastic && positive_diagonal &&
           strongly_connected;
  }
};

NetworkReport assess_network(const Matrix& w);

/// Validated weighted digraph: doubly stochastic, positive diagonal, strongly
/// connected. Row i lists the weights agent i puts on each agent's belief.
class Network {
 public:
  const Matrix& weights() const { return weights_; }
  std::size_t size() const { return weights_.rows(); }
  std::size_t edge_count() const;

  /// Nonzero (column, weight) pairs of row i.
  struct Entry {
    std::size_t col;
    double weight;
  };
  std::span<const Entry> neighbors(std::size_t i) const { return rows_[i]; }

 private:
  friend Network validate_network(const Matrix& w);
  explicit Network(Matrix w);

  Matrix weights_;
  std::vector<std::vector<Entry>> rows_;
};

/// Throws NetworkError naming the first violated condition.
Network validate_network(const Matrix& w);

/// Directed cycle with self-loops: A_ii = self_weight and
/// A_{i,(i-1) mod m} = 1 - self_weight.
Network directed_cycle(std::size_t m, double self_weight = 0.5);

/// Second-largest eigenvalue modulus of the weight matrix (power iteration on
/// the component orthogonal to the uniform vector, using A^T A).
double second_singular_value(const Network& net, int iterations = 2000);

/// Log-beliefs, agent × hypothesis, after `t` steps.
struct BeliefMatrix {
  Matrix log_beliefs;
  std::uint64_t t = 0;

  static BeliefMatrix initial(std::size_t agents, std::size_t hypotheses) {
    return {Matrix(agents, hypotheses, 0.0), 0};
  }
};

/// One synchronous round: new = A · old + log_ell, t + 1.
BeliefMatrix belief_step(const Network& net, const BeliefMatrix& beliefs,
                         const Matrix& log_ell);

/// In-place variant writing into `out` (must not alias `beliefs`).
void belief_step_into(const Network& net, const BeliefMatrix& beliefs,
                      const Matrix& log_ell, BeliefMatrix& out);

/// One agent's ground truth, evidence and measurement stream.
struct AgentModel {
  GaussianParams truth;
  std::vector<EvidenceSummary> evidence;  // one per hypothesis
  ObservationStream stream;
};

/// Indices θ whose configured parameters for this agent equal its truth exactly.
std::set<std::size_t> distinguishable_set(const AgentModel& agent,
                                          std::span<const GaussianParams> hyp_truths);

struct IdentifiabilityReport {
  bool identifiable = false;
  std::set<std::size_t> intersection;
  std::vector<std::set<std::size_t>> per_agent;  // Θ_i* per agent
  /// For each hypothesis, the agents whose Θ_i* contains it.
  std::vector<std::vector<std::size_t>> holders;
};

/// `hyp_truths[i][θ]` are agent i's configured parameters for hypothesis θ.
/// Identifiable iff the intersection of all Θ_i* is a single hypothesis.
IdentifiabilityReport check_global_identifiability(
    std::span<const AgentModel> agents,
    const std::vector<std::vector<GaussianParams>>& hyp_truths);

}  // namespace nbsl
