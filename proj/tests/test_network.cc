#include "doctest.h"

#include <cmath>
#include <numbers>
#include <numeric>

#include "nbsl/network.h"
#include "nbsl/random.h"

using namespace nbsl;

namespace {

NetworkErrorKind error_kind(const Matrix& w) {
  try {
    validate_network(w);
  } catch (const NetworkError& e) {
    return e.kind();
  }
  FAIL("expected NetworkError");
  return NetworkErrorKind::NotSquare;
}

Matrix random_matrix(RandomStream& rng, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.normal(0.0, 3.0);
  return m;
}

// Convex combination of permutation matrices plus a positive identity share.
Matrix random_doubly_stochastic(RandomStream& rng, std::size_t m) {
  Matrix w = Matrix::identity(m);
  for (std::size_t i = 0; i < m; ++i) w(i, i) = 0.4;
  std::vector<std::size_t> perm(m);
  for (int p = 0; p < 3; ++p) {
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = m - 1; i > 0; --i) std::swap(perm[i], perm[rng.uniform_int(0, i)]);
    for (std::size_t i = 0; i < m; ++i) w(i, perm[i]) += 0.2;
  }
  return w;
}

double column_spread(const Matrix& b, std::size_t k) {
  double lo = b(0, k), hi = b(0, k);
  for (std::size_t i = 1; i < b.rows(); ++i) lo = std::min(lo, b(i, k)), hi = std::max(hi, b(i, k));
  return hi - lo;
}

}  // namespace

TEST_CASE("validate_network") {
  CHECK(error_kind(Matrix::identity(3)) == NetworkErrorKind::Disconnected);
  CHECK_NOTHROW(validate_network(Matrix::from_rows({{0.5, 0.5}, {0.5, 0.5}})));
  // Rows sum to one, columns do not.
  CHECK(error_kind(Matrix::from_rows({{0.5, 0.5, 0.0}, {0.5, 0.5, 0.0}, {0.5, 0.0, 0.5}})) ==
        NetworkErrorKind::NotDoublyStochastic);
  CHECK(error_kind(Matrix::from_rows({{0.0, 1.0}, {1.0, 0.0}})) == NetworkErrorKind::ZeroDiagonal);
  CHECK(error_kind(Matrix::from_rows({{1.5, -0.5}, {-0.5, 1.5}})) == NetworkErrorKind::NegativeWeight);
  CHECK(error_kind(Matrix(2, 3, 0.5)) == NetworkErrorKind::NotSquare);
  CHECK(error_kind(Matrix::from_rows({{0.5, 0.5 + 1e-11}, {0.5, 0.5}})) ==
        NetworkErrorKind::NotDoublyStochastic);

  // Two disjoint 2-cycles: doubly stochastic, positive diagonal, disconnected.
  const auto split = Matrix::from_rows({{0.5, 0.5, 0, 0}, {0.5, 0.5, 0, 0}, {0, 0, 0.5, 0.5}, {0, 0, 0.5, 0.5}});
  try {
    validate_network(split);
    FAIL("expected NetworkError");
  } catch (const NetworkError& e) {
    CHECK(e.kind() == NetworkErrorKind::Disconnected);
    CHECK(std::string(e.what()).find("1(c)") != std::string::npos);
  }

  const auto report = assess_network(Matrix::from_rows({{0.5, 0.5, 0.0}, {0.5, 0.5, 0.0}, {0.5, 0.0, 0.5}}));
  CHECK_FALSE(report.doubly_stochastic);
  CHECK(report.stochastic_detail.find("column 0") != std::string::npos);
}

TEST_CASE("directed_cycle") {
  const auto net3 = directed_cycle(3, 0.5);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(net3.weights()(i, i) == 0.5);
    CHECK(net3.weights()(i, (i + 2) % 3) == 0.5);
  }
  CHECK(net3.edge_count() == 6);

  const auto net2 = directed_cycle(2, 0.5);
  CHECK(net2.weights() == Matrix::from_rows({{0.5, 0.5}, {0.5, 0.5}}));

  const auto net30 = directed_cycle(30, 0.5);
  CHECK(net30.size() == 30);
  CHECK(net30.edge_count() == 60);
  CHECK_THROWS(directed_cycle(1, 0.5));
  CHECK_THROWS(directed_cycle(4, 1.0));
}

TEST_CASE("belief_step examples") {
  const auto single = validate_network(Matrix::identity(1));
  auto b = BeliefMatrix::initial(1, 1);
  b.log_beliefs(0, 0) = 1.25;
  const auto next = belief_step(single, b, Matrix(1, 1, -0.5));
  CHECK(next.log_beliefs(0, 0) == 0.75);
  CHECK(next.t == 1);

  const auto pair = directed_cycle(2, 0.5);
  BeliefMatrix two{Matrix::from_rows({{0.0}, {std::log(4.0)}}), 0};
  for (int step = 0; step < 5; ++step) {
    two = belief_step(pair, two, Matrix(2, 1));
    CHECK(two.log_beliefs(0, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(two.log_beliefs(1, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  }

  CHECK_THROWS_AS(belief_step(pair, BeliefMatrix::initial(3, 1), Matrix(3, 1)), NetworkError);
  CHECK_THROWS_AS(belief_step(pair, BeliefMatrix::initial(2, 2), Matrix(2, 1)), NetworkError);
}

TEST_CASE("belief_step equals explicit matrix-power accumulation") {
  RandomStream rng(3);
  for (std::size_t m = 1; m <= 5; ++m) {
    const auto net = m == 1 ? validate_network(Matrix::identity(1)) : validate_network(random_doubly_stochastic(rng, m));
    const std::size_t h = 2;
    const std::size_t T = 50;
    std::vector<Matrix> ells;
    auto b = BeliefMatrix::initial(m, h);
    for (std::size_t t = 0; t < T; ++t) {
      ells.push_back(random_matrix(rng, m, h));
      b = belief_step(net, b, ells.back());
    }
    // ln μ_T = Σ_τ A^{T-τ} ln ℓ_τ
    Matrix expected(m, h);
    Matrix power = Matrix::identity(m);
    for (std::size_t back = 0; back < T; ++back) {
      const Matrix term = power * ells[T - 1 - back];
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t k = 0; k < h; ++k) expected(i, k) += term(i, k);
      power = net.weights() * power;
    }
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t k = 0; k < h; ++k) CHECK(std::abs(b.log_beliefs(i, k) - expected(i, k)) < 1e-10);
  }
}

TEST_CASE("consensus contraction on the directed cycle") {
  RandomStream rng(5);
  for (std::size_t m : {3u, 10u, 30u}) {
    const auto net = directed_cycle(m, 0.5);
    const double rate = second_singular_value(net);
    CHECK(rate == doctest::Approx(std::cos(std::numbers::pi / static_cast<double>(m))).epsilon(1e-6));

    auto b = BeliefMatrix{random_matrix(rng, m, 1), 0};
    const Matrix zero(m, 1);
    auto deviation = [&](const Matrix& x) {
      double mean = 0.0;
      for (std::size_t i = 0; i < m; ++i) mean += x(i, 0);
      mean /= static_cast<double>(m);
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) s += (x(i, 0) - mean) * (x(i, 0) - mean);
      return std::sqrt(s);
    };
    const double d0 = deviation(b.log_beliefs);
    double spread = column_spread(b.log_beliefs, 0);
    for (int t = 1; t <= 200; ++t) {
      b = belief_step(net, b, zero);
      const double s = column_spread(b.log_beliefs, 0);
      CHECK(s <= spread + 1e-12);
      spread = s;
      CHECK(deviation(b.log_beliefs) <= std::pow(rate, t) * d0 * (1.0 + 1e-9) + 1e-12);
    }
  }
}

TEST_CASE("belief_step is permutation equivariant") {
  RandomStream rng(9);
  const std::size_t m = 6;
  const auto w = random_doubly_stochastic(rng, m);
  std::vector<std::size_t> perm{3, 0, 5, 1, 4, 2};
  Matrix pw(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) pw(perm[i], perm[j]) = w(i, j);
  const auto net = validate_network(w);
  const auto pnet = validate_network(pw);

  auto b = BeliefMatrix{random_matrix(rng, m, 2), 0};
  const auto ell = random_matrix(rng, m, 2);
  BeliefMatrix pb{Matrix(m, 2), 0};
  Matrix pell(m, 2);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = 0; k < 2; ++k) pb.log_beliefs(perm[i], k) = b.log_beliefs(i, k), pell(perm[i], k) = ell(i, k);
  const auto out = belief_step(net, b, ell);
  const auto pout = belief_step(pnet, pb, pell);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = 0; k < 2; ++k) CHECK(pout.log_beliefs(perm[i], k) == doctest::Approx(out.log_beliefs(i, k)).epsilon(1e-14));
}

TEST_CASE("doubly stochastic weights preserve column sums") {
  RandomStream rng(12);
  const std::size_t m = 8;
  const auto net = validate_network(random_doubly_stochastic(rng, m));
  auto b = BeliefMatrix::initial(m, 3);
  std::vector<double> total(3, 0.0);
  for (int t = 0; t < 1000; ++t) {
    const auto ell = random_matrix(rng, m, 3);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t k = 0; k < 3; ++k) total[k] += ell(i, k);
    b = belief_step(net, b, ell);
  }
  for (std::size_t k = 0; k < 3; ++k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) sum += b.log_beliefs(i, k);
    CHECK(std::abs(sum - total[k]) < 1e-9);
  }
}

TEST_CASE("distinguishable_set") {
  AgentModel agent{{0.0, 0.5}, {}, {}};
  const std::vector<GaussianParams> ref{{0.0, 0.5}, {0.0, 0.4}};
  CHECK(distinguishable_set(agent, ref) == std::set<std::size_t>{0});
  const std::vector<GaussianParams> same{{0.0, 0.5}, {0.0, 0.5}};
  CHECK(distinguishable_set(agent, same) == std::set<std::size_t>{0, 1});
  const std::vector<GaussianParams> none{{1.0, 0.5}, {0.0, 0.4}};
  CHECK(distinguishable_set(agent, none).empty());
}

TEST_CASE("check_global_identifiability") {
  std::vector<AgentModel> agents(30, AgentModel{{0.0, 0.5}, {}, {}});
  std::vector<std::vector<GaussianParams>> table(30, {{0.0, 0.5}, {0.0, 0.4}});
  auto report = check_global_identifiability(agents, table);
  CHECK(report.identifiable);
  CHECK(report.intersection == std::set<std::size_t>{0});
  CHECK(report.holders[0].size() == 30);
  CHECK(report.holders[1].empty());

  std::vector<std::vector<GaussianParams>> twins(30, {{0.0, 0.5}, {0.0, 0.5}});
  report = check_global_identifiability(agents, twins);
  CHECK_FALSE(report.identifiable);
  CHECK(report.intersection == std::set<std::size_t>{0, 1});

  // Agent 0 tells θ2 apart; agent 1 cannot.
  std::vector<AgentModel> pair(2, AgentModel{{0.0, 0.5}, {}, {}});
  std::vector<std::vector<GaussianParams>> mixed{{{0.0, 0.5}, {0.0, 0.4}}, {{0.0, 0.5}, {0.0, 0.5}}};
  report = check_global_identifiability(pair, mixed);
  CHECK(report.identifiable);
  CHECK(report.per_agent[1] == std::set<std::size_t>{0, 1});
  CHECK(report.holders[1] == std::vector<std::size_t>{1});
}
