#include "doctest.h"

#include <cmath>
#include <numbers>
#include <vector>

#include "nbsl/gaussian_uncertain.h"
#include "nbsl/random.h"
#include "quadrature_oracle.h"

using namespace nbsl;

namespace {

const GaussGammaParams kPrior = GaussGammaParams::noninformative();

std::vector<double> draws(std::uint64_t seed, std::size_t n, double mu, double lambda) {
  RandomStream rng(seed);
  std::vector<double> out(n);
  for (auto& x : out) x = rng.normal(mu, 1.0 / std::sqrt(lambda));
  return out;
}

double batch_mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double batch_m2(const std::vector<double>& xs) {
  const double m = batch_mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s;
}

}  // namespace

TEST_CASE("push_observation") {
  auto s = push_observation(ObservationStream{}, 3.0);
  CHECK(s.count() == 1);
  CHECK(s.mean() == 3.0);
  CHECK(s.m2() == 0.0);
  s = push_observation(s, 1.0);
  CHECK(s.count() == 2);
  CHECK(s.mean() == 2.0);
  CHECK(s.m2() == 2.0);

  const auto xs = draws(11, 1000, 0.0, 1.0);
  const auto stream = ObservationStream::from_samples(xs);
  CHECK(stream.count() == 1000);
  CHECK(stream.mean() == doctest::Approx(batch_mean(xs)).epsilon(1e-12));
  CHECK(stream.m2() == doctest::Approx(batch_m2(xs)).epsilon(1e-12));
}

TEST_CASE("push_observation stays accurate with a large offset") {
  // Raw sum-of-squares accumulation loses every digit of m2 here.
  auto xs = draws(5, 100000, 0.0, 1.0);
  for (auto& x : xs) x += 1e8;
  const auto stream = ObservationStream::from_samples(xs);
  CHECK(stream.m2() == doctest::Approx(batch_m2(xs)).epsilon(1e-6));
}

TEST_CASE("posterior_params closed form") {
  CHECK(posterior_params(kPrior, EvidenceSummary::empty()) == kPrior);

  const auto p = posterior_params(kPrior, {2, 1.0, 0.0, false});
  CHECK(p.mu == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(p.kappa == 3.0);
  CHECK(p.alpha == 2.0);
  CHECK(p.beta == doctest::Approx(4.0 / 3.0).epsilon(1e-15));

  const auto q = posterior_params(kPrior, {100, 0.0, 2.0, false});
  CHECK(q.kappa == 101.0);
  CHECK(q.alpha == 51.0);
  CHECK(q.beta == doctest::Approx(101.0).epsilon(1e-15));

  CHECK_THROWS_AS(posterior_params(kPrior, EvidenceSummary::exact({0.0, 0.5})), std::invalid_argument);
  CHECK_THROWS_AS(posterior_params({0, 0, 1, 1}, EvidenceSummary::empty()), std::invalid_argument);
}

TEST_CASE("posterior_params batch equals one-sample-at-a-time folding") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto xs = draws(seed, 1 + seed * 7, 0.3 * static_cast<double>(seed), 0.5);
    const auto batch = posterior_params(kPrior, EvidenceSummary::from_samples(xs));
    GaussGammaParams seq = kPrior;
    for (double x : xs) {
      const std::vector<double> one{x};
      seq = posterior_params(seq, EvidenceSummary::from_samples(one));
    }
    CHECK(seq.mu == doctest::Approx(batch.mu).epsilon(1e-10));
    CHECK(seq.kappa == doctest::Approx(batch.kappa).epsilon(1e-10));
    CHECK(seq.alpha == doctest::Approx(batch.alpha).epsilon(1e-10));
    CHECK(seq.beta == doctest::Approx(batch.beta).epsilon(1e-10));
  }
}

TEST_CASE("log_prior_predictive") {
  CHECK(log_prior_predictive(kPrior, EvidenceSummary::empty()) == 0.0);
  // One point at 0 under (0,1,1,1): Student-t with 2 dof, scale^2 = 2, density 1/4.
  CHECK(log_prior_predictive(kPrior, {1, 0.0, 0.0, false}) ==
        doctest::Approx(std::log(0.25)).epsilon(1e-14));
  // Two points at 1; frozen from the quadrature oracle.
  CHECK(log_prior_predictive(kPrior, {2, 1.0, 0.0, false}) ==
        doctest::Approx(-2.962547355647).epsilon(1e-11));
  CHECK(log_prior_predictive(kPrior, {2, 1.0, 0.0, false}) ==
        doctest::Approx(oracle::log_marginal({1.0, 1.0}, kPrior)).epsilon(1e-9));
}

TEST_CASE("log_predictive") {
  CHECK(log_predictive(kPrior, ObservationStream{}) == 0.0);
  CHECK(log_predictive(kPrior, ObservationStream(1, 0.0, 0.0)) ==
        doctest::Approx(std::log(0.25)).epsilon(1e-14));
  // {0, 0.5, 1} has mean 0.5 and m2 0.5; frozen from the oracle.
  CHECK(log_predictive(kPrior, ObservationStream(3, 0.5, 0.5)) ==
        doctest::Approx(-3.903940441936).epsilon(1e-11));
}

TEST_CASE("predictives match the quadrature oracle for small data sets") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    for (std::size_t r = 0; r <= 4; r += 2) {
      for (std::size_t t = 1; t <= 4; t += 3) {
        const auto ev_x = draws(100 + seed, r, 1.0, 0.5);
        const auto obs_x = draws(200 + seed, t, 0.0, 0.5);
        auto joint = ev_x;
        joint.insert(joint.end(), obs_x.begin(), obs_x.end());
        const auto ev = EvidenceSummary::from_samples(ev_x);
        const double want = oracle::log_marginal(joint, kPrior) -
                            (r > 0 ? oracle::log_marginal(ev_x, kPrior) : 0.0);
        const double got =
            log_predictive(posterior_params(kPrior, ev), ObservationStream::from_samples(obs_x));
        CHECK(std::abs(got - want) < 1e-6);
        if (r > 0) {
          CHECK(std::abs(log_prior_predictive(kPrior, ev) - oracle::log_marginal(ev_x, kPrior)) < 1e-6);
        }
      }
    }
  }
}

TEST_CASE("log_ulr edge cases") {
  const auto obs = ObservationStream::from_samples(draws(3, 10, 0.0, 0.5));
  CHECK(log_ulr(EvidenceSummary::empty(), obs) == 0.0);
  CHECK(log_ulr({5, 0.2, 1.5, false}, ObservationStream{}) == 0.0);
  CHECK(log_ulr(EvidenceSummary::exact({0.0, 0.5}), ObservationStream{}) == 0.0);
}

TEST_CASE("log_ulr equals the sum of log_ell_step (recursion identity)") {
  // Stream with mean 0.1 and m2 6 over 4 points: 0.1 + {-√3, √3, 0, 0}.
  const double a = std::sqrt(3.0);
  const std::vector<double> xs{0.1 - a, 0.1 + a, 0.1, 0.1};
  const auto full = ObservationStream::from_samples(xs);
  CHECK(full.mean() == doctest::Approx(0.1));
  CHECK(full.m2() == doctest::Approx(6.0));
  const EvidenceSummary ev{2, 0.0, 2.0, false};
  ObservationStream s;
  double total = 0.0;
  for (double x : xs) {
    total += log_ell_step(ev, s, x);
    s.push(x);
  }
  CHECK(std::abs(total - log_ulr(ev, full)) < 1e-9);

  // Random evidence/sequence pairs, including dogmatic evidence.
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    RandomStream rng(seed);
    const std::size_t r = rng.uniform_int(0, 50);
    const std::size_t t = rng.uniform_int(1, 200);
    const auto ev_x = draws(seed * 31 + 1, r, rng.normal(0, 1), 0.2 + rng.uniform());
    const auto obs_x = draws(seed * 31 + 2, t, rng.normal(0, 1), 0.2 + rng.uniform());
    for (const auto& e : {EvidenceSummary::from_samples(ev_x), EvidenceSummary::exact({0.3, 0.7})}) {
      ObservationStream st;
      double sum = 0.0;
      for (double x : obs_x) {
        sum += log_ell_step(e, st, x);
        st.push(x);
      }
      CHECK(std::abs(sum - log_ulr(e, st)) < 1e-9);
    }
  }
}

TEST_CASE("log_ell_step") {
  const auto before = ObservationStream::from_samples(draws(9, 25, 0.0, 0.5));
  CHECK(log_ell_step(EvidenceSummary::empty(), before, 3.7) == 0.0);
  CHECK(log_ell_step(EvidenceSummary::empty(), ObservationStream{}, -1.0) == 0.0);

  // ln P̂(0 | r = {0}) - ln P̂(0 | ∅), both from the oracle.
  const double want = oracle::log_marginal({0.0, 0.0}, kPrior) -
                      2.0 * oracle::log_marginal({0.0}, kPrior);
  const double got = log_ell_step({1, 0.0, 0.0, false}, ObservationStream{}, 0.0);
  CHECK(got == doctest::Approx(want).epsilon(1e-9));
  CHECK(got == doctest::Approx(0.385405511496).epsilon(1e-10));
}

TEST_CASE("dogmatic log_ell_step approaches the Gaussian log-ratio as t grows") {
  const GaussianParams truth{0.0, 0.5};
  const auto ev = EvidenceSummary::exact(truth);
  double previous = 1e300;
  for (std::size_t t : {100u, 1000u, 10000u}) {
    const auto xs = draws(77, t, truth.mu, truth.lambda);
    const auto s = ObservationStream::from_samples(xs);
    const double step = log_ell_step(ev, s, 0.0);
    const GaussianParams fitted{s.mean(), static_cast<double>(t) / s.m2()};
    const double plug_in = log_normal_density(0.0, truth) - log_normal_density(0.0, fitted);
    CHECK(std::abs(step - plug_in) < 5.0 / static_cast<double>(t));
    CHECK(std::abs(step) < previous);
    previous = std::abs(step);
  }
  CHECK(previous < 0.01);
}

TEST_CASE("large-sample evidence reproduces the dogmatic limit") {
  const GaussianParams hyp{0.0, 0.4};
  const auto s = ObservationStream::from_samples(draws(4, 500, 0.0, 0.5));
  for (double x : {-3.0, 0.0, 0.7, 4.0}) {
    const double exact = log_ell_step(EvidenceSummary::exact(hyp), s, x);
    const double large = log_ell_step(EvidenceSummary::large_sample(hyp), s, x);
    CHECK(large == doctest::Approx(exact).epsilon(1e-5));
  }
}

TEST_CASE("log_ell_step is finite for extreme observations") {
  const auto s = ObservationStream::from_samples(draws(8, 50, 0.0, 0.5));
  for (const auto& ev : {EvidenceSummary{1, 0.0, 0.0, false}, EvidenceSummary{1000, 5.0, 0.1, false},
                         EvidenceSummary::exact({0.0, 0.4}), EvidenceSummary::large_sample({0.0, 0.4})}) {
    for (double x : {-1e6, -1e3, 0.0, 1e3, 1e6}) {
      CHECK(std::isfinite(log_ell_step(ev, s, x)));
      CHECK(std::isfinite(log_ell_step(ev, ObservationStream{}, x)));
    }
  }
}

TEST_CASE("log_ell_step vanishes for finite evidence") {
  const GaussianParams truth{0.0, 0.5};
  const auto ev = EvidenceSummary::from_samples(draws(21, 100, 0.0, 0.4));
  RandomStream rng(22);
  ObservationStream s;
  double sum_abs = 0.0;
  const std::size_t T = 10000;
  for (std::size_t t = 1; t <= 2 * T; ++t) {
    const double x = rng.normal(truth.mu, std::sqrt(truth.variance()));
    if (t > T) sum_abs += std::abs(log_ell_step(ev, s, x));
    s.push(x);
  }
  CHECK(sum_abs / static_cast<double>(T) < 1e-2);
}

TEST_CASE("dogmatic mismatch drifts at minus the KL divergence") {
  const GaussianParams truth{0.0, 0.5};
  const auto ev = EvidenceSummary::exact({0.0, 0.4});
  RandomStream rng(2024);
  ObservationStream s;
  double sum = 0.0;
  const std::size_t n = 100000;
  for (std::size_t t = 0; t < n; ++t) {
    const double x = rng.normal(truth.mu, std::sqrt(truth.variance()));
    sum += log_ell_step(ev, s, x);
    s.push(x);
  }
  const double kl = kl_gaussian(truth, {0.0, 0.4});
  CHECK(std::abs(sum / n + kl) < 0.1 * kl);
}

TEST_CASE("log_ulr sign with large evidence") {
  const GaussianParams truth{0.0, 0.5};
  const auto obs = ObservationStream::from_samples(draws(31, 10000, truth.mu, truth.lambda));
  const auto matched = EvidenceSummary::from_samples(draws(32, 10000, 0.0, 0.5));
  const auto mismatched = EvidenceSummary::from_samples(draws(33, 10000, 0.0, 0.4));
  CHECK(log_ulr(matched, obs) > 0.0);
  CHECK(log_ulr(mismatched, obs) < 0.0);
}

TEST_CASE("log_asymptotic_ulr") {
  CHECK(log_asymptotic_ulr(EvidenceSummary::empty(), {0.0, 0.5}) == 0.0);
  const double want = -0.5 * std::log(4.0 * std::numbers::pi) + std::log(4.0);
  CHECK(log_asymptotic_ulr({1, 0.0, 0.0, false}, {0.0, 0.5}) == doctest::Approx(want).epsilon(1e-14));
  CHECK(want == doctest::Approx(0.1208).epsilon(1e-3));
  CHECK_THROWS_AS(log_asymptotic_ulr(EvidenceSummary::exact({0, 1}), {0, 1}), std::invalid_argument);

  const GaussianParams truth{0.0, 0.5};
  const auto ev = EvidenceSummary::from_samples(draws(41, 50, 0.0, 0.5));
  const auto obs = ObservationStream::from_samples(draws(42, 100000, truth.mu, truth.lambda));
  CHECK(std::abs(log_ulr(ev, obs) - log_asymptotic_ulr(ev, truth)) < 0.5);
}

TEST_CASE("kl_gaussian") {
  CHECK(kl_gaussian({0.0, 0.5}, {0.0, 0.5}) == 0.0);
  CHECK(kl_gaussian({0.0, 0.5}, {0.0, 0.4}) == doctest::Approx(0.0115717757).epsilon(1e-9));
  CHECK(kl_gaussian({0.0, 0.5}, {0.0, 0.4}) ==
        doctest::Approx(0.5 * (std::log(1.25) + 0.8 - 1.0)).epsilon(1e-13));
  CHECK(kl_gaussian({0.0, 1.0}, {1.0, 1.0}) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(kl_gaussian({0.3, 2.0}, {0.3, 2.0 + 1e-9}) > 0.0);
}
