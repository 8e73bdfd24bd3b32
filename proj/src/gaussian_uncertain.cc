#include "nbsl/gaussian_uncertain.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "nbsl/special_functions.h"

namespace nbsl {
namespace {

const double kLogTwoPi = std::log(2.0 * std::numbers::pi);

void require_proper(const GaussGammaParams& p, const char* where) {
  if (!p.is_proper()) {
    throw std::invalid_argument(std::string(where) +
                                ": Gaussian-gamma parameters must have kappa, alpha, beta > 0");
  }
}

void require_finite_evidence(const EvidenceSummary& ev, const char* where) {
  if (ev.dogmatic) {
    throw std::invalid_argument(std::string(where) +
                                ": not defined for dogmatic evidence");
  }
}

}  // namespace

EvidenceSummary EvidenceSummary::from_samples(std::span<const double> samples) {
  const auto stream = ObservationStream::from_samples(samples);
  EvidenceSummary ev;
  ev.count = stream.count();
  if (ev.count > 0) {
    ev.mean = stream.mean();
    ev.var = stream.m2() / static_cast<double>(ev.count);
  }
  return ev;
}

EvidenceSummary EvidenceSummary::exact(const GaussianParams& params) {
  if (!(params.lambda > 0.0)) {
    throw std::invalid_argument("EvidenceSummary::exact: lambda must be positive");
  }
  return {0, params.mu, 1.0 / params.lambda, true};
}

EvidenceSummary EvidenceSummary::large_sample(const GaussianParams& params,
                                              std::uint64_t count) {
  if (!(params.lambda > 0.0)) {
    throw std::invalid_argument("EvidenceSummary::large_sample: lambda must be positive");
  }
  return {count, params.mu, 1.0 / params.lambda, false};
}

ObservationStream::ObservationStream(std::uint64_t count, double mean, double m2)
    : count_(count), mean_(count == 0 ? 0.0 : mean), m2_(count == 0 ? 0.0 : m2) {
  if (m2 < 0.0) throw std::invalid_argument("ObservationStream: m2 must be >= 0");
}

ObservationStream ObservationStream::from_samples(std::span<const double> samples) {
  ObservationStream s;
  for (double x : samples) s.push(x);
  return s;
}

void ObservationStream::push(double x) {
  ++count_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_ += delta * (x - mean_);
}

ObservationStream ObservationStream::pushed(double x) const {
  ObservationStream next = *this;
  next.push(x);
  return next;
}

GaussGammaParams condition(const GaussGammaParams& prior, std::uint64_t count,
                           double mean, double m2) {
  if (count == 0) return prior;
  const double n = static_cast<double>(count);
  const double kappa = prior.kappa + n;
  const double shift = mean - prior.mu;
  GaussGammaParams post;
  post.kappa = kappa;
  post.mu = (prior.kappa * prior.mu + n * mean) / kappa;
  post.alpha = prior.alpha + 0.5 * n;
  post.beta = prior.beta + 0.5 * m2 + 0.5 * prior.kappa * n * shift * shift / kappa;
  return post;
}

GaussGammaParams posterior_params(const GaussGammaParams& prior,
                                  const EvidenceSummary& ev) {
  require_proper(prior, "posterior_params");
  require_finite_evidence(ev, "posterior_params");
  return condition(prior, ev.count, ev.mean, ev.var * static_cast<double>(ev.count));
}

double log_marginal(const GaussGammaParams& p, std::uint64_t count, double mean,
                    double m2) {
  if (count == 0) return 0.0;
  const double n = static_cast<double>(count);
  const double shift = mean - p.mu;
  // Relative growth of beta, (β' - β) / β.
  const double growth =
      (0.5 * m2 + 0.5 * p.kappa * n * shift * shift / (p.kappa + n)) / p.beta;
  const double half_n = 0.5 * n;
  return log_gamma_difference(p.alpha, half_n) - half_n * std::log(p.beta) -
         (p.alpha + half_n) * std::log1p(growth) - 0.5 * std::log1p(n / p.kappa) -
         half_n * kLogTwoPi;
}

double log_prior_predictive(const GaussGammaParams& prior, const EvidenceSummary& ev) {
  require_proper(prior, "log_prior_predictive");
  require_finite_evidence(ev, "log_prior_predictive");
  return log_marginal(prior, ev.count, ev.mean, ev.var * static_cast<double>(ev.count));
}

double log_predictive(const GaussGammaParams& from, const ObservationStream& obs) {
  require_proper(from, "log_predictive");
  return log_marginal(from, obs.count(), obs.mean(), obs.m2());
}

double log_point_predictive(const GaussGammaParams& p, double x) {
  const double shift = x - p.mu;
  const double growth = 0.5 * p.kappa * shift * shift / ((p.kappa + 1.0) * p.beta);
  return log_gamma_difference(p.alpha, 0.5) - 0.5 * std::log(p.beta) -
         (p.alpha + 0.5) * std::log1p(growth) - 0.5 * std::log1p(1.0 / p.kappa) -
         0.5 * kLogTwoPi;
}

double log_normal_density(double x, const GaussianParams& g) {
  const double d = x - g.mu;
  return 0.5 * (std::log(g.lambda) - kLogTwoPi) - 0.5 * g.lambda * d * d;
}

double log_normal_likelihood(std::uint64_t count, double mean, double m2,
                             const GaussianParams& g) {
  if (count == 0) return 0.0;
  const double n = static_cast<double>(count);
  const double d = mean - g.mu;
  return 0.5 * n * (std::log(g.lambda) - kLogTwoPi) - 0.5 * g.lambda * (m2 + n * d * d);
}

double log_ulr(const EvidenceSummary& ev, const ObservationStream& obs,
               const GaussGammaParams& prior) {
  require_proper(prior, "log_ulr");
  if (obs.count() == 0) return 0.0;
  if (ev.dogmatic) {
    return log_normal_likelihood(obs.count(), obs.mean(), obs.m2(), ev.as_gaussian()) -
           log_predictive(prior, obs);
  }
  if (ev.count == 0) return 0.0;
  return log_predictive(posterior_params(prior, ev), obs) - log_predictive(prior, obs);
}

double log_ell_step(const EvidenceSummary& ev, const ObservationStream& before,
                    double x, const GaussGammaParams& prior) {
  require_proper(prior, "log_ell_step");
  const UncertainModel model(ev, prior);
  const auto ignorance = condition(prior, before.count(), before.mean(), before.m2());
  return model.log_ell(before, x, log_point_predictive(ignorance, x));
}

double log_asymptotic_ulr(const EvidenceSummary& ev, const GaussianParams& truth,
                          const GaussGammaParams& prior) {
  require_finite_evidence(ev, "log_asymptotic_ulr");
  if (ev.count == 0) return 0.0;
  const double m2 = ev.var * static_cast<double>(ev.count);
  return log_normal_likelihood(ev.count, ev.mean, m2, truth) -
         log_prior_predictive(prior, ev);
}

double kl_gaussian(const GaussianParams& p, const GaussianParams& q) {
  const double d = p.mu - q.mu;
  const double ratio = q.lambda / p.lambda;
  // ln(λp/λq) + λq/λp - 1 with the cancellation near ratio = 1 removed.
  return 0.5 * ((ratio - 1.0 - std::log1p(ratio - 1.0)) + q.lambda * d * d);
}

UncertainModel::UncertainModel(const EvidenceSummary& ev, const GaussGammaParams& prior)
    : evidence_(ev), posterior_(prior) {
  require_proper(prior, "UncertainModel");
  if (!ev.dogmatic) posterior_ = posterior_params(prior, ev);
}

double UncertainModel::log_ell(const ObservationStream& before, double x,
                               double log_ignorance) const {
  if (evidence_.dogmatic) {
    return log_normal_density(x, evidence_.as_gaussian()) - log_ignorance;
  }
  if (evidence_.count == 0) return 0.0;
  const auto informed = condition(posterior_, before.count(), before.mean(), before.m2());
  return log_point_predictive(informed, x) - log_ignorance;
}

}  // namespace nbsl
