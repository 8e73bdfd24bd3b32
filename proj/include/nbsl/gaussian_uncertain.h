#pragma once

// Gaussian uncertain models: Gaussian-gamma conjugate updates, posterior
// predictive densities, and the uncertain likelihood ratio with its one-step
// recursive update. Everything is returned in the log domain.

#include <cstdint>
#include <span>

namespace nbsl {

/// Parameters (mu, kappa, alpha, beta) of a Gaussian-gamma distribution over
/// the mean and precision of a Gaussian.
struct GaussGammaParams {
  double mu = 0.0;
  double kappa = 1.0;
  double alpha = 1.0;
  double beta = 1.0;

  /// The proper noninformative default (0, 1, 1, 1).
  static constexpr GaussGammaParams noninformative() { return {}; }

  bool is_proper() const { return kappa > 0.0 && alpha > 0.0 && beta > 0.0; }
  bool operator==(const GaussGammaParams&) const = default;
};

/// Mean and precision of a Gaussian.
struct GaussianParams {
  double mu = 0.0;
  double lambda = 1.0;

  double variance() const { return 1.0 / lambda; }
  bool operator==(const GaussianParams&) const = default;
};

/// Sufficient statistics of one agent's training samples for one hypothesis.
///
/// `var` is the population variance (mean of squared deviations). A dogmatic
/// summary stands for unbounded evidence; its mean and var are then the exact
/// hypothesis parameters.
struct EvidenceSummary {
  std::uint64_t count = 0;
  double mean = 0.0;
  double var = 0.0;
  bool dogmatic = false;

  static EvidenceSummary empty() { return {}; }
  static EvidenceSummary from_samples(std::span<const double> samples);
  static EvidenceSummary exact(const GaussianParams& params);
  /// A finite stand-in for dogmatic evidence: `count` samples whose mean and
  /// variance equal the hypothesis parameters exactly.
  static EvidenceSummary large_sample(const GaussianParams& params,
                                      std::uint64_t count = 100'000'000);

  GaussianParams as_gaussian() const { return {mean, 1.0 / var}; }
  bool operator==(const EvidenceSummary&) const = default;
};

/// Running count, mean and sum of squared deviations of a measurement stream.
class ObservationStream {
 public:
  ObservationStream() = default;
  ObservationStream(std::uint64_t count, double mean, double m2);

  static ObservationStream from_samples(std::span<const double> samples);

  std::uint64_t count() const { return count_; }
  double mean() const { return mean_; }
  double m2() const { return m2_; }

  /// Returns the stream with `x` appended.
  [[nodiscard]] ObservationStream pushed(double x) const;
  void push(double x);

  bool operator==(const ObservationStream&) const = default;

 private:
  std::uint64_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

inline ObservationStream push_observation(ObservationStream obs, double x) {
  obs.push(x);
  return obs;
}

/// Conjugate update of `prior` with `count` samples of the given mean and sum
/// of squared deviations.
GaussGammaParams condition(const GaussGammaParams& prior, std::uint64_t count,
                           double mean, double m2);

/// Posterior Gaussian-gamma parameters after non-dogmatic evidence.
GaussGammaParams posterior_params(const GaussGammaParams& prior,
                                  const EvidenceSummary& ev);

/// ln of the marginal likelihood of `count` samples (given by mean and m2)
/// under a Gaussian-gamma distribution. Zero for count == 0.
double log_marginal(const GaussGammaParams& params, std::uint64_t count,
                    double mean, double m2);

/// ln P̂(r): marginal likelihood of the evidence under the prior.
double log_prior_predictive(const GaussGammaParams& prior,
                            const EvidenceSummary& ev);

/// ln P̂(Ω_1:t | φ): marginal likelihood of a measurement stream.
double log_predictive(const GaussGammaParams& from, const ObservationStream& obs);

/// ln of the one-point Student-t predictive density at x.
double log_point_predictive(const GaussGammaParams& from, double x);

/// ln N(x | mu, 1/lambda).
double log_normal_density(double x, const GaussianParams& g);

/// ln Π N(x_k | mu, 1/lambda) from the sufficient statistics of the x_k.
double log_normal_likelihood(std::uint64_t count, double mean, double m2,
                             const GaussianParams& g);

/// ln Λ(t), the uncertain likelihood ratio of `obs` given evidence `ev`.
/// Dogmatic evidence uses the exact hypothesis likelihood as numerator.
double log_ulr(const EvidenceSummary& ev, const ObservationStream& obs,
               const GaussGammaParams& prior = GaussGammaParams::noninformative());

/// ln ℓ(ω_{t+1}) = ln Λ(t+1) - ln Λ(t), for a stream holding Ω_1:t.
double log_ell_step(const EvidenceSummary& ev, const ObservationStream& before,
                    double x,
                    const GaussGammaParams& prior = GaussGammaParams::noninformative());

/// ln Ñ: the t → ∞ limit of ln Λ(t) when measurements follow `truth`.
/// Undefined for dogmatic evidence (the limit is ±∞); throws in that case.
double log_asymptotic_ulr(const EvidenceSummary& ev, const GaussianParams& truth,
                          const GaussGammaParams& prior = GaussGammaParams::noninformative());

/// D_KL(N(p) || N(q)).
double kl_gaussian(const GaussianParams& p, const GaussianParams& q);

/// Evidence-dependent part of ln ℓ, precomputed once per (agent, hypothesis)
/// so a simulation step only conditions on the current stream.
class UncertainModel {
 public:
  UncertainModel() = default;
  UncertainModel(const EvidenceSummary& ev, const GaussGammaParams& prior);

  const EvidenceSummary& evidence() const { return evidence_; }
  const GaussGammaParams& posterior() const { return posterior_; }

  /// ln ℓ(x) given Ω_1:t in `before`; `log_ignorance` must be
  /// log_point_predictive(condition(prior, before), x).
  double log_ell(const ObservationStream& before, double x,
                 double log_ignorance) const;

 private:
  EvidenceSummary evidence_;
  GaussGammaParams posterior_;
};

}  // namespace nbsl
