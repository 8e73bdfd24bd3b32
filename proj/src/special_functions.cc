#include "nbsl/special_functions.h"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace nbsl {
namespace {

constexpr int kSeriesTerms = 60;
constexpr double kStirlingThreshold = 10.0;

// zeta(k) for k = 2..kSeriesTerms+1, by direct summation plus an
// Euler-Maclaurin tail through the B6 term.
std::array<double, kSeriesTerms + 2> make_zeta_table() {
  std::array<double, kSeriesTerms + 2> zeta{};
  constexpr int n_terms = 50;
  const double n = n_terms;
  for (int k = 2; k < kSeriesTerms + 2; ++k) {
    const double s = k;
    double sum = 0.0;
    for (int j = n_terms - 1; j >= 1; --j) sum += std::pow(j, -s);
    double tail = std::pow(n, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(n, -s) +
                  s * std::pow(n, -s - 1.0) / 12.0 -
                  s * (s + 1.0) * (s + 2.0) * std::pow(n, -s - 3.0) / 720.0 +
                  s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) *
                      std::pow(n, -s - 5.0) / 30240.0;
    zeta[k] = sum + tail;
  }
  return zeta;
}

const std::array<double, kSeriesTerms + 2>& zeta_table() {
  static const auto table = make_zeta_table();
  return table;
}

// ln Γ(1 + e) for |e| <= 0.5 by its Taylor series about 1:
//   -γ e + Σ_{k>=2} (-1)^k ζ(k) e^k / k
double log_gamma_1p(double e) {
  const auto& zeta = zeta_table();
  double sum = 0.0;
  double power = e;
  for (int k = 2; k < kSeriesTerms + 2; ++k) {
    power *= -e;
    const double term = zeta[k] * power / k;
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  // power alternates sign: (-e)^(k-1) * e = (-1)^(k-1) e^k, so subtract.
  return -std::numbers::egamma_v<double> * e - sum;
}

// Σ B_2k / (2k (2k-1) x^(2k-1)), the correction term of Stirling's series.
double stirling_correction(double x) {
  static constexpr std::array<double, 8> coeffs = {
      1.0 / 12.0,        -1.0 / 360.0,      1.0 / 1260.0,
      -1.0 / 1680.0,     1.0 / 1188.0,      -691.0 / 360360.0,
      1.0 / 156.0,       -3617.0 / 122400.0};
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * inv2 + *it;
  return acc * inv;
}

double log_gamma_stirling(double x) {
  return (x - 0.5) * std::log(x) - x + 0.5 * std::log(2.0 * std::numbers::pi) +
         stirling_correction(x);
}

}  // namespace

double log_gamma(double x) {
  if (!(x > 0.0)) {
    throw std::domain_error("log_gamma: argument must be positive, got " +
                            std::to_string(x));
  }
  if (std::isinf(x)) return x;
  if (x < 0.5) return log_gamma_1p(x) - std::log(x);
  if (x <= 1.5) return log_gamma_1p(x - 1.0);
  if (x <= 2.5) return std::log1p(x - 2.0) + log_gamma_1p(x - 2.0);
  if (x >= kStirlingThreshold) return log_gamma_stirling(x);

  // Shift down into (1.5, 2.5] and add back ln of the product.
  double y = x;
  double product = 1.0;
  while (y > 2.5) {
    y -= 1.0;
    product *= y;
  }
  return std::log(product) + std::log1p(y - 2.0) + log_gamma_1p(y - 2.0);
}

double log_gamma_difference(double a, double d) {
  if (!(a > 0.0) || !(d >= 0.0)) {
    throw std::domain_error("log_gamma_difference: need a > 0 and d >= 0");
  }
  if (d == 0.0) return 0.0;
  if (a < kStirlingThreshold) return log_gamma(a + d) - log_gamma(a);
  const double b = a + d;
  return (a - 0.5) * std::log1p(d / a) + d * std::log(b) - d +
         (stirling_correction(b) - stirling_correction(a));
}

}  // namespace nbsl
