#pragma once

namespace nbsl {

/// Natural log of the gamma function for x > 0.
///
/// Relative error is below 1e-12 on [1e-3, 1e6], including the zeros of
/// ln Γ at x = 1 and x = 2. Throws std::domain_error for x <= 0 or NaN.
double log_gamma(double x);

/// ln Γ(a + d) - ln Γ(a) for a > 0, d >= 0.
///
/// For large a the difference is formed from the asymptotic series directly,
/// so it keeps full precision where ln Γ(a) itself is of order a ln a.
double log_gamma_difference(double a, double d);

}  // namespace nbsl
