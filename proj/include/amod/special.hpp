#pragma once

namespace amod {

// Special functions needed by the Dirichlet density. All require x > 0 and
// throw std::domain_error otherwise. Accurate to ~1e-13 absolute on [0.1, 100].

/// ln Gamma(x), Lanczos approximation (g = 7, 9 terms).
double log_gamma(double x);

/// psi(x) = d/dx ln Gamma(x): upward recurrence to x >= 6, then the
/// asymptotic series.
double digamma(double x);

/// psi'(x), same scheme as digamma.
double trigamma(double x);

}  // namespace amod
