#pragma once

#include "amod/rng.hpp"
#include "amod/types.hpp"

namespace amod {

/// log of a Gamma(shape, 1) draw via Marsaglia-Tsang. Shapes below one use
/// the boost G(a) = G(a + 1) * U^(1/a), applied in log space so tiny shapes
/// do not underflow.
double log_gamma_sample(double shape, Rng& rng);

/// Gamma(shape, 1) draw.
double gamma_sample(double shape, Rng& rng);

/// Draw from Dir(alpha): normalized independent Gamma(alpha_i, 1) draws.
/// Throws std::domain_error for nonpositive alpha.
Vector dirichlet_sample(const Vector& alpha, Rng& rng);

/// alpha / sum(alpha).
Vector dirichlet_mean(const Vector& alpha);

}  // namespace amod
