#include "amod/dirichlet.hpp"

#include <cmath>
#include <stdexcept>

namespace amod {
namespace {

double marsaglia_tsang(double shape, Rng& rng) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

}  // namespace

double log_gamma_sample(double shape, Rng& rng) {
  if (!(shape > 0.0) || !std::isfinite(shape)) {
    throw std::domain_error("gamma sample: shape must be positive and finite");
  }
  if (shape >= 1.0) return std::log(marsaglia_tsang(shape, rng));
  const double g = marsaglia_tsang(shape + 1.0, rng);
  return std::log(g) + std::log(rng.uniform()) / shape;
}

double gamma_sample(double shape, Rng& rng) { return std::exp(log_gamma_sample(shape, rng)); }

Vector dirichlet_sample(const Vector& alpha, Rng& rng) {
  if (alpha.size() == 0) throw std::domain_error("dirichlet_sample: empty concentration vector");
  Vector logs(alpha.size());
  for (Eigen::Index i = 0; i < alpha.size(); ++i) logs(i) = log_gamma_sample(alpha(i), rng);
  const double top = logs.maxCoeff();
  Vector out = (logs.array() - top).exp();
  out /= out.sum();
  return out;
}

Vector dirichlet_mean(const Vector& alpha) {
  if (alpha.size() == 0 || !(alpha.array() > 0.0).all()) {
    throw std::domain_error("dirichlet_mean: concentration parameters must be positive");
  }
  return alpha / alpha.sum();
}

}  // namespace amod
