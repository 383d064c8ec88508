#include "amod/demand.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace amod {

RateTable::RateTable(std::vector<Matrix> rates, int bin_length)
    : rates_(std::move(rates)), bin_length_(bin_length) {
  if (bin_length_ < 1) throw std::invalid_argument("RateTable: bin_length must be >= 1");
  if (rates_.empty()) throw std::invalid_argument("RateTable: at least one bin required");
  const auto n = rates_.front().rows();
  for (const auto& r : rates_) {
    if (r.rows() != n || r.cols() != n) {
      throw std::invalid_argument("RateTable: every bin must be N x N with a common N");
    }
    if (!r.allFinite() || (r.array() < 0.0).any()) {
      throw std::invalid_argument("RateTable: rates must be finite and nonnegative");
    }
    origin_mass_.push_back(r.rowwise().sum());
  }
}

int RateTable::bin_of(int t) const {
  if (t < 0 || t >= covered_steps()) {
    throw std::out_of_range("RateTable: step " + std::to_string(t) + " outside covered range [0, " +
                            std::to_string(covered_steps()) + ")");
  }
  return t / bin_length_;
}

int RateTable::clamped_bin_of(int t) const {
  if (t < 0) t = 0;
  return std::min(t / bin_length_, bins() - 1);
}

namespace {

// Hormann (1993), "The transformed rejection method for generating Poisson
// random variables", algorithm PTRS.
int poisson_ptrs(double lambda, Rng& rng) {
  const double slam = std::sqrt(lambda);
  const double loglam = std::log(lambda);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  while (true) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<int>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -lambda + k * loglam - std::lgamma(k + 1.0)) {
      return static_cast<int>(k);
    }
  }
}

}  // namespace

int poisson_sample(double lambda, Rng& rng) {
  if (!std::isfinite(lambda) || lambda < 0.0) {
    throw std::invalid_argument("poisson_sample: lambda must be finite and >= 0");
  }
  if (lambda == 0.0) return 0;
  if (lambda >= 10.0) return poisson_ptrs(lambda, rng);
  // Sequential search on the CDF.
  const double u = rng.uniform();
  double p = std::exp(-lambda);
  double cdf = p;
  int k = 0;
  while (u > cdf) {
    ++k;
    p *= lambda / k;
    cdf += p;
    if (p <= 0.0) break;  // numerical tail; u sits in the last ulps
  }
  return k;
}

DemandMatrix sample_demand(const RateTable& table, int t, Rng& rng) {
  const Matrix& rates = table.bin_rates(table.bin_of(t));
  const auto n = rates.rows();
  DemandMatrix d{IntMatrix::Zero(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) d.counts(i, j) = poisson_sample(rates(i, j), rng);
  }
  return d;
}

std::vector<Matrix> estimate_demand(const RateTable& table, int t, int horizon) {
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(std::max(horizon, 0)));
  for (int k = 0; k < horizon; ++k) out.push_back(table.bin_rates(table.clamped_bin_of(t + k)));
  return out;
}

}  // namespace amod
