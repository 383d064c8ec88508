#pragma once

#include <vector>

#include "amod/rng.hpp"
#include "amod/types.hpp"

namespace amod {

/// Piecewise-constant Poisson rates: one N x N matrix per time bin, each bin
/// spanning `bin_length` simulation steps. Units: expected trips per step.
class RateTable {
 public:
  RateTable() = default;
  RateTable(std::vector<Matrix> rates, int bin_length);

  int bins() const { return static_cast<int>(rates_.size()); }
  int bin_length() const { return bin_length_; }
  int n_stations() const { return rates_.empty() ? 0 : static_cast<int>(rates_.front().rows()); }
  /// Number of steps with an explicit rate bin.
  int covered_steps() const { return bins() * bin_length_; }

  /// Bin index for step t; throws std::out_of_range past coverage.
  int bin_of(int t) const;
  /// Bin index for step t, clamped to the last bin.
  int clamped_bin_of(int t) const;

  const Matrix& bin_rates(int bin) const { return rates_.at(static_cast<std::size_t>(bin)); }
  const std::vector<Matrix>& all_bins() const { return rates_; }

  /// Per-origin expected trip mass sum_j lambda_ij for a bin.
  const Vector& origin_mass(int bin) const { return origin_mass_.at(static_cast<std::size_t>(bin)); }

 private:
  std::vector<Matrix> rates_;
  std::vector<Vector> origin_mass_;
  int bin_length_ = 1;
};

/// Requested trips d_ij for one step.
struct DemandMatrix {
  IntMatrix counts;
};

/// One Poisson(lambda) draw. Inversion below lambda = 10, transformed
/// rejection (Hormann's PTRS) above.
int poisson_sample(double lambda, Rng& rng);

/// Independent Poisson draw for every OD pair at step t, row-major order.
DemandMatrix sample_demand(const RateTable& table, int t, Rng& rng);

/// Rate-based demand estimate for steps t .. t+horizon-1; steps past the
/// table's coverage repeat the last bin.
std::vector<Matrix> estimate_demand(const RateTable& table, int t, int horizon);

}  // namespace amod
