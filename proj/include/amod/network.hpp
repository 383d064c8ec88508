#pragma once

#include <Eigen/SparseCore>
#include <string>
#include <vector>

#include "amod/demand.hpp"
#include "amod/types.hpp"

namespace amod {

/// Service area: dense trip matrices over the complete station graph plus a
/// sparse neighbourhood adjacency used only for graph convolution.
struct TransportNetwork {
  int n_stations = 0;
  IntMatrix adjacency;    // binary, symmetric, zero diagonal
  IntMatrix travel_time;  // steps; 0 on the diagonal, >= 1 elsewhere
  Matrix cost;            // currency per trip
  std::vector<Matrix> price;  // one matrix per time bin (>= 1)

  /// Price matrix for a rate bin; bins past the last price matrix reuse it.
  const Matrix& price_for_bin(int bin) const;
  int undirected_edge_count() const;
};

struct Scenario {
  std::string name;
  TransportNetwork network;
  RateTable rates;
  int fleet_size = 0;
  IntVector initial_idle;
  int episode_length = 60;
  double time_step_minutes = 1.0;
  int planning_horizon = 6;

  int n_stations() const { return network.n_stations; }
};

/// rows x cols block grid with von Neumann adjacency. Travel time is the
/// Manhattan hop distance; cost and (flat) price scale with it.
TransportNetwork build_grid_network(int rows, int cols, double base_cost, double base_price);

/// D^-1/2 (A + I) D^-1/2 with D the row degrees of A + I.
template <typename Derived>
Matrix normalized_adjacency(const Eigen::MatrixBase<Derived>& adjacency) {
  if (adjacency.rows() != adjacency.cols()) {
    throw ShapeError("normalized_adjacency: matrix must be square");
  }
  const Matrix a_hat = adjacency.template cast<double>() +
                       Matrix::Identity(adjacency.rows(), adjacency.cols());
  if (a_hat != a_hat.transpose()) {
    throw std::invalid_argument("normalized_adjacency: adjacency must be symmetric");
  }
  const Vector inv_sqrt_deg = a_hat.rowwise().sum().array().rsqrt();
  return inv_sqrt_deg.asDiagonal() * a_hat * inv_sqrt_deg.asDiagonal();
}

Eigen::SparseMatrix<double> to_sparse(const Matrix& dense);

struct ValidationIssue {
  enum class Kind { violation, repair };
  Kind kind;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool valid() const;
  std::size_t repairs() const;
  std::size_t violations() const;
  std::string summary() const;
};

/// Checks every scenario invariant. Cost and travel-time matrices are closed
/// under shortest paths in place; each lowered entry is reported as a repair.
ValidationReport validate_scenario(Scenario& scenario);

/// True iff cost(i,j) <= cost(i,k) + cost(k,j) for all triples.
bool satisfies_triangle_inequality(const Matrix& cost);

}  // namespace amod
