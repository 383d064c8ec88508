#pragma once

#include <Eigen/SparseCore>
#include <map>
#include <memory>
#include <utility>

#include "amod/demand.hpp"
#include "amod/flow.hpp"
#include "amod/network.hpp"
#include "amod/rng.hpp"

namespace amod {

/// Graph operators shared by every observation of one network.
struct GraphOperators {
  Eigen::SparseMatrix<double> normalized;    // D^-1/2 (A + I) D^-1/2
  Eigen::SparseMatrix<double> neighbor_sum;  // A + I
  IntMatrix adjacency;

  static std::shared_ptr<const GraphOperators> from_adjacency(const IntMatrix& adjacency);
};

/// Node feature matrix plus the network graph.
///
/// Column layout for planning horizon H (width 2H + 3, independent of N):
///   0            current idle vehicles m_i^t
///   1 .. H       projected idle vehicles m_i^t' for t' = t+1 .. t+H
///   H+1 .. 2H+1  expected trip requests from i, sum_j lambda_ij, for t' = t .. t+H
///   2H+2         expected margin from i, sum_j lambda_ij (p_ij - c_ij) at t
struct Observation {
  Matrix node_features;
  std::shared_ptr<const GraphOperators> graph;

  int n_stations() const { return static_cast<int>(node_features.rows()); }
  int n_features() const { return static_cast<int>(node_features.cols()); }
  /// Current idle counts (column 0).
  Vector idle() const { return node_features.col(0); }
};

inline int feature_width(int horizon) { return 2 * horizon + 3; }

struct SystemState {
  int t = 0;
  IntVector idle;
  /// (arrival step, station) -> vehicles in transit.
  std::map<std::pair<int, int>, int> arrivals;
  int served_demand = 0;
  double profit = 0.0;
  double rebalancing_cost = 0.0;

  int in_transit() const;
  int fleet() const { return idle.sum() + in_transit(); }
};

struct StepKpis {
  int served_demand = 0;
  double profit = 0.0;
  double rebalancing_cost = 0.0;
};

struct StepOutcome {
  Observation observation;
  double reward = 0.0;  // profit - rebalancing_cost
  bool done = false;
  StepKpis kpis;
  FlowMatrix passenger_flow;
  FlowMatrix rebalancing_flow;
};

/// Per-bin features precomputed from a scenario so that observations cost
/// O(N H) instead of O(N^2 H).
struct FeatureCache {
  std::vector<Vector> origin_mass;    // per rate bin
  std::vector<Vector> origin_margin;  // per rate bin
  std::shared_ptr<const GraphOperators> graph;

  static FeatureCache build(const Scenario& scenario);
};

/// Throws std::invalid_argument unless `action` has length n, nonnegative
/// entries and sums to 1 within 1e-9.
void validate_action(const Vector& action, int n);

/// m_hat_i = floor(a_i * sum(idle)).
IntVector desired_counts(const Vector& action, const IntVector& idle);

/// Serves demand from idle vehicles (capped per origin), schedules arrivals
/// at t + tau_ij and accumulates served demand and profit.
FlowMatrix match_passengers(SystemState& state, const Scenario& scenario, const IntMatrix& demand);

/// Moves idle vehicles toward floor(a_i * sum(idle)) at minimal cost and
/// schedules their arrivals.
FlowMatrix apply_rebalance(SystemState& state, const Scenario& scenario, const Vector& action);

/// Increments t and lands every ledger entry due at the new step.
void advance_clock(SystemState& state);

/// Builds the node features. `horizon` <= 0 uses the scenario's planning horizon.
Observation observe(const SystemState& state, const Scenario& scenario, const FeatureCache& cache,
                    int horizon = 0);
Observation observe(const SystemState& state, const Scenario& scenario);

struct SimulatorOptions {
  /// Sigma of multiplicative log-normal noise on the demand-estimate
  /// features; 0 gives the exact rates.
  double demand_noise_sigma = 0.0;
  /// Overrides the scenario's planning horizon when > 0.
  int horizon_override = 0;
};

/// One episode of the rebalancing MDP. Each step runs passenger matching,
/// then rebalancing toward the action, then advances the clock and samples
/// the next demand.
class Simulator {
 public:
  explicit Simulator(std::shared_ptr<const Scenario> scenario, SimulatorOptions options = {});

  Observation reset(std::uint64_t seed);
  StepOutcome step(const Vector& action);

  /// Clock advance plus next-step demand sampling.
  void advance_time();

  Observation observe() const;
  const SystemState& state() const { return state_; }
  const IntMatrix& current_demand() const { return demand_; }
  const Scenario& scenario() const { return *scenario_; }
  int horizon() const { return horizon_; }
  bool done() const { return state_.t >= scenario_->episode_length; }

 private:
  std::shared_ptr<const Scenario> scenario_;
  SimulatorOptions options_;
  FeatureCache cache_;
  int horizon_;
  SystemState state_;
  IntMatrix demand_;
  Rng demand_rng_{0};
  mutable Rng noise_rng_{0};
  bool started_ = false;
};

}  // namespace amod
