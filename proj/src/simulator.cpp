#include "amod/simulator.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>
#include <string>

namespace amod {

std::shared_ptr<const GraphOperators> GraphOperators::from_adjacency(const IntMatrix& adjacency) {
  auto ops = std::make_shared<GraphOperators>();
  ops->adjacency = adjacency;
  ops->normalized = to_sparse(normalized_adjacency(adjacency));
  const Matrix with_self =
      adjacency.cast<double>() + Matrix::Identity(adjacency.rows(), adjacency.cols());
  ops->neighbor_sum = to_sparse(with_self);
  return ops;
}

int SystemState::in_transit() const {
  int total = 0;
  for (const auto& [key, count] : arrivals) total += count;
  return total;
}

FeatureCache FeatureCache::build(const Scenario& scenario) {
  FeatureCache cache;
  const auto& net = scenario.network;
  for (int b = 0; b < scenario.rates.bins(); ++b) {
    const Matrix& rates = scenario.rates.bin_rates(b);
    cache.origin_mass.push_back(scenario.rates.origin_mass(b));
    const Matrix margin = net.price_for_bin(b) - net.cost;
    cache.origin_margin.push_back(rates.cwiseProduct(margin).rowwise().sum());
  }
  cache.graph = GraphOperators::from_adjacency(net.adjacency);
  return cache;
}

void validate_action(const Vector& action, int n) {
  if (action.size() != n) {
    throw std::invalid_argument("action has length " + std::to_string(action.size()) + ", expected " +
                                std::to_string(n));
  }
  if (!action.allFinite() || (action.array() < 0.0).any()) {
    throw std::invalid_argument("action entries must be finite and nonnegative");
  }
  if (std::abs(action.sum() - 1.0) > 1e-9) {
    throw std::invalid_argument("action must sum to 1 (got " + std::to_string(action.sum()) + ")");
  }
}

IntVector desired_counts(const Vector& action, const IntVector& idle) {
  const double total = idle.sum();
  IntVector desired(action.size());
  for (Eigen::Index i = 0; i < action.size(); ++i) {
    desired(i) = static_cast<int>(std::floor(action(i) * total));
  }
  // Rounding in a near-1 action entry can never push the sum past the total;
  // clamp anyway so the floor contract holds exactly.
  while (desired.sum() > idle.sum()) {
    Eigen::Index k;
    desired.maxCoeff(&k);
    --desired(k);
  }
  return desired;
}

namespace {

void schedule(SystemState& state, int station, int arrival, int count) {
  assert(arrival > state.t);
  state.arrivals[{arrival, station}] += count;
}

}  // namespace

FlowMatrix match_passengers(SystemState& state, const Scenario& scenario, const IntMatrix& demand) {
  const auto& net = scenario.network;
  const int bin = scenario.rates.clamped_bin_of(state.t);
  const Matrix& price = net.price_for_bin(bin);
  FlowMatrix x = solve_matching(demand, price, net.cost, state.idle);
  const auto n = x.flows.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const int f = x.flows(i, j);
      if (f == 0) continue;
      state.idle(i) -= f;
      // Intra-station trips still occupy the vehicle for one step.
      schedule(state, static_cast<int>(j), state.t + std::max(net.travel_time(i, j), 1), f);
    }
  }
  assert((state.idle.array() >= 0).all());
  state.served_demand += x.total();
  state.profit += matching_profit(x, price, net.cost);
  return x;
}

FlowMatrix apply_rebalance(SystemState& state, const Scenario& scenario, const Vector& action) {
  const auto& net = scenario.network;
  const IntVector desired = desired_counts(action, state.idle);
  FlowMatrix y = solve_rebalancing(state.idle, desired, net.cost);
  const auto n = y.flows.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const int f = y.flows(i, j);
      if (f == 0 || i == j) continue;
      state.idle(i) -= f;
      schedule(state, static_cast<int>(j), state.t + net.travel_time(i, j), f);
    }
  }
  assert((state.idle.array() >= 0).all());
  state.rebalancing_cost += rebalancing_cost(y, net.cost);
  return y;
}

void advance_clock(SystemState& state) {
  ++state.t;
  auto it = state.arrivals.begin();
  while (it != state.arrivals.end() && it->first.first <= state.t) {
    state.idle(it->first.second) += it->second;
    it = state.arrivals.erase(it);
  }
}

Observation observe(const SystemState& state, const Scenario& scenario, const FeatureCache& cache,
                    int horizon) {
  if (horizon <= 0) horizon = scenario.planning_horizon;
  const int n = scenario.n_stations();
  Matrix x = Matrix::Zero(n, feature_width(horizon));
  const Vector idle = state.idle.cast<double>();
  x.col(0) = idle;
  // Projected availability: idle plus arrivals landing by t'.
  x.middleCols(1, horizon).colwise() = idle;
  for (const auto& [key, count] : state.arrivals) {
    const auto [arrival, station] = key;
    const int offset = arrival - state.t;  // >= 1
    if (offset > horizon) break;           // map is ordered by arrival step
    for (int k = offset; k <= horizon; ++k) x(station, k) += count;
  }
  for (int k = 0; k <= horizon; ++k) {
    x.col(horizon + 1 + k) = cache.origin_mass[scenario.rates.clamped_bin_of(state.t + k)];
  }
  x.col(2 * horizon + 2) = cache.origin_margin[scenario.rates.clamped_bin_of(state.t)];
  return {std::move(x), cache.graph};
}

Observation observe(const SystemState& state, const Scenario& scenario) {
  return observe(state, scenario, FeatureCache::build(scenario));
}

Simulator::Simulator(std::shared_ptr<const Scenario> scenario, SimulatorOptions options)
    : scenario_(std::move(scenario)),
      options_(options),
      cache_(FeatureCache::build(*scenario_)),
      horizon_(options.horizon_override > 0 ? options.horizon_override : scenario_->planning_horizon) {}

Observation Simulator::reset(std::uint64_t seed) {
  const int n = scenario_->n_stations();
  if (scenario_->initial_idle.size() != n || scenario_->initial_idle.sum() != scenario_->fleet_size) {
    throw std::invalid_argument("Simulator::reset: scenario is not valid");
  }
  state_ = SystemState{};
  state_.idle = scenario_->initial_idle;
  demand_rng_ = Rng::derive(seed, 0);
  noise_rng_ = Rng::derive(seed, 1);
  demand_ = sample_demand(scenario_->rates, 0, demand_rng_).counts;
  started_ = true;
  return observe();
}

Observation Simulator::observe() const {
  Observation obs = amod::observe(state_, *scenario_, cache_, horizon_);
  if (options_.demand_noise_sigma > 0.0) {
    auto block = obs.node_features.middleCols(horizon_ + 1, horizon_ + 1);
    for (Eigen::Index j = 0; j < block.cols(); ++j)
      for (Eigen::Index i = 0; i < block.rows(); ++i) {
        // exp(sigma z - sigma^2 / 2) has unit mean, so the estimate stays unbiased.
        const double s = options_.demand_noise_sigma;
        block(i, j) *= std::exp(s * noise_rng_.normal() - 0.5 * s * s);
      }
  }
  return obs;
}

void Simulator::advance_time() {
  advance_clock(state_);
  if (state_.t < scenario_->episode_length) {
    demand_ = sample_demand(scenario_->rates, state_.t, demand_rng_).counts;
  } else {
    demand_.setZero();
  }
}

StepOutcome Simulator::step(const Vector& action) {
  if (!started_) throw std::logic_error("Simulator::step before reset");
  if (done()) throw std::logic_error("Simulator::step on a finished episode");
  validate_action(action, scenario_->n_stations());

  StepOutcome out;
  const int served_before = state_.served_demand;
  const Matrix& price =
      scenario_->network.price_for_bin(scenario_->rates.clamped_bin_of(state_.t));

  out.passenger_flow = match_passengers(state_, *scenario_, demand_);
  out.rebalancing_flow = apply_rebalance(state_, *scenario_, action);
  advance_time();

  out.kpis.served_demand = state_.served_demand - served_before;
  out.kpis.profit = matching_profit(out.passenger_flow, price, scenario_->network.cost);
  out.kpis.rebalancing_cost = rebalancing_cost(out.rebalancing_flow, scenario_->network.cost);
  out.reward = out.kpis.profit - out.kpis.rebalancing_cost;
  out.done = done();
  out.observation = observe();
  return out;
}

}  // namespace amod
