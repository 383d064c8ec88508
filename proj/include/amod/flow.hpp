#pragma once

#include "amod/types.hpp"

namespace amod {

enum class FlowRole { passenger, rebalancing };

/// Integer origin-destination vehicle flow.
struct FlowMatrix {
  IntMatrix flows;
  FlowRole role = FlowRole::passenger;

  int total() const { return flows.sum(); }
};

/// Passenger matching. Maximizes sum x_ij (p_ij - c_ij) subject to
/// 0 <= x_ij <= d_ij and sum_j x_ij <= idle_i.
///
/// The availability cap couples only the entries of one row, so the problem
/// splits into one unit-weight knapsack per origin: every served trip uses
/// one vehicle, and filling destinations in order of decreasing margin is
/// optimal (exchange argument). Trips with negative margin are never served,
/// zero-margin trips are. Ties go to the lower destination index.
FlowMatrix solve_matching(const IntMatrix& demand, const Matrix& price, const Matrix& cost,
                          const IntVector& idle);

/// Minimal rebalancing cost. Finds integer y minimizing sum c_ij y_ij with
///   sum_j (y_ji - y_ij) + idle_i >= desired_i   and   sum_j y_ij <= idle_i.
///
/// Under the triangle inequality an optimal plan never routes a vehicle
/// through a station, so each station keeps min(idle, desired) at home and
/// the rest is a transportation problem from surplus stations to deficit
/// stations; surplus left unshipped stays put at zero cost. That problem is
/// solved as min-cost max-flow with the primal-dual method: Dijkstra on
/// reduced costs to update node potentials, then a blocking flow on the
/// zero-reduced-cost subgraph. Costs that break the inequality are accepted;
/// the result is then the cheapest relay-free plan.
///
/// Throws std::invalid_argument when sum(desired) > sum(idle) or shapes
/// disagree.
FlowMatrix solve_rebalancing(const IntVector& idle, const IntVector& desired, const Matrix& cost);

double matching_profit(const FlowMatrix& x, const Matrix& price, const Matrix& cost);
double rebalancing_cost(const FlowMatrix& y, const Matrix& cost);

/// Exhaustive search over every integer x with 0 <= x <= d and per-origin
/// caps. Refuses (std::invalid_argument) when prod(d_ij + 1) > 1e7.
FlowMatrix brute_force_matching(const IntMatrix& demand, const Matrix& price, const Matrix& cost,
                                const IntVector& idle);

/// Exhaustive search over every integer y on all off-diagonal arcs that
/// satisfies the balance and outflow constraints, relays included. Refuses
/// instances with N > 4 or sum(idle) > 6.
FlowMatrix brute_force_rebalancing(const IntVector& idle, const IntVector& desired,
                                   const Matrix& cost);

}  // namespace amod
