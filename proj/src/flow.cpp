#include "amod/flow.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "amod/network.hpp"

namespace amod {

FlowMatrix solve_matching(const IntMatrix& demand, const Matrix& price, const Matrix& cost,
                          const IntVector& idle) {
  const auto n = demand.rows();
  if (demand.cols() != n || price.rows() != n || price.cols() != n || cost.rows() != n ||
      cost.cols() != n || idle.size() != n) {
    throw std::invalid_argument("solve_matching: shape mismatch");
  }
  FlowMatrix x{IntMatrix::Zero(n, n), FlowRole::passenger};
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    int remaining = idle(i);
    if (remaining <= 0) continue;
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      return price(i, a) - cost(i, a) > price(i, b) - cost(i, b);
    });
    for (const auto j : order) {
      if (remaining == 0 || price(i, j) - cost(i, j) < 0.0) break;
      const int served = std::min(remaining, demand(i, j));
      x.flows(i, j) = served;
      remaining -= served;
    }
  }
  return x;
}

namespace {

// Min-cost max-flow on a small dense graph, primal-dual variant.
class MinCostFlow {
 public:
  explicit MinCostFlow(int nodes) : graph_(static_cast<std::size_t>(nodes)) {}

  int add_edge(int from, int to, int cap, double cost) {
    graph_[from].push_back({to, static_cast<int>(graph_[to].size()), cap, cost});
    graph_[to].push_back({from, static_cast<int>(graph_[from].size()) - 1, 0, -cost});
    return static_cast<int>(graph_[from].size()) - 1;
  }

  int flow_on(int from, int edge_index) const {
    const Edge& e = graph_[from][edge_index];
    return graph_[e.to][e.rev].cap;
  }

  // All edge costs must be nonnegative so that zero potentials are feasible.
  int run(int source, int sink, double tolerance) {
    const auto n = graph_.size();
    potential_.assign(n, 0.0);
    int total = 0;
    std::vector<double> dist(n);
    std::vector<char> done(n);
    constexpr double inf = std::numeric_limits<double>::infinity();
    while (true) {
      // Dense Dijkstra on reduced costs; lowest index wins ties.
      std::fill(dist.begin(), dist.end(), inf);
      std::fill(done.begin(), done.end(), 0);
      dist[source] = 0.0;
      for (std::size_t iter = 0; iter < n; ++iter) {
        std::size_t u = n;
        for (std::size_t v = 0; v < n; ++v)
          if (!done[v] && dist[v] < inf && (u == n || dist[v] < dist[u])) u = v;
        if (u == n) break;
        done[u] = 1;
        for (const Edge& e : graph_[u]) {
          if (e.cap <= 0) continue;
          const double reduced = e.cost + potential_[u] - potential_[e.to];
          const double nd = dist[u] + std::max(reduced, 0.0);
          if (nd < dist[e.to]) dist[e.to] = nd;
        }
      }
      if (dist[sink] == inf) break;
      for (std::size_t v = 0; v < n; ++v) potential_[v] += std::min(dist[v], dist[sink]);
      const int pushed = blocking_flow(source, sink, tolerance);
      if (pushed == 0) break;  // cannot happen with exact arithmetic
      total += pushed;
    }
    return total;
  }

 private:
  struct Edge {
    int to;
    int rev;
    int cap;
    double cost;
  };

  bool admissible(int u, const Edge& e, double tolerance) const {
    return e.cap > 0 && std::abs(e.cost + potential_[u] - potential_[e.to]) <= tolerance;
  }

  int blocking_flow(int source, int sink, double tolerance) {
    const auto n = graph_.size();
    int pushed = 0;
    std::vector<int> level(n);
    std::vector<std::size_t> next(n);
    std::vector<int> queue;
    while (true) {
      std::fill(level.begin(), level.end(), -1);
      level[source] = 0;
      queue.assign(1, source);
      for (std::size_t h = 0; h < queue.size(); ++h) {
        const int u = queue[h];
        for (const Edge& e : graph_[u])
          if (level[e.to] < 0 && admissible(u, e, tolerance)) {
            level[e.to] = level[u] + 1;
            queue.push_back(e.to);
          }
      }
      if (level[sink] < 0) return pushed;
      std::fill(next.begin(), next.end(), 0);
      while (const int f = augment(source, sink, std::numeric_limits<int>::max(), level, next, tolerance))
        pushed += f;
    }
  }

  int augment(int u, int sink, int limit, const std::vector<int>& level, std::vector<std::size_t>& next,
              double tolerance) {
    if (u == sink) return limit;
    for (auto& i = next[u]; i < graph_[u].size(); ++i) {
      Edge& e = graph_[u][i];
      if (level[e.to] != level[u] + 1 || !admissible(u, e, tolerance)) continue;
      const int f = augment(e.to, sink, std::min(limit, e.cap), level, next, tolerance);
      if (f > 0) {
        e.cap -= f;
        graph_[e.to][e.rev].cap += f;
        return f;
      }
    }
    return 0;
  }

  std::vector<std::vector<Edge>> graph_;
  std::vector<double> potential_;
};

}  // namespace

FlowMatrix solve_rebalancing(const IntVector& idle, const IntVector& desired, const Matrix& cost) {
  const auto n = idle.size();
  if (desired.size() != n || cost.rows() != n || cost.cols() != n) {
    throw std::invalid_argument("solve_rebalancing: shape mismatch");
  }
  if ((idle.array() < 0).any() || (desired.array() < 0).any()) {
    throw std::invalid_argument("solve_rebalancing: negative vehicle counts");
  }
  if (desired.sum() > idle.sum()) {
    throw std::invalid_argument("solve_rebalancing: desired vehicles exceed idle vehicles");
  }

  FlowMatrix y{IntMatrix::Zero(n, n), FlowRole::rebalancing};
  std::vector<int> surplus, deficit;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (idle(i) > desired(i)) surplus.push_back(static_cast<int>(i));
    if (idle(i) < desired(i)) deficit.push_back(static_cast<int>(i));
  }
  if (deficit.empty()) return y;

  const int p = static_cast<int>(surplus.size());
  const int q = static_cast<int>(deficit.size());
  const int source = 0, sink = p + q + 1;
  MinCostFlow mcf(p + q + 2);
  double max_cost = 0.0;
  for (int a = 0; a < p; ++a) mcf.add_edge(source, 1 + a, idle(surplus[a]) - desired(surplus[a]), 0.0);
  std::vector<int> cross(static_cast<std::size_t>(p) * q);
  for (int a = 0; a < p; ++a) {
    for (int b = 0; b < q; ++b) {
      const double c = cost(surplus[a], deficit[b]);
      max_cost = std::max(max_cost, c);
      const int cap = std::min(idle(surplus[a]) - desired(surplus[a]),
                               desired(deficit[b]) - idle(deficit[b]));
      cross[static_cast<std::size_t>(a) * q + b] = mcf.add_edge(1 + a, 1 + p + b, cap, c);
    }
  }
  int need = 0;
  for (int b = 0; b < q; ++b) {
    const int gap = desired(deficit[b]) - idle(deficit[b]);
    need += gap;
    mcf.add_edge(1 + p + b, sink, gap, 0.0);
  }
  const int moved = mcf.run(source, sink, 1e-9 * (1.0 + max_cost));
  if (moved != need) throw std::logic_error("solve_rebalancing: flow did not cover all deficits");

  for (int a = 0; a < p; ++a)
    for (int b = 0; b < q; ++b)
      y.flows(surplus[a], deficit[b]) = mcf.flow_on(1 + a, cross[static_cast<std::size_t>(a) * q + b]);
  return y;
}

double matching_profit(const FlowMatrix& x, const Matrix& price, const Matrix& cost) {
  double profit = 0.0;
  for (Eigen::Index i = 0; i < x.flows.rows(); ++i)
    for (Eigen::Index j = 0; j < x.flows.cols(); ++j)
      if (x.flows(i, j) != 0) profit += x.flows(i, j) * (price(i, j) - cost(i, j));
  return profit;
}

double rebalancing_cost(const FlowMatrix& y, const Matrix& cost) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < y.flows.rows(); ++i)
    for (Eigen::Index j = 0; j < y.flows.cols(); ++j)
      if (i != j && y.flows(i, j) != 0) total += y.flows(i, j) * cost(i, j);
  return total;
}

FlowMatrix brute_force_matching(const IntMatrix& demand, const Matrix& price, const Matrix& cost,
                                const IntVector& idle) {
  const auto n = demand.rows();
  if (demand.cols() != n || price.rows() != n || cost.rows() != n || idle.size() != n) {
    throw std::invalid_argument("brute_force_matching: shape mismatch");
  }
  double space = 1.0;
  for (Eigen::Index k = 0; k < demand.size(); ++k) space *= demand.data()[k] + 1.0;
  if (space > 1e7) throw std::invalid_argument("brute_force_matching: instance too large");

  IntMatrix current = IntMatrix::Zero(n, n);
  IntVector left = idle;
  FlowMatrix best{IntMatrix::Zero(n, n), FlowRole::passenger};
  double best_profit = -std::numeric_limits<double>::infinity();
  const Eigen::Index cells = n * n;

  auto search = [&](auto&& self, Eigen::Index cell, double profit) -> void {
    if (cell == cells) {
      if (profit > best_profit) {
        best_profit = profit;
        best.flows = current;
      }
      return;
    }
    const Eigen::Index i = cell / n, j = cell % n;
    const int hi = std::min(demand(i, j), left(i));
    for (int v = 0; v <= hi; ++v) {
      current(i, j) = v;
      left(i) -= v;
      self(self, cell + 1, profit + v * (price(i, j) - cost(i, j)));
      left(i) += v;
    }
    current(i, j) = 0;
  };
  search(search, 0, 0.0);
  return best;
}

FlowMatrix brute_force_rebalancing(const IntVector& idle, const IntVector& desired,
                                   const Matrix& cost) {
  const auto n = idle.size();
  if (desired.size() != n || cost.rows() != n || cost.cols() != n) {
    throw std::invalid_argument("brute_force_rebalancing: shape mismatch");
  }
  if (n > 4 || idle.sum() > 6) throw std::invalid_argument("brute_force_rebalancing: instance too large");

  IntMatrix current = IntMatrix::Zero(n, n);
  IntVector out = IntVector::Zero(n);
  FlowMatrix best{IntMatrix::Zero(n, n), FlowRole::rebalancing};
  double best_cost = std::numeric_limits<double>::infinity();
  bool found = false;

  auto feasible = [&]() {
    for (Eigen::Index i = 0; i < n; ++i) {
      int net = idle(i);
      for (Eigen::Index j = 0; j < n; ++j)
        if (j != i) net += current(j, i) - current(i, j);
      if (net < desired(i)) return false;
    }
    return true;
  };
  auto search = [&](auto&& self, Eigen::Index cell, double total) -> void {
    if (cell == n * n) {
      if (feasible() && total < best_cost) {
        best_cost = total;
        best.flows = current;
        found = true;
      }
      return;
    }
    const Eigen::Index i = cell / n, j = cell % n;
    if (i == j) {
      self(self, cell + 1, total);
      return;
    }
    for (int v = 0; v <= idle(i) - out(i); ++v) {
      current(i, j) = v;
      out(i) += v;
      self(self, cell + 1, total + v * cost(i, j));
      out(i) -= v;
    }
    current(i, j) = 0;
  };
  search(search, 0, 0.0);
  if (!found) throw std::invalid_argument("brute_force_rebalancing: infeasible instance");
  return best;
}

}  // namespace amod
