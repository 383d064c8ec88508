#include "amod/network.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace amod {

const Matrix& TransportNetwork::price_for_bin(int bin) const {
  if (price.empty()) throw std::logic_error("TransportNetwork: no price matrix");
  const auto idx = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(bin, 0)), 0,
                                           price.size() - 1);
  return price[idx];
}

int TransportNetwork::undirected_edge_count() const {
  int upper = 0;
  for (int i = 0; i < n_stations; ++i)
    for (int j = i + 1; j < n_stations; ++j) upper += adjacency(i, j) != 0 ? 1 : 0;
  return upper;
}

TransportNetwork build_grid_network(int rows, int cols, double base_cost, double base_price) {
  if (rows < 1 || cols < 1) {
    throw std::invalid_argument("build_grid_network: rows and cols must be positive");
  }
  const int n = rows * cols;
  TransportNetwork net;
  net.n_stations = n;
  net.adjacency = IntMatrix::Zero(n, n);
  net.travel_time = IntMatrix::Zero(n, n);
  for (int a = 0; a < n; ++a) {
    const int ra = a / cols, ca = a % cols;
    for (int b = 0; b < n; ++b) {
      const int rb = b / cols, cb = b % cols;
      const int hops = std::abs(ra - rb) + std::abs(ca - cb);
      net.travel_time(a, b) = hops;
      net.adjacency(a, b) = hops == 1 ? 1 : 0;
    }
  }
  const Matrix hops = net.travel_time.cast<double>();
  net.cost = base_cost * hops;
  net.price = {base_price * hops};
  return net;
}

Eigen::SparseMatrix<double> to_sparse(const Matrix& dense) {
  return dense.sparseView();
}

bool ValidationReport::valid() const { return violations() == 0; }

std::size_t ValidationReport::repairs() const {
  return static_cast<std::size_t>(std::count_if(issues.begin(), issues.end(), [](const auto& i) {
    return i.kind == ValidationIssue::Kind::repair;
  }));
}

std::size_t ValidationReport::violations() const { return issues.size() - repairs(); }

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& i : issues) {
    os << (i.kind == ValidationIssue::Kind::repair ? "repair: " : "violation: ") << i.message << '\n';
  }
  return os.str();
}

bool satisfies_triangle_inequality(const Matrix& cost) {
  const auto n = cost.rows();
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (cost(i, k) + cost(k, j) < cost(i, j)) return false;
  return true;
}

namespace {

template <typename M>
std::vector<std::pair<int, int>> shortest_path_closure(M& m) {
  using Scalar = typename M::Scalar;
  const auto n = m.rows();
  M before = m;
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        const Scalar via = m(i, k) + m(k, j);
        if (via < m(i, j)) m(i, j) = via;
      }
  std::vector<std::pair<int, int>> changed;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (m(i, j) != before(i, j)) changed.emplace_back(static_cast<int>(i), static_cast<int>(j));
  return changed;
}

}  // namespace

ValidationReport validate_scenario(Scenario& s) {
  ValidationReport report;
  auto violation = [&](std::string msg) {
    report.issues.push_back({ValidationIssue::Kind::violation, std::move(msg)});
  };
  auto& net = s.network;
  const int n = net.n_stations;
  if (n < 1) {
    violation("n_stations must be positive");
    return report;
  }
  auto square = [n](const auto& m) { return m.rows() == n && m.cols() == n; };
  bool shapes_ok = true;
  if (!square(net.adjacency)) violation("adjacency is not N x N"), shapes_ok = false;
  if (!square(net.travel_time)) violation("travel_time is not N x N"), shapes_ok = false;
  if (!square(net.cost)) violation("cost is not N x N"), shapes_ok = false;
  if (net.price.empty()) violation("price has no bins"), shapes_ok = false;
  for (const auto& p : net.price)
    if (!square(p)) violation("price matrix is not N x N"), shapes_ok = false;
  if (s.rates.n_stations() != n) violation("rate table dimension differs from n_stations"), shapes_ok = false;

  if (shapes_ok) {
    for (int i = 0; i < n; ++i) {
      if (net.adjacency(i, i) != 0) violation("adjacency diagonal nonzero at " + std::to_string(i));
      if (net.travel_time(i, i) != 0) violation("travel_time diagonal nonzero at " + std::to_string(i));
      for (int j = 0; j < n; ++j) {
        const int a = net.adjacency(i, j);
        if (a != 0 && a != 1) violation("adjacency entry not binary at (" + std::to_string(i) + "," + std::to_string(j) + ")");
        if (a != net.adjacency(j, i)) violation("adjacency not symmetric at (" + std::to_string(i) + "," + std::to_string(j) + ")");
        if (i != j && net.travel_time(i, j) < 1) violation("travel_time < 1 off-diagonal at (" + std::to_string(i) + "," + std::to_string(j) + ")");
        if (!std::isfinite(net.cost(i, j)) || net.cost(i, j) < 0.0) violation("cost negative or non-finite at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
    for (const auto& p : net.price)
      if (!p.allFinite() || (p.array() < 0.0).any()) violation("price negative or non-finite");

    if (report.valid()) {
      for (auto [i, j] : shortest_path_closure(net.cost)) {
        report.issues.push_back({ValidationIssue::Kind::repair,
                                 "cost(" + std::to_string(i) + "," + std::to_string(j) +
                                     ") lowered to shortest-path value " + std::to_string(net.cost(i, j))});
      }
      for (auto [i, j] : shortest_path_closure(net.travel_time)) {
        report.issues.push_back({ValidationIssue::Kind::repair,
                                 "travel_time(" + std::to_string(i) + "," + std::to_string(j) +
                                     ") lowered to shortest-path value " + std::to_string(net.travel_time(i, j))});
      }
    }
  }

  if (s.fleet_size < 1) violation("fleet_size must be positive");
  if (s.initial_idle.size() != n) {
    violation("initial_idle length differs from n_stations");
  } else {
    if ((s.initial_idle.array() < 0).any()) violation("initial_idle has negative entries");
    if (s.initial_idle.sum() != s.fleet_size) {
      violation("fleet conservation: initial_idle sums to " + std::to_string(s.initial_idle.sum()) +
                " but fleet_size is " + std::to_string(s.fleet_size));
    }
  }
  if (s.episode_length < 1) violation("episode_length must be >= 1");
  if (s.rates.bins() > 0 && s.rates.covered_steps() < s.episode_length) {
    violation("rate table covers " + std::to_string(s.rates.covered_steps()) +
              " steps, fewer than episode_length " + std::to_string(s.episode_length));
  }
  if (!(s.time_step_minutes > 0.0)) violation("time_step_minutes must be positive");
  if (s.planning_horizon < 1) violation("planning_horizon must be >= 1");
  return report;
}

}  // namespace amod
