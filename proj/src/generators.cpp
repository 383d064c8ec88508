#include "amod/generators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "amod/rng.hpp"

namespace amod {

ScenarioKind parse_scenario_kind(const std::string& s) {
  if (s == "grid") return ScenarioKind::grid;
  if (s == "hotspot") return ScenarioKind::hotspot;
  if (s == "ring") return ScenarioKind::ring;
  if (s == "irregular") return ScenarioKind::irregular;
  throw std::invalid_argument("unknown scenario kind '" + s + "'");
}

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::grid: return "grid";
    case ScenarioKind::hotspot: return "hotspot";
    case ScenarioKind::ring: return "ring";
    case ScenarioKind::irregular: return "irregular";
  }
  return "unknown";
}

namespace {

constexpr double kBackgroundWeight = 0.1;

// Ramp of the morning peak, one factor per bin.
double commute_profile(int bin, int bins) {
  if (bins <= 1) return 1.0;
  const double x = static_cast<double>(bin) / (bins - 1);  // 0..1
  return 0.6 + 0.4 * std::sin(3.14159265358979323846 * x);
}

std::vector<int> shuffled(int n, Rng& rng) {
  std::vector<int> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), 0);
  for (int i = n - 1; i > 0; --i) std::swap(v[i], v[rng.below(static_cast<std::uint64_t>(i) + 1)]);
  return v;
}

// Rates lambda_ij proportional to origin_i * dest_j (zero diagonal), scaled
// so the total request rate per step is demand_per_station * N * profile.
std::vector<Matrix> product_rates(const Vector& origin, const Vector& dest, const Matrix& affinity,
                                  const GeneratorParams& p, int n) {
  Matrix base = (origin * dest.transpose()).cwiseProduct(affinity);
  base.diagonal().setZero();
  const double total = base.sum();
  if (total > 0.0) base *= p.demand_per_station * n / total;
  const int bins = (p.episode_length + p.bin_length - 1) / p.bin_length;
  std::vector<Matrix> out;
  for (int b = 0; b < bins; ++b) out.push_back(base * commute_profile(b, bins));
  return out;
}

void commute_weights(int n, Rng& rng, Vector& origin, Vector& dest) {
  origin = Vector::Constant(n, kBackgroundWeight);
  dest = Vector::Constant(n, kBackgroundWeight);
  const int k = std::max(1, n / 4);
  const std::vector<int> order = shuffled(n, rng);
  for (int i = 0; i < k; ++i) origin(order[i]) = 1.0;
  for (int i = k; i < std::min(n, 2 * k); ++i) dest(order[i]) = 1.0;
  if (n == 1) dest(0) = 1.0;
}

IntVector spread_fleet(int fleet, int n) {
  IntVector idle = IntVector::Constant(n, fleet / n);
  for (int i = 0; i < fleet % n; ++i) ++idle(i);
  return idle;
}

TransportNetwork ring_network(int n, double base_cost, double base_price) {
  TransportNetwork net;
  net.n_stations = n;
  net.adjacency = IntMatrix::Zero(n, n);
  net.travel_time = IntMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const int d = std::abs(i - j);
      const int hops = std::min(d, n - d);
      net.travel_time(i, j) = hops;
      net.adjacency(i, j) = hops == 1 ? 1 : 0;
    }
  net.cost = base_cost * net.travel_time.cast<double>();
  net.price = {base_price * net.travel_time.cast<double>()};
  return net;
}

// Two clusters of points, nearest-neighbour adjacency inside each cluster,
// no adjacency across. Travel time is the distance in blocks, rounded up.
TransportNetwork clustered_network(int n, double base_cost, double base_price, Rng& rng, IntVector& cluster) {
  constexpr int kNeighbours = 3;
  constexpr double kBlock = 0.3;
  std::vector<std::array<double, 2>> pts(static_cast<std::size_t>(n));
  cluster = IntVector::Zero(n);
  for (int i = 0; i < n; ++i) {
    cluster(i) = i < (n + 1) / 2 ? 0 : 1;
    pts[i] = {rng.uniform() + 2.5 * cluster(i), rng.uniform()};
  }
  auto dist = [&](int a, int b) { return std::hypot(pts[a][0] - pts[b][0], pts[a][1] - pts[b][1]); };

  TransportNetwork net;
  net.n_stations = n;
  net.adjacency = IntMatrix::Zero(n, n);
  net.travel_time = IntMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    std::vector<int> peers;
    for (int j = 0; j < n; ++j)
      if (j != i && cluster(j) == cluster(i)) peers.push_back(j);
    std::stable_sort(peers.begin(), peers.end(), [&](int a, int b) { return dist(i, a) < dist(i, b); });
    for (std::size_t k = 0; k < peers.size() && k < kNeighbours; ++k) {
      net.adjacency(i, peers[k]) = 1;
      net.adjacency(peers[k], i) = 1;
    }
    for (int j = 0; j < n; ++j) net.travel_time(i, j) = i == j ? 0 : std::max(1, static_cast<int>(std::ceil(dist(i, j) / kBlock)));
  }
  // Join any disconnected pieces within a cluster through their closest pair.
  while (true) {
    IntVector comp = IntVector::Constant(n, -1);
    int comps = 0;
    for (int s = 0; s < n; ++s) {
      if (comp(s) >= 0) continue;
      std::vector<int> stack{s};
      comp(s) = comps;
      while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (int v = 0; v < n; ++v)
          if (net.adjacency(u, v) && comp(v) < 0) comp(v) = comps, stack.push_back(v);
      }
      ++comps;
    }
    int best_a = -1, best_b = -1;
    double best = 1e300;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        if (cluster(a) == cluster(b) && comp(a) != comp(b) && dist(a, b) < best) best = dist(a, b), best_a = a, best_b = b;
    if (best_a < 0) break;
    net.adjacency(best_a, best_b) = net.adjacency(best_b, best_a) = 1;
  }
  net.cost = base_cost * net.travel_time.cast<double>();
  net.price = {base_price * net.travel_time.cast<double>()};
  return net;
}

}  // namespace

Scenario generate_scenario(const GeneratorParams& p) {
  if (p.rows < 1 || p.cols < 1 || p.stations < 1) throw std::invalid_argument("generator: sizes must be positive");
  if (p.episode_length < 1 || p.bin_length < 1 || p.planning_horizon < 1) {
    throw std::invalid_argument("generator: episode_length, bin_length and planning_horizon must be positive");
  }
  if (p.vehicles_per_station < 1 || p.demand_per_station < 0.0) {
    throw std::invalid_argument("generator: need >= 1 vehicle per station and nonnegative demand");
  }
  if (p.base_cost < 0.0 || p.base_price < 0.0) throw std::invalid_argument("generator: negative cost or price");

  Rng rng = Rng::derive(p.seed, static_cast<std::uint64_t>(p.kind));
  Scenario s;
  Vector origin, dest;
  Matrix affinity;
  switch (p.kind) {
    case ScenarioKind::grid:
    case ScenarioKind::hotspot: {
      s.network = build_grid_network(p.rows, p.cols, p.base_cost, p.base_price);
      const int n = s.network.n_stations;
      affinity = Matrix::Ones(n, n);
      if (p.kind == ScenarioKind::grid) {
        origin = dest = Vector::Ones(n);
      } else {
        commute_weights(n, rng, origin, dest);
      }
      break;
    }
    case ScenarioKind::ring: {
      s.network = ring_network(p.stations, p.base_cost, p.base_price);
      const int n = p.stations;
      origin = Vector(n);
      for (int i = 0; i < n; ++i) origin(i) = 0.5 + rng.uniform();
      dest = Vector::Ones(n);
      affinity = Matrix::Ones(n, n);
      break;
    }
    case ScenarioKind::irregular: {
      IntVector cluster;
      s.network = clustered_network(p.stations, p.base_cost, p.base_price, rng, cluster);
      const int n = p.stations;
      commute_weights(n, rng, origin, dest);
      affinity = Matrix(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) affinity(i, j) = cluster(i) == cluster(j) ? 1.0 : kBackgroundWeight;
      break;
    }
  }
  const int n = s.network.n_stations;
  s.name = to_string(p.kind) + "-" + (p.kind == ScenarioKind::grid || p.kind == ScenarioKind::hotspot
                                          ? std::to_string(p.rows) + "x" + std::to_string(p.cols)
                                          : std::to_string(n)) +
           "-s" + std::to_string(p.seed);
  s.rates = RateTable(product_rates(origin, dest, affinity, p, n), p.bin_length);
  s.fleet_size = p.vehicles_per_station * n;
  s.initial_idle = spread_fleet(s.fleet_size, n);
  s.episode_length = p.episode_length;
  s.time_step_minutes = p.time_step_minutes;
  s.planning_horizon = p.planning_horizon;
  const ValidationReport report = validate_scenario(s);
  if (!report.valid()) throw std::logic_error("generator produced an invalid scenario:\n" + report.summary());
  return s;
}

}  // namespace amod
