#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "amod/generators.hpp"
#include "amod/network.hpp"

using namespace amod;

namespace {

Scenario tiny() {
  Scenario s;
  s.name = "tiny";
  s.network = build_grid_network(1, 3, 1.0, 2.0);
  Matrix rates = Matrix::Constant(3, 3, 0.2);
  rates.diagonal().setZero();
  s.rates = RateTable({rates}, 10);
  s.fleet_size = 3;
  s.initial_idle = IntVector::Ones(3);
  s.episode_length = 10;
  return s;
}

}  // namespace

TEST(Grid, HopDistances) {
  const TransportNetwork net = build_grid_network(2, 3, 1.5, 4.0);
  ASSERT_EQ(net.n_stations, 6);
  // 0 1 2
  // 3 4 5
  EXPECT_EQ(net.travel_time(0, 5), 3);
  EXPECT_EQ(net.travel_time(1, 4), 1);
  EXPECT_EQ(net.adjacency(0, 1), 1);
  EXPECT_EQ(net.adjacency(0, 4), 0);
  EXPECT_EQ(net.adjacency(2, 2), 0);
  EXPECT_DOUBLE_EQ(net.cost(0, 5), 4.5);
  EXPECT_DOUBLE_EQ(net.price_for_bin(0)(0, 5), 12.0);
  EXPECT_EQ(net.undirected_edge_count(), 7);
  EXPECT_TRUE(satisfies_triangle_inequality(net.cost));
  EXPECT_THROW(build_grid_network(0, 3, 1, 1), std::invalid_argument);
}

TEST(NormalizedAdjacency, SmallPath) {
  Matrix a(3, 3);
  a << 0, 1, 0, 1, 0, 1, 0, 1, 0;
  const Matrix s = normalized_adjacency(a);
  // degrees of A + I: 2, 3, 2
  EXPECT_NEAR(s(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(s(0, 1), 1.0 / std::sqrt(6.0), 1e-15);
  EXPECT_NEAR(s(1, 1), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(s(0, 2), 0.0);
  EXPECT_TRUE(s.isApprox(s.transpose()));
}

TEST(NormalizedAdjacency, RejectsBadInput) {
  EXPECT_THROW(normalized_adjacency(Matrix::Zero(2, 3)), ShapeError);
  Matrix a = Matrix::Zero(2, 2);
  a(0, 1) = 1;
  EXPECT_THROW(normalized_adjacency(a), std::invalid_argument);
}

TEST(NormalizedAdjacency, SpectrumInUnitInterval) {
  const TransportNetwork net = build_grid_network(3, 4, 1, 1);
  const Matrix s = normalized_adjacency(net.adjacency.cast<double>());
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  EXPECT_LE(es.eigenvalues().maxCoeff(), 1.0 + 1e-12);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1.0 - 1e-12);
  EXPECT_NEAR(es.eigenvalues().maxCoeff(), 1.0, 1e-12);
}

TEST(Validation, AcceptsGeneratedScenarios) {
  for (ScenarioKind k : {ScenarioKind::grid, ScenarioKind::hotspot, ScenarioKind::ring, ScenarioKind::irregular}) {
    GeneratorParams p;
    p.kind = k;
    Scenario s = generate_scenario(p);
    const ValidationReport r = validate_scenario(s);
    EXPECT_TRUE(r.valid()) << r.summary();
  }
}

TEST(Validation, FleetConservationViolation) {
  Scenario s = tiny();
  s.initial_idle(0) = 5;
  const ValidationReport r = validate_scenario(s);
  EXPECT_FALSE(r.valid());
  EXPECT_NE(r.summary().find("fleet conservation"), std::string::npos);
}

TEST(Validation, AsymmetricAdjacency) {
  Scenario s = tiny();
  s.network.adjacency(0, 1) = 0;
  EXPECT_FALSE(validate_scenario(s).valid());
}

TEST(Validation, NegativeCostAndShortCoverage) {
  Scenario s = tiny();
  s.network.cost(0, 1) = -1.0;
  EXPECT_FALSE(validate_scenario(s).valid());
  Scenario t = tiny();
  t.episode_length = 11;
  EXPECT_FALSE(validate_scenario(t).valid());
}

TEST(Validation, RepairsTriangleInequality) {
  Scenario s = tiny();
  s.network.cost(0, 2) = 10.0;  // 0->1->2 costs 2
  const ValidationReport r = validate_scenario(s);
  EXPECT_TRUE(r.valid());
  EXPECT_GE(r.repairs(), 1);
  EXPECT_DOUBLE_EQ(s.network.cost(0, 2), 2.0);
  EXPECT_TRUE(satisfies_triangle_inequality(s.network.cost));
}

TEST(Generators, SameSeedSameScenario) {
  GeneratorParams p;
  p.kind = ScenarioKind::irregular;
  p.seed = 11;
  const Scenario a = generate_scenario(p);
  const Scenario b = generate_scenario(p);
  EXPECT_EQ(a.network.adjacency, b.network.adjacency);
  EXPECT_EQ(a.network.travel_time, b.network.travel_time);
  EXPECT_EQ(a.rates.bin_rates(2), b.rates.bin_rates(2));
  p.seed = 12;
  const Scenario c = generate_scenario(p);
  EXPECT_NE(a.network.travel_time, c.network.travel_time);
}

TEST(Generators, IrregularHasTwoDisjointClusters) {
  GeneratorParams p;
  p.kind = ScenarioKind::irregular;
  p.stations = 16;
  const Scenario s = generate_scenario(p);
  for (int i = 0; i < 8; ++i)
    for (int j = 8; j < 16; ++j) EXPECT_EQ(s.network.adjacency(i, j), 0);
  EXPECT_GT(s.network.adjacency.topLeftCorner(8, 8).sum(), 0);
}

TEST(Generators, HotspotTotalRate) {
  GeneratorParams p;
  p.demand_per_station = 0.5;
  const Scenario s = generate_scenario(p);
  double peak = 0;
  for (const Matrix& m : s.rates.all_bins()) peak = std::max(peak, m.sum());
  EXPECT_LE(peak, 0.5 * 16 + 1e-9);
  EXPECT_EQ(s.fleet_size, 16);
  EXPECT_EQ(s.initial_idle.sum(), 16);
}
