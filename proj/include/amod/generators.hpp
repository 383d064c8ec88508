#pragma once

#include <cstdint>
#include <string>

#include "amod/network.hpp"

namespace amod {

enum class ScenarioKind { grid, hotspot, ring, irregular };

ScenarioKind parse_scenario_kind(const std::string& s);
std::string to_string(ScenarioKind kind);

struct GeneratorParams {
  ScenarioKind kind = ScenarioKind::hotspot;
  int rows = 4;       // grid, hotspot
  int cols = 4;       // grid, hotspot
  int stations = 16;  // ring, irregular
  double base_cost = 1.0;   // per hop / travel step
  double base_price = 3.0;  // per hop / travel step
  double demand_per_station = 0.5;  // expected requests per station per step
  int vehicles_per_station = 1;
  int episode_length = 60;
  int bin_length = 15;
  int planning_horizon = 6;
  double time_step_minutes = 1.0;
  std::uint64_t seed = 0;
};

/// Synthetic scenarios.
///  grid       uniform OD rates on a block grid
///  hotspot    commute pattern on a block grid: a quarter of the blocks are
///             residential trip sources, a disjoint quarter are business
///             destinations, the rest carry light background traffic; the
///             rate profile ramps up and down over the episode
///  ring       stations on a cycle with randomly weighted origins
///  irregular  two disjoint clusters of randomly placed stations with
///             nearest-neighbour adjacency and distance-based travel times,
///             hotspot-style demand
/// The fleet starts spread evenly. Output is a pure function of the params.
Scenario generate_scenario(const GeneratorParams& params);

}  // namespace amod
