#pragma once

#include <filesystem>
#include <string>

#include "amod/network.hpp"
#include "vendor_json.hpp"

namespace amod {

/// Scenario <-> JSON. Keys (all required):
///   name, n_stations, adjacency [[0|1]], travel_time [[int]], cost [[float]],
///   price [[float]] or [bins][N][N], rates [bins][N][N], bin_length_steps,
///   fleet_size, initial_idle [int], episode_length, time_step_minutes,
///   planning_horizon.
nlohmann::json scenario_to_json(const Scenario& s);

/// Parses and validates; throws FormatError for missing keys, wrong types or
/// invariant violations. Triangle-inequality repairs are applied silently
/// unless `report` is given.
Scenario scenario_from_json(const nlohmann::json& j, ValidationReport* report = nullptr);

Scenario load_scenario(const std::filesystem::path& path, ValidationReport* report = nullptr);
/// Deterministic serialization: same scenario, same bytes.
std::string dump_scenario(const Scenario& s);
void save_scenario(const Scenario& s, const std::filesystem::path& path);

/// Writes `contents` to a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace amod
