#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "amod/flow.hpp"
#include "amod/generators.hpp"
#include "amod/trainer.hpp"
#include "vendor_json.hpp"

namespace amod {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int failure = 1;  // oracle mismatch or acceptance failure
inline constexpr int usage = 2;
inline constexpr int io = 3;
}  // namespace exit_code

/// Builds a rebalancing policy by name: "gnn", "mlp" (need a checkpoint),
/// "ed", "none".
std::unique_ptr<Policy> make_policy(const std::string& name, const std::optional<std::filesystem::path>& checkpoint);

/// 100 (reward - reference) / |reference|.
double percent_deviation(double reward, double reference);

nlohmann::json summary_to_json(const EvalSummary& s, const std::optional<EvalSummary>& reference = std::nullopt);

std::string metrics_csv_header();
std::string metrics_csv_row(const EpisodeMetrics& m);

// ---- commands -------------------------------------------------------------

struct GenerateCommand {
  GeneratorParams params;
  std::filesystem::path out;
};
int cmd_generate_scenario(const GenerateCommand& c, std::ostream& out, std::ostream& err);

struct TrainCommand {
  std::filesystem::path scenario;
  std::string policy = "gnn";  // gnn | mlp
  TrainerConfig config;
  bool episode_length_from_scenario = true;
  int horizon = 0;  // 0: scenario default
  /// Last checkpoint; the best one goes next to it with ".best" before the extension.
  std::filesystem::path checkpoint = "model.ckpt";
  bool resume = false;
  std::optional<std::filesystem::path> metrics_out;
  bool quiet = false;
};
std::filesystem::path best_checkpoint_path(const std::filesystem::path& last);
int cmd_train(const TrainCommand& c, std::ostream& out, std::ostream& err);

struct EvaluateCommand {
  std::filesystem::path scenario;
  std::string policy = "gnn";
  std::optional<std::filesystem::path> checkpoint;
  int episodes = 10;
  std::uint64_t seed = 0;
  int horizon = 0;
  std::optional<std::string> reference;  // policy name to compare against
  std::optional<std::filesystem::path> out;
};
int cmd_evaluate(const EvaluateCommand& c, std::ostream& out, std::ostream& err);

/// Zero-shot transfer: a trained GNN evaluated on a scenario it never saw.
struct TransferCommand {
  std::filesystem::path checkpoint;
  std::vector<std::filesystem::path> scenarios;
  int episodes = 10;
  std::uint64_t seed = 0;
  std::string reference = "ed";
  std::optional<std::filesystem::path> out;
};
int cmd_transfer(const TransferCommand& c, std::ostream& out, std::ostream& err);

// ---- solver bench ---------------------------------------------------------

using MatchingSolver = std::function<FlowMatrix(const IntMatrix&, const Matrix&, const Matrix&, const IntVector&)>;
using RebalancingSolver = std::function<FlowMatrix(const IntVector&, const IntVector&, const Matrix&)>;

struct BenchConfig {
  int trials = 1000;
  int max_stations = 4;
  int max_demand = 3;
  std::uint64_t seed = 0;
  double tolerance = 1e-9;
  MatchingSolver matching = solve_matching;
  RebalancingSolver rebalancing = solve_rebalancing;
};

struct BenchReport {
  int matching_trials = 0;
  int rebalancing_trials = 0;
  int failures = 0;
  double max_gap = 0.0;
  /// First failing instance, for reproduction.
  std::optional<nlohmann::json> failing_instance;
  bool passed() const { return failures == 0; }
};

/// Random small instances; each solver's objective and feasibility are
/// compared against exhaustive search.
BenchReport bench_solvers(const BenchConfig& config);

struct BenchCommand {
  BenchConfig config;
  /// Replace a solver by a deliberately wrong one: "matching" or "rebalancing".
  std::optional<std::string> inject_fault;
  std::optional<std::filesystem::path> out;
};
int cmd_bench_solvers(const BenchCommand& c, std::ostream& out, std::ostream& err);

// ---- timing ---------------------------------------------------------------

struct TimingRow {
  int n_stations = 0;
  int decisions = 0;
  double median_ms = 0.0;
  double p90_ms = 0.0;
};

/// Wall time of one rebalancing decision (observe, actor forward, desired
/// counts, rebalancing solve) on hotspot grids of the given sizes, with an
/// untrained GNN. Median over `decisions` decisions per size.
std::vector<TimingRow> timing_study(const std::vector<int>& sizes, int decisions, std::uint64_t seed);

struct TimingCommand {
  std::vector<int> sizes{16, 64, 144, 256, 400};
  int decisions = 100;
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> out;
};
int cmd_timing(const TimingCommand& c, std::ostream& out, std::ostream& err);

}  // namespace amod
