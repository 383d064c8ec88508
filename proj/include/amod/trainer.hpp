#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "amod/model.hpp"
#include "amod/simulator.hpp"

namespace amod {

struct TrainerConfig {
  double gamma = 0.97;
  double lr = 0.003;
  int episodes = 16000;
  int episode_length = 60;
  double reward_scale = 1.0;
  double entropy_coef = 0.0;
  double value_coef = 0.5;
  std::uint64_t seed = 0;
  /// Evaluate every this many episodes (0 disables) and keep the best.
  int eval_every = 0;
  int eval_episodes = 5;

  void validate() const;
};

struct StepRecord {
  Observation observation;
  Vector action;
  double log_prob = 0.0;
  double reward = 0.0;
  double value = 0.0;
};

struct Trajectory {
  std::vector<StepRecord> steps;

  std::vector<double> rewards() const;
};

/// G_t = r_t + gamma G_{t+1}, computed backwards.
std::vector<double> compute_returns(std::span<const double> rewards, double gamma);

/// Losses recorded on a tape, ready for backward().
struct A2CLoss {
  ad::Var actor;
  ad::Var critic;
  ad::Var total;
  double entropy = 0.0;
  std::vector<double> advantages;
};

/// Actor loss  -sum_t gamma^t log pi(a_t|s_t) A_t - entropy_coef sum_t H_t,
/// critic loss  value_coef sum_t (G_t / reward_scale - V(s_t))^2,
/// with A_t = G_t / reward_scale - V(s_t) held constant in the actor term.
A2CLoss build_a2c_loss(ad::Tape& tape, ActorCritic& model, const Trajectory& traj,
                       const TrainerConfig& config);

struct UpdateReport {
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  double entropy = 0.0;
  double actor_grad_norm = 0.0;
  double critic_grad_norm = 0.0;
};

/// One backward pass over the episode and one Adam step on every parameter.
UpdateReport a2c_update(ActorCritic& model, const Trajectory& traj, const TrainerConfig& config);

struct EpisodeMetrics {
  int episode = 0;
  double reward = 0.0;
  int served_demand = 0;
  double rebalancing_cost = 0.0;
  double profit = 0.0;
  int steps = 0;
  double wall_ms = 0.0;
};

/// Runs one episode with `policy`. Demand follows `demand_seed`; sampled
/// actions draw from `action_rng`.
EpisodeMetrics run_episode(Simulator& sim, Policy& policy, std::uint64_t demand_seed, Rng& action_rng,
                           ActionMode mode, Trajectory* record = nullptr, ActorCritic* critic = nullptr);

struct EvalSummary {
  std::string policy;
  std::string scenario;
  int episodes = 0;
  std::vector<EpisodeMetrics> runs;
  double reward_mean = 0.0, reward_sd = 0.0;
  double served_mean = 0.0, served_sd = 0.0;
  double cost_mean = 0.0, cost_sd = 0.0;
  bool simplex_valid = true;
};

/// Seed of the k-th evaluation episode; identical for every policy.
std::uint64_t eval_demand_seed(std::uint64_t base_seed, int k);

/// Deterministic (mean-action) evaluation over `episodes` seeded demand streams.
EvalSummary evaluate_policy(const std::shared_ptr<const Scenario>& scenario, Policy& policy, int episodes,
                            std::uint64_t base_seed, SimulatorOptions options = {});

struct TrainOptions {
  int start_episode = 0;  // resume point
  std::optional<std::filesystem::path> last_checkpoint;
  std::optional<std::filesystem::path> best_checkpoint;
  /// Called after each episode's update.
  std::function<void(const EpisodeMetrics&, const UpdateReport&)> on_episode;
  SimulatorOptions simulator;
};

struct TrainResult {
  std::vector<EpisodeMetrics> metrics;
  double best_eval_reward = 0.0;
  int best_episode = -1;
};

/// Episode loop: reset, roll out with sampled actions, update. Episode k uses
/// demand and action streams derived from (seed, k), so a resumed run
/// continues exactly where it stopped.
TrainResult train(const std::shared_ptr<const Scenario>& scenario, ActorCritic& model,
                  const TrainerConfig& config, const TrainOptions& options = {});

}  // namespace amod
