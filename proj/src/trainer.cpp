#include "amod/trainer.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "amod/checkpoint.hpp"

namespace amod {

void TrainerConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0, 1]");
  if (!(lr > 0.0)) throw std::invalid_argument("lr must be positive");
  if (episodes < 0) throw std::invalid_argument("episodes must be >= 0");
  if (!(reward_scale > 0.0)) throw std::invalid_argument("reward_scale must be positive");
  if (entropy_coef < 0.0) throw std::invalid_argument("entropy_coef must be >= 0");
  if (eval_every < 0 || eval_episodes < 1) throw std::invalid_argument("invalid evaluation schedule");
}

std::vector<double> Trajectory::rewards() const {
  std::vector<double> r;
  r.reserve(steps.size());
  for (const auto& s : steps) r.push_back(s.reward);
  return r;
}

std::vector<double> compute_returns(std::span<const double> rewards, double gamma) {
  std::vector<double> g(rewards.size());
  double running = 0.0;
  for (std::size_t t = rewards.size(); t-- > 0;) {
    running = rewards[t] + gamma * running;
    g[t] = running;
  }
  return g;
}

A2CLoss build_a2c_loss(ad::Tape& tape, ActorCritic& model, const Trajectory& traj, const TrainerConfig& config) {
  if (traj.steps.empty()) throw std::invalid_argument("a2c: empty trajectory");
  const std::vector<double> returns = compute_returns(traj.rewards(), config.gamma);
  A2CLoss loss;
  loss.actor = tape.constant(Matrix::Zero(1, 1));
  loss.critic = tape.constant(Matrix::Zero(1, 1));
  double discount = 1.0;
  for (std::size_t t = 0; t < traj.steps.size(); ++t) {
    const StepRecord& step = traj.steps[t];
    const ad::Var alpha = model.actor(tape, step.observation);
    const ad::Var log_prob = ad::dirichlet_log_prob(alpha, step.action);
    const ad::Var value = model.critic(tape, step.observation);
    const double target = returns[t] / config.reward_scale;
    const double advantage = target - value.item();
    loss.advantages.push_back(advantage);

    loss.actor = ad::add(loss.actor, ad::scale(log_prob, -discount * advantage));
    if (config.entropy_coef > 0.0) {
      const ad::Var h = ad::dirichlet_entropy(alpha);
      loss.entropy += h.item();
      loss.actor = ad::add(loss.actor, ad::scale(h, -config.entropy_coef));
    }
    const ad::Var diff = ad::sub(tape.constant(Matrix::Constant(1, 1, target)), value);
    loss.critic = ad::add(loss.critic, ad::scale(ad::elementwise_mul(diff, diff), config.value_coef));
    discount *= config.gamma;
  }
  loss.total = ad::add(loss.actor, loss.critic);
  return loss;
}

namespace {

double grad_norm(const std::vector<ad::Parameter*>& params) {
  double s = 0.0;
  for (const auto* p : params) s += p->grad().squaredNorm();
  return std::sqrt(s);
}

}  // namespace

UpdateReport a2c_update(ActorCritic& model, const Trajectory& traj, const TrainerConfig& config) {
  model.zero_grad();
  ad::Tape tape;
  const A2CLoss loss = build_a2c_loss(tape, model, traj, config);
  tape.backward(loss.total);
  UpdateReport report;
  report.actor_loss = loss.actor.item();
  report.critic_loss = loss.critic.item();
  report.entropy = loss.entropy;
  report.actor_grad_norm = grad_norm(model.parameters("actor."));
  report.critic_grad_norm = grad_norm(model.parameters("critic."));
  if (!std::isfinite(report.actor_grad_norm) || !std::isfinite(report.critic_grad_norm)) {
    throw NumericError("a2c_update: non-finite gradient");
  }
  for (ad::Parameter* p : model.parameters()) ad::adam_step(*p, config.lr);
  return report;
}

EpisodeMetrics run_episode(Simulator& sim, Policy& policy, std::uint64_t demand_seed, Rng& action_rng,
                           ActionMode mode, Trajectory* record, ActorCritic* critic) {
  const auto start = std::chrono::steady_clock::now();
  EpisodeMetrics m;
  Observation obs = sim.reset(demand_seed);
  while (!sim.done()) {
    const Vector action = policy.act(obs, action_rng, mode);
    StepOutcome out = sim.step(action);
    m.reward += out.reward;
    m.served_demand += out.kpis.served_demand;
    m.rebalancing_cost += out.kpis.rebalancing_cost;
    m.profit += out.kpis.profit;
    ++m.steps;
    if (record != nullptr) {
      StepRecord r;
      r.value = critic != nullptr ? critic_value(*critic, obs) : 0.0;
      r.observation = std::move(obs);
      r.action = action;
      r.reward = out.reward;
      record->steps.push_back(std::move(r));
    }
    obs = std::move(out.observation);
  }
  m.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return m;
}

std::uint64_t eval_demand_seed(std::uint64_t base_seed, int k) {
  return splitmix64(base_seed ^ 0x5EEDE7A1ULL) + static_cast<std::uint64_t>(k);
}

namespace {

void mean_sd(const std::vector<double>& xs, double& mean, double& sd) {
  mean = 0.0;
  sd = 0.0;
  if (xs.empty()) return;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return;
  for (double x : xs) sd += (x - mean) * (x - mean);
  sd = std::sqrt(sd / static_cast<double>(xs.size() - 1));
}

}  // namespace

EvalSummary evaluate_policy(const std::shared_ptr<const Scenario>& scenario, Policy& policy, int episodes,
                            std::uint64_t base_seed, SimulatorOptions options) {
  if (episodes < 1) throw std::invalid_argument("evaluate_policy: episodes must be >= 1");
  EvalSummary s;
  s.policy = policy.name();
  s.scenario = scenario->name;
  s.episodes = episodes;
  Simulator sim(scenario, options);
  Rng unused(0);
  std::vector<double> rewards, served, costs;
  for (int k = 0; k < episodes; ++k) {
    EpisodeMetrics m = run_episode(sim, policy, eval_demand_seed(base_seed, k), unused, ActionMode::mean);
    m.episode = k;
    rewards.push_back(m.reward);
    served.push_back(m.served_demand);
    costs.push_back(m.rebalancing_cost);
    s.runs.push_back(m);
  }
  mean_sd(rewards, s.reward_mean, s.reward_sd);
  mean_sd(served, s.served_mean, s.served_sd);
  mean_sd(costs, s.cost_mean, s.cost_sd);
  return s;
}

namespace {

// Samples from the actor and records what the update needs.
class SamplingPolicy : public Policy {
 public:
  explicit SamplingPolicy(ActorCritic& model) : model_(model) {}
  std::string name() const override { return model_.kind(); }
  Vector act(const Observation& obs, Rng& rng, ActionMode mode) override {
    ActionChoice c = select_action(actor_alpha(model_, obs), rng, mode);
    last_log_prob = c.log_prob;
    return c.action;
  }
  double last_log_prob = 0.0;

 private:
  ActorCritic& model_;
};

std::shared_ptr<const Scenario> with_episode_length(const std::shared_ptr<const Scenario>& s, int length) {
  if (length <= 0 || length == s->episode_length) return s;
  if (length > s->rates.covered_steps()) {
    throw std::invalid_argument("episode_length " + std::to_string(length) + " exceeds the rate table coverage");
  }
  auto copy = std::make_shared<Scenario>(*s);
  copy->episode_length = length;
  return copy;
}

}  // namespace

TrainResult train(const std::shared_ptr<const Scenario>& base, ActorCritic& model, const TrainerConfig& config,
                  const TrainOptions& options) {
  config.validate();
  const auto scenario = with_episode_length(base, config.episode_length);
  Simulator sim(scenario, options.simulator);
  SamplingPolicy sampler(model);
  ModelPolicy evaluator(std::shared_ptr<ActorCritic>(&model, [](ActorCritic*) {}));
  TrainResult result;
  result.best_eval_reward = -std::numeric_limits<double>::infinity();

  for (int episode = options.start_episode; episode < config.episodes; ++episode) {
    const auto start = std::chrono::steady_clock::now();
    Rng action_rng = Rng::derive(config.seed, 2 * static_cast<std::uint64_t>(episode) + 1);
    const std::uint64_t demand_seed = splitmix64(config.seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(episode));
    Trajectory traj;
    EpisodeMetrics m = run_episode(sim, sampler, demand_seed, action_rng, ActionMode::sample, &traj);
    m.episode = episode;
    const UpdateReport report = a2c_update(model, traj, config);
    m.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    result.metrics.push_back(m);
    if (options.on_episode) options.on_episode(m, report);

    const bool eval_now = config.eval_every > 0 && (episode + 1) % config.eval_every == 0;
    if (eval_now) {
      // Validation streams are disjoint from the default evaluation seeds.
      const EvalSummary s = evaluate_policy(scenario, evaluator, config.eval_episodes,
                                            config.seed ^ 0xA11DA7E5ULL, options.simulator);
      if (s.reward_mean > result.best_eval_reward) {
        result.best_eval_reward = s.reward_mean;
        result.best_episode = episode;
        if (options.best_checkpoint) save_checkpoint(model, *options.best_checkpoint, episode + 1);
      }
      if (options.last_checkpoint) save_checkpoint(model, *options.last_checkpoint, episode + 1);
    }
  }
  const auto done = static_cast<std::uint64_t>(std::max(config.episodes, options.start_episode));
  if (options.last_checkpoint) save_checkpoint(model, *options.last_checkpoint, done);
  if (options.best_checkpoint && result.best_episode < 0) save_checkpoint(model, *options.best_checkpoint, done);
  return result;
}

}  // namespace amod
