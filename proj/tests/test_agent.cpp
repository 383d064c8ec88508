#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <numeric>

#include "amod/baselines.hpp"
#include "amod/checkpoint.hpp"
#include "amod/generators.hpp"
#include "amod/trainer.hpp"
#include "fd_check.hpp"

using namespace amod;
using amod::testing::gradient_error;

namespace {

Matrix random_features(int n, int f, Rng& rng) {
  Matrix x(n, f);
  for (Eigen::Index k = 0; k < x.size(); ++k) x.data()[k] = 3.0 * rng.uniform();
  return x;
}

IntMatrix random_graph(int n, Rng& rng) {
  IntMatrix a = IntMatrix::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const int j = static_cast<int>(rng.below(i));  // spanning tree
    a(i, j) = a(j, i) = 1;
  }
  for (int k = 0; k < n; ++k) {
    const int i = static_cast<int>(rng.below(n)), j = static_cast<int>(rng.below(n));
    if (i != j) a(i, j) = a(j, i) = 1;
  }
  return a;
}

Observation make_obs(const Matrix& x, const IntMatrix& a) { return {x, GraphOperators::from_adjacency(a)}; }

Trajectory frozen_episode(int n, int f, int steps, Rng& rng) {
  const IntMatrix a = random_graph(n, rng);
  Trajectory traj;
  for (int t = 0; t < steps; ++t) {
    StepRecord r;
    r.observation = make_obs(random_features(n, f, rng), a);
    Vector act(n);
    for (int i = 0; i < n; ++i) act(i) = 0.05 + rng.uniform();
    r.action = act / act.sum();
    r.reward = 10.0 * rng.uniform() - 3.0;
    traj.steps.push_back(r);
  }
  return traj;
}

}  // namespace

TEST(Returns, Discounting) {
  const std::vector<double> r{1.0, 2.0, 3.0};
  const auto g = compute_returns(r, 0.5);
  EXPECT_DOUBLE_EQ(g[2], 3.0);
  EXPECT_DOUBLE_EQ(g[1], 2.0 + 1.5);
  EXPECT_DOUBLE_EQ(g[0], 1.0 + 0.5 * 3.5);
}

TEST(Config, Validation) {
  TrainerConfig c;
  EXPECT_NO_THROW(c.validate());
  c.gamma = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.gamma = 1.0;
  c.lr = -1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Gnn, ShapesAndPositivity) {
  Rng rng(1);
  GnnActorCritic model(feature_width(2), 3);
  const Observation obs = make_obs(random_features(6, 7, rng), random_graph(6, rng));
  const Vector alpha = actor_alpha(model, obs);
  ASSERT_EQ(alpha.size(), 6);
  EXPECT_TRUE((alpha.array() > 0).all());
  EXPECT_TRUE(std::isfinite(critic_value(model, obs)));
  const Observation wrong = make_obs(random_features(6, 5, rng), random_graph(6, rng));
  EXPECT_THROW(actor_alpha(model, wrong), ShapeError);
}

TEST(Gnn, SameParametersAnyNetworkSize) {
  Rng rng(2);
  GnnActorCritic model(5, 9);
  for (int n : {3, 16, 64}) {
    const Observation obs = make_obs(random_features(n, 5, rng), random_graph(n, rng));
    EXPECT_EQ(actor_alpha(model, obs).size(), n);
  }
}

// Relabeling stations permutes concentrations and leaves the value unchanged.
TEST(Symmetry, ActorEquivariantCriticInvariant) {
  Rng rng(3);
  GnnActorCritic model(7, 4);
  const int n = 9;
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix x = random_features(n, 7, rng);
    const IntMatrix a = random_graph(n, rng);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
    Eigen::PermutationMatrix<Eigen::Dynamic> p(n);
    for (int i = 0; i < n; ++i) p.indices()(i) = perm[i];
    const Matrix px = p * x;
    const IntMatrix pa = p * a * p.transpose();
    const Vector alpha = actor_alpha(model, make_obs(x, a));
    const Vector palpha = actor_alpha(model, make_obs(px, pa));
    ASSERT_LT((palpha - p * alpha).cwiseAbs().maxCoeff(), 1e-9);
    ASSERT_NEAR(critic_value(model, make_obs(px, pa)), critic_value(model, make_obs(x, a)), 1e-9);
  }
}

TEST(Gradients, EndToEndActorAndCriticLosses) {
  Rng rng(5);
  GnnActorCritic model(5, 21);
  const Trajectory traj = frozen_episode(5, 5, 3, rng);
  TrainerConfig cfg;
  cfg.reward_scale = 4.0;
  cfg.gamma = 0.9;
  // The actor loss treats advantages as constants, so each loss is checked
  // against its own branch.
  EXPECT_LT(gradient_error(model.parameters("actor."),
                           [&](ad::Tape& t) { return build_a2c_loss(t, model, traj, cfg).actor; }),
            1e-4);
  EXPECT_LT(gradient_error(model.parameters("critic."),
                           [&](ad::Tape& t) { return build_a2c_loss(t, model, traj, cfg).critic; }),
            1e-4);
  cfg.entropy_coef = 0.1;
  EXPECT_LT(gradient_error(model.parameters("actor."),
                           [&](ad::Tape& t) { return build_a2c_loss(t, model, traj, cfg).actor; }),
            1e-4);
}

TEST(Gradients, MlpEndToEnd) {
  Rng rng(6);
  MlpActorCritic model(4, 5, 2);
  const Trajectory traj = frozen_episode(4, 5, 2, rng);
  TrainerConfig cfg;
  EXPECT_LT(gradient_error(model.parameters("actor."),
                           [&](ad::Tape& t) { return build_a2c_loss(t, model, traj, cfg).actor; }),
            1e-4);
  EXPECT_LT(gradient_error(model.parameters("critic."),
                           [&](ad::Tape& t) { return build_a2c_loss(t, model, traj, cfg).critic; }),
            1e-4);
}

TEST(A2C, ZeroAdvantageGivesZeroActorGradient) {
  Rng rng(7);
  GnnActorCritic model(5, 1);
  Trajectory traj = frozen_episode(4, 5, 1, rng);
  TrainerConfig cfg;
  cfg.gamma = 1.0;
  traj.steps[0].reward = critic_value(model, traj.steps[0].observation);  // G = V
  model.zero_grad();
  ad::Tape tape;
  tape.backward(build_a2c_loss(tape, model, traj, cfg).total);
  for (auto* p : model.parameters("actor.")) EXPECT_EQ(p->grad().cwiseAbs().maxCoeff(), 0.0) << p->name();
}

TEST(A2C, PositiveAdvantageRaisesLogProb) {
  Rng rng(8);
  GnnActorCritic model(5, 2);
  Trajectory traj = frozen_episode(4, 5, 1, rng);
  TrainerConfig cfg;
  traj.steps[0].reward = critic_value(model, traj.steps[0].observation) + 50.0;
  const Vector a = traj.steps[0].action;
  const double before = ad::dirichlet_log_density(actor_alpha(model, traj.steps[0].observation), a);
  a2c_update(model, traj, cfg);
  const double after = ad::dirichlet_log_density(actor_alpha(model, traj.steps[0].observation), a);
  EXPECT_GT(after, before);
}

TEST(A2C, CriticFitsFrozenBatch) {
  Rng rng(9);
  GnnActorCritic model(5, 3);
  const Trajectory traj = frozen_episode(4, 5, 4, rng);
  TrainerConfig cfg;
  cfg.reward_scale = 10.0;
  double previous = 1e300;
  for (int k = 0; k < 30; ++k) {
    const UpdateReport r = a2c_update(model, traj, cfg);
    if (k % 10 == 9) {
      EXPECT_LT(r.critic_loss, previous);
      previous = r.critic_loss;
    }
  }
}

TEST(Training, FixedSeedIsReproducible) {
  GeneratorParams p;
  p.rows = p.cols = 3;
  p.episode_length = 20;
  p.bin_length = 10;
  auto sc = std::make_shared<const Scenario>(generate_scenario(p));
  TrainerConfig cfg;
  cfg.episodes = 4;
  cfg.episode_length = 20;
  cfg.seed = 17;
  GnnActorCritic a(feature_width(sc->planning_horizon), 17), b(feature_width(sc->planning_horizon), 17);
  const TrainResult ra = train(sc, a, cfg), rb = train(sc, b, cfg);
  ASSERT_EQ(ra.metrics.size(), 4u);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(ra.metrics[k].reward, rb.metrics[k].reward);
    EXPECT_EQ(ra.metrics[k].served_demand, rb.metrics[k].served_demand);
  }
  for (std::size_t k = 0; k < a.parameters().size(); ++k)
    EXPECT_EQ(a.parameters()[k]->value(), b.parameters()[k]->value());
}

TEST(Training, ResumeMatchesUninterruptedRun) {
  GeneratorParams p;
  p.rows = p.cols = 3;
  p.episode_length = 15;
  p.bin_length = 15;
  auto sc = std::make_shared<const Scenario>(generate_scenario(p));
  const int f = feature_width(sc->planning_horizon);
  TrainerConfig cfg;
  cfg.episode_length = 15;
  cfg.seed = 5;
  cfg.episodes = 6;
  GnnActorCritic full(f, 5);
  const TrainResult whole = train(sc, full, cfg);

  const auto path = std::filesystem::temp_directory_path() / "amod_resume_test.ckpt";
  GnnActorCritic first(f, 5);
  cfg.episodes = 3;
  TrainOptions opts;
  opts.last_checkpoint = path;
  train(sc, first, cfg, opts);
  std::uint64_t done = 0;
  auto resumed = load_checkpoint(path, &done);
  EXPECT_EQ(done, 3u);
  cfg.episodes = 6;
  TrainOptions more;
  more.start_episode = static_cast<int>(done);
  const TrainResult tail = train(sc, *resumed, cfg, more);
  ASSERT_EQ(tail.metrics.size(), 3u);
  for (int k = 0; k < 3; ++k) EXPECT_EQ(tail.metrics[k].reward, whole.metrics[3 + k].reward);
  for (std::size_t k = 0; k < full.parameters().size(); ++k)
    EXPECT_EQ(full.parameters()[k]->value(), resumed->parameters()[k]->value());
  std::filesystem::remove(path);
}

TEST(Policies, ModelPolicyActionsAreOnSimplex) {
  Rng rng(10);
  auto model = std::make_shared<GnnActorCritic>(5, 8);
  ModelPolicy policy(model);
  for (int k = 0; k < 50; ++k) {
    const Observation obs = make_obs(random_features(6, 5, rng), random_graph(6, rng));
    for (ActionMode m : {ActionMode::sample, ActionMode::mean}) {
      const Vector a = policy.act(obs, rng, m);
      EXPECT_NO_THROW(validate_action(a, 6));
    }
  }
}
