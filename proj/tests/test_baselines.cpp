#include <gtest/gtest.h>

#include "amod/baselines.hpp"
#include "amod/generators.hpp"
#include "amod/trainer.hpp"

using namespace amod;

namespace {

Observation random_obs(int n, int f, Rng& rng, bool zero_idle = false) {
  Matrix x(n, f);
  for (Eigen::Index k = 0; k < x.size(); ++k) x.data()[k] = static_cast<double>(rng.below(5));
  if (zero_idle) x.col(0).setZero();
  return {x, GraphOperators::from_adjacency(IntMatrix::Zero(n, n))};
}

}  // namespace

TEST(Baselines, ActionsPassSimplexValidation) {
  Rng rng(1);
  for (int k = 0; k < 10000; ++k) {
    const int n = 1 + static_cast<int>(rng.below(12));
    const Observation obs = random_obs(n, 5, rng, k % 7 == 0);
    ASSERT_NO_THROW(validate_action(ed_policy(obs), n));
    ASSERT_NO_THROW(validate_action(no_rebalance_policy(obs), n));
  }
}

TEST(Baselines, EqualDistribution) {
  Rng rng(2);
  const Vector a = ed_policy(random_obs(4, 5, rng));
  EXPECT_TRUE(a.isApprox(Vector::Constant(4, 0.25)));
}

TEST(Baselines, NoRebalanceKeepsIdleShares) {
  Matrix x = Matrix::Zero(3, 5);
  x.col(0) << 2, 0, 6;
  const Observation obs{x, GraphOperators::from_adjacency(IntMatrix::Zero(3, 3))};
  const Vector a = no_rebalance_policy(obs);
  EXPECT_DOUBLE_EQ(a(0), 0.25);
  EXPECT_DOUBLE_EQ(a(1), 0.0);
  EXPECT_DOUBLE_EQ(a(2), 0.75);
  // Desired counts reproduce the current idle vector: nothing moves.
  IntVector idle(3);
  idle << 2, 0, 6;
  EXPECT_EQ(desired_counts(a, idle), idle);
  x.col(0).setZero();
  const Observation empty{x, obs.graph};
  EXPECT_TRUE(no_rebalance_policy(empty).isApprox(Vector::Constant(3, 1.0 / 3)));
}

TEST(Mlp, RejectsOtherNetworkSizes) {
  Rng rng(3);
  MlpActorCritic model(4, 5, 1);
  EXPECT_EQ(actor_alpha(model, random_obs(4, 5, rng)).size(), 4);
  EXPECT_THROW(actor_alpha(model, random_obs(5, 5, rng)), ShapeError);
  EXPECT_THROW(critic_value(model, random_obs(4, 6, rng)), ShapeError);
}

TEST(Mlp, LayerWidths) {
  MlpActorCritic model(4, 5, 1);
  EXPECT_EQ(model.parameter("actor.fc1.weight").value().rows(), 20);
  EXPECT_EQ(model.parameter("actor.fc1.weight").value().cols(), 128);
  EXPECT_EQ(model.parameter("actor.fc4.weight").value().cols(), 32);
  EXPECT_EQ(model.parameter("actor.head.weight").value().cols(), 4);
  EXPECT_EQ(model.parameter("critic.head.weight").value().cols(), 1);
}

TEST(Evaluation, SharedSeedsAndDeterminism) {
  GeneratorParams p;
  auto sc = std::make_shared<const Scenario>(generate_scenario(p));
  EqualDistributionPolicy ed;
  NoRebalancePolicy none;
  const EvalSummary a = evaluate_policy(sc, ed, 3, 11);
  const EvalSummary b = evaluate_policy(sc, ed, 3, 11);
  EXPECT_EQ(a.reward_mean, b.reward_mean);
  const EvalSummary c = evaluate_policy(sc, none, 3, 11);
  EXPECT_EQ(c.runs.size(), 3u);
  EXPECT_TRUE(a.simplex_valid && c.simplex_valid);
  EXPECT_NE(eval_demand_seed(11, 0), eval_demand_seed(11, 1));
}
