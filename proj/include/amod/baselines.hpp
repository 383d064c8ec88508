#pragma once

#include "amod/model.hpp"

namespace amod {

/// Equal distribution: (1/N, ..., 1/N).
Vector ed_policy(const Observation& obs);

/// Keep the current idle distribution (uniform when nothing is idle).
Vector no_rebalance_policy(const Observation& obs);

class EqualDistributionPolicy : public Policy {
 public:
  std::string name() const override { return "ed"; }
  Vector act(const Observation& obs, Rng&, ActionMode) override { return ed_policy(obs); }
};

class NoRebalancePolicy : public Policy {
 public:
  std::string name() const override { return "none"; }
  Vector act(const Observation& obs, Rng&, ActionMode) override { return no_rebalance_policy(obs); }
};

/// Feed-forward actor-critic over the flattened N x F feature matrix: dense
/// layers of 128, 64, 32 and 32 units, then N concentration outputs (actor)
/// or one value (critic). Bound to the station count it was built for.
class MlpActorCritic : public ActorCritic {
 public:
  MlpActorCritic(int n_stations, int n_features, std::uint64_t seed);

  std::string kind() const override { return "mlp"; }
  int n_stations() const { return n_stations_; }
  int n_features() const { return n_features_; }

  ad::Var actor(ad::Tape& tape, const Observation& obs) override;
  ad::Var critic(ad::Tape& tape, const Observation& obs) override;

 private:
  std::vector<DenseLayer> make_stack(const std::string& prefix, int out_width, Rng& rng);
  ad::Var run(ad::Tape& tape, const std::vector<DenseLayer>& stack, const Observation& obs) const;

  int n_stations_;
  int n_features_;
  std::vector<DenseLayer> actor_;
  std::vector<DenseLayer> critic_;
};

}  // namespace amod
