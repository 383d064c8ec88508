#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "amod/autodiff.hpp"
#include "amod/rng.hpp"
#include "amod/simulator.hpp"

namespace amod {

enum class ActionMode { sample, mean };

/// Actor (Dirichlet concentrations per station) and critic (state value)
/// sharing one parameter registry. Actor parameters are prefixed "actor.",
/// critic parameters "critic.".
class ActorCritic {
 public:
  virtual ~ActorCritic() = default;

  virtual std::string kind() const = 0;
  /// Concentration parameters as an N x 1 or 1 x N vector, strictly positive.
  virtual ad::Var actor(ad::Tape& tape, const Observation& obs) = 0;
  /// 1 x 1 value estimate.
  virtual ad::Var critic(ad::Tape& tape, const Observation& obs) = 0;

  std::vector<ad::Parameter*> parameters();
  std::vector<ad::Parameter*> parameters(std::string_view prefix);
  ad::Parameter& parameter(std::string_view name);
  void zero_grad();

 protected:
  ad::Parameter& add_parameter(std::string name, Matrix init);

 private:
  std::vector<std::unique_ptr<ad::Parameter>> params_;
};

/// Fully connected layer x W + b with W: in x out, b: 1 x out.
struct DenseLayer {
  ad::Parameter* weight = nullptr;
  ad::Parameter* bias = nullptr;

  ad::Var operator()(ad::Tape& tape, const ad::Var& x) const;
};

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initializer.
Matrix uniform_init(int rows, int cols, int fan_in, Rng& rng);

/// Graph-convolutional actor-critic.
///
/// Actor: one GCN layer with additive skip projection, neighbour sum-pooling
/// over A + I, three per-node dense layers of 32 units with ReLU, a width-1
/// head, softplus, plus a 1e-6 floor. Critic: the same GCN trunk followed by
/// a global sum over nodes, the same dense stack and a scalar head. Every
/// weight is shared across nodes, so one parameter set serves any N.
class GnnActorCritic : public ActorCritic {
 public:
  static constexpr int kHidden = 32;
  static constexpr double kAlphaFloor = 1e-6;

  GnnActorCritic(int n_features, std::uint64_t seed);

  std::string kind() const override { return "gnn"; }
  int n_features() const { return n_features_; }

  ad::Var actor(ad::Tape& tape, const Observation& obs) override;
  ad::Var critic(ad::Tape& tape, const Observation& obs) override;

 private:
  struct Branch {
    ad::Parameter* gcn_weight;
    ad::Parameter* gcn_skip;
    std::vector<DenseLayer> layers;  // hidden stack, then head
  };
  Branch make_branch(const std::string& prefix, int out_width, Rng& rng);
  ad::Var trunk(ad::Tape& tape, const Branch& b, const Observation& obs) const;
  void check(const Observation& obs) const;

  int n_features_;
  Branch actor_;
  Branch critic_;
};

/// Concentrations evaluated on a scratch tape.
Vector actor_alpha(ActorCritic& model, const Observation& obs);
double critic_value(ActorCritic& model, const Observation& obs);

struct ActionChoice {
  Vector action;
  double log_prob = 0.0;
};

/// Sample from Dir(alpha) (training) or take its mean (evaluation).
ActionChoice select_action(const Vector& alpha, Rng& rng, ActionMode mode);

/// A rebalancing policy over the simulator's observation.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual Vector act(const Observation& obs, Rng& rng, ActionMode mode) = 0;
};

/// Adapts an ActorCritic's actor to the Policy interface.
class ModelPolicy : public Policy {
 public:
  explicit ModelPolicy(std::shared_ptr<ActorCritic> model) : model_(std::move(model)) {}
  std::string name() const override { return model_->kind(); }
  Vector act(const Observation& obs, Rng& rng, ActionMode mode) override;
  ActorCritic& model() { return *model_; }

 private:
  std::shared_ptr<ActorCritic> model_;
};

}  // namespace amod
