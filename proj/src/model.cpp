#include "amod/model.hpp"

#include <cmath>

#include "amod/dirichlet.hpp"

namespace amod {

std::vector<ad::Parameter*> ActorCritic::parameters() { return parameters(""); }

std::vector<ad::Parameter*> ActorCritic::parameters(std::string_view prefix) {
  std::vector<ad::Parameter*> out;
  for (auto& p : params_)
    if (p->name().starts_with(prefix)) out.push_back(p.get());
  return out;
}

ad::Parameter& ActorCritic::parameter(std::string_view name) {
  for (auto& p : params_)
    if (p->name() == name) return *p;
  throw std::out_of_range("no parameter named " + std::string(name));
}

void ActorCritic::zero_grad() {
  for (auto& p : params_) p->zero_grad();
}

ad::Parameter& ActorCritic::add_parameter(std::string name, Matrix init) {
  params_.push_back(std::make_unique<ad::Parameter>(std::move(name), std::move(init)));
  return *params_.back();
}

ad::Var DenseLayer::operator()(ad::Tape& tape, const ad::Var& x) const {
  return ad::add_row(ad::matmul(x, tape.parameter(*weight)), tape.parameter(*bias));
}

Matrix uniform_init(int rows, int cols, int fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = bound * (2.0 * rng.uniform() - 1.0);
  return m;
}

GnnActorCritic::GnnActorCritic(int n_features, std::uint64_t seed) : n_features_(n_features) {
  if (n_features < 1) throw std::invalid_argument("GnnActorCritic: n_features must be positive");
  Rng rng(seed);
  actor_ = make_branch("actor", 1, rng);
  critic_ = make_branch("critic", 1, rng);
}

GnnActorCritic::Branch GnnActorCritic::make_branch(const std::string& prefix, int out_width, Rng& rng) {
  Branch b;
  const int f = n_features_;
  b.gcn_weight = &add_parameter(prefix + ".gcn.weight", uniform_init(f, f, f, rng));
  b.gcn_skip = &add_parameter(prefix + ".gcn.skip", uniform_init(f, f, f, rng));
  int width = f;
  for (int k = 1; k <= 3; ++k) {
    const std::string name = prefix + ".fc" + std::to_string(k);
    DenseLayer layer;
    layer.weight = &add_parameter(name + ".weight", uniform_init(width, kHidden, width, rng));
    layer.bias = &add_parameter(name + ".bias", uniform_init(1, kHidden, width, rng));
    b.layers.push_back(layer);
    width = kHidden;
  }
  DenseLayer head;
  head.weight = &add_parameter(prefix + ".head.weight", uniform_init(width, out_width, width, rng));
  head.bias = &add_parameter(prefix + ".head.bias", uniform_init(1, out_width, width, rng));
  b.layers.push_back(head);
  return b;
}

void GnnActorCritic::check(const Observation& obs) const {
  if (obs.n_features() != n_features_) {
    throw ShapeError("GNN expects " + std::to_string(n_features_) + " node features, observation has " +
                     std::to_string(obs.n_features()));
  }
  if (!obs.graph) throw std::invalid_argument("observation carries no graph");
}

ad::Var GnnActorCritic::trunk(ad::Tape& tape, const Branch& b, const Observation& obs) const {
  const ad::Var x = tape.constant(obs.node_features);
  return ad::gcn_layer(x, obs.graph->normalized, tape.parameter(*b.gcn_weight), tape.parameter(*b.gcn_skip));
}

ad::Var GnnActorCritic::actor(ad::Tape& tape, const Observation& obs) {
  check(obs);
  ad::Var h = ad::row_sum_pool(obs.graph->neighbor_sum, trunk(tape, actor_, obs));
  for (std::size_t k = 0; k + 1 < actor_.layers.size(); ++k) h = ad::relu(actor_.layers[k](tape, h));
  const ad::Var out = actor_.layers.back()(tape, h);
  return ad::add_scalar(ad::softplus(out), kAlphaFloor);
}

ad::Var GnnActorCritic::critic(ad::Tape& tape, const Observation& obs) {
  check(obs);
  ad::Var h = ad::global_sum_pool(trunk(tape, critic_, obs));
  for (std::size_t k = 0; k + 1 < critic_.layers.size(); ++k) h = ad::relu(critic_.layers[k](tape, h));
  return critic_.layers.back()(tape, h);
}

Vector actor_alpha(ActorCritic& model, const Observation& obs) {
  ad::Tape tape;
  const Matrix a = model.actor(tape, obs).value();
  return Eigen::Map<const Vector>(a.data(), a.size());
}

double critic_value(ActorCritic& model, const Observation& obs) {
  ad::Tape tape;
  return model.critic(tape, obs).item();
}

ActionChoice select_action(const Vector& alpha, Rng& rng, ActionMode mode) {
  ActionChoice choice;
  choice.action = mode == ActionMode::sample ? dirichlet_sample(alpha, rng) : dirichlet_mean(alpha);
  choice.log_prob = ad::dirichlet_log_density(alpha, choice.action);
  return choice;
}

Vector ModelPolicy::act(const Observation& obs, Rng& rng, ActionMode mode) {
  return select_action(actor_alpha(*model_, obs), rng, mode).action;
}

}  // namespace amod
