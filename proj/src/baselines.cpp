#include "amod/baselines.hpp"

#include <array>

namespace amod {

Vector ed_policy(const Observation& obs) {
  const int n = obs.n_stations();
  if (n < 1) throw std::invalid_argument("ed_policy: empty network");
  return Vector::Constant(n, 1.0 / n);
}

Vector no_rebalance_policy(const Observation& obs) {
  const Vector idle = obs.idle();
  const double total = idle.sum();
  if (total <= 0.0) return ed_policy(obs);
  return idle / total;
}

MlpActorCritic::MlpActorCritic(int n_stations, int n_features, std::uint64_t seed)
    : n_stations_(n_stations), n_features_(n_features) {
  if (n_stations < 1 || n_features < 1) throw std::invalid_argument("MlpActorCritic: empty input");
  Rng rng(seed);
  actor_ = make_stack("actor", n_stations, rng);
  critic_ = make_stack("critic", 1, rng);
}

std::vector<DenseLayer> MlpActorCritic::make_stack(const std::string& prefix, int out_width, Rng& rng) {
  constexpr std::array<int, 4> kWidths = {128, 64, 32, 32};
  std::vector<DenseLayer> stack;
  int width = n_stations_ * n_features_;
  auto layer = [&](const std::string& name, int out) {
    DenseLayer l;
    l.weight = &add_parameter(name + ".weight", uniform_init(width, out, width, rng));
    l.bias = &add_parameter(name + ".bias", uniform_init(1, out, width, rng));
    stack.push_back(l);
    width = out;
  };
  for (std::size_t k = 0; k < kWidths.size(); ++k) layer(prefix + ".fc" + std::to_string(k + 1), kWidths[k]);
  layer(prefix + ".head", out_width);
  return stack;
}

ad::Var MlpActorCritic::run(ad::Tape& tape, const std::vector<DenseLayer>& stack, const Observation& obs) const {
  if (obs.n_stations() != n_stations_ || obs.n_features() != n_features_) {
    throw ShapeError("MLP built for " + std::to_string(n_stations_) + " stations x " +
                     std::to_string(n_features_) + " features, observation is " +
                     std::to_string(obs.n_stations()) + " x " + std::to_string(obs.n_features()));
  }
  ad::Var h = ad::flatten(tape.constant(obs.node_features));
  for (std::size_t k = 0; k + 1 < stack.size(); ++k) h = ad::relu(stack[k](tape, h));
  return stack.back()(tape, h);
}

ad::Var MlpActorCritic::actor(ad::Tape& tape, const Observation& obs) {
  const ad::Var out = run(tape, actor_, obs);  // 1 x N
  return ad::add_scalar(ad::softplus(out), GnnActorCritic::kAlphaFloor);
}

ad::Var MlpActorCritic::critic(ad::Tape& tape, const Observation& obs) { return run(tape, critic_, obs); }

}  // namespace amod
