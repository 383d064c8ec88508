#pragma once

#include <Eigen/SparseCore>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "amod/types.hpp"

namespace amod::ad {

/// Trainable matrix with its gradient accumulator and Adam state.
class Parameter {
 public:
  Parameter(std::string name, Matrix value);

  const std::string& name() const { return name_; }
  const Matrix& value() const { return value_; }
  Matrix& mutable_value() { return value_; }
  const Matrix& grad() const { return grad_; }
  Matrix& mutable_grad() { return grad_; }

  void zero_grad() { grad_.setZero(); }

  // Adam moments and step counter.
  Matrix first_moment;
  Matrix second_moment;
  std::int64_t step = 0;

 private:
  std::string name_;
  Matrix value_;
  Matrix grad_;
};

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  const Matrix& grad() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  /// Value of a 1x1 Var.
  double item() const;

  Tape* tape() const { return tape_; }
  std::size_t index() const { return index_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t index) : tape_(tape), index_(index) {}
  Tape* tape_ = nullptr;
  std::size_t index_ = 0;
};

/// Records operations in execution order; backward() replays them in reverse.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const Matrix& grad_out)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf that does not require gradients.
  Var constant(Matrix value);
  /// Leaf bound to a parameter; backward() adds into parameter.grad().
  Var parameter(Parameter& p);

  /// Record an op result. `parents` lists inputs; the node requires grad if
  /// any parent does. Throws NumericError if `value` is not finite.
  Var record(std::string_view op, Matrix value, std::initializer_list<Var> parents, BackwardFn backward);

  /// Reverse pass from a 1x1 root. Node gradients are recomputed on each
  /// call; parameter gradients accumulate across calls until zeroed.
  void backward(const Var& root);

  bool requires_grad(const Var& v) const { return nodes_[v.index()].requires_grad; }
  /// Accumulate into a node's gradient (used by backward rules).
  void accumulate(const Var& v, const Matrix& g);

  std::size_t size() const { return nodes_.size(); }

 private:
  friend class Var;
  struct Node {
    Matrix value;
    Matrix grad;
    BackwardFn backward;
    Parameter* param = nullptr;
    bool requires_grad = false;
  };
  std::vector<Node> nodes_;
};

// Forward ops. Shapes are checked (ShapeError); results are checked for
// finiteness (NumericError naming the op).
Var matmul(const Var& a, const Var& b);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
/// a (r x c) + bias (1 x c) broadcast over rows.
Var add_row(const Var& a, const Var& bias);
Var add_scalar(const Var& a, double k);
Var scale(const Var& a, double k);
Var elementwise_mul(const Var& a, const Var& b);
Var relu(const Var& a);
/// log(1 + exp(x)), overflow-safe.
Var softplus(const Var& a);
Var log(const Var& a);
/// Sum of all entries, 1x1.
Var sum(const Var& a);
/// S * X with a constant sparse operator S (neighbour aggregation).
Var row_sum_pool(const Eigen::SparseMatrix<double>& s, const Var& x);
/// Column sums, 1 x c.
Var global_sum_pool(const Var& x);
/// Row-major flatten to 1 x (r*c).
Var flatten(const Var& x);

/// ReLU(S X W + X W_skip).
Var gcn_layer(const Var& x, const Eigen::SparseMatrix<double>& s, const Var& w, const Var& w_skip);

/// Dirichlet log-density of simplex point `a` under concentration `alpha`
/// (n x 1 or 1 x n). `a` is clamped to [1e-8, 1 - 1e-8] and renormalized.
Var dirichlet_log_prob(const Var& alpha, const Vector& a);
/// Differential entropy of Dir(alpha).
Var dirichlet_entropy(const Var& alpha);

/// Bias-corrected Adam update in place; increments the step counter.
void adam_step(Parameter& p, double lr = 0.003, double beta1 = 0.9, double beta2 = 0.999,
               double eps = 1e-8);

/// Dirichlet log-density without gradient bookkeeping.
double dirichlet_log_density(const Vector& alpha, const Vector& a);

}  // namespace amod::ad
