#include "amod/autodiff.hpp"

#include <cmath>
#include <string>

#include "amod/special.hpp"

namespace amod::ad {

Parameter::Parameter(std::string name, Matrix value)
    : first_moment(Matrix::Zero(value.rows(), value.cols())),
      second_moment(Matrix::Zero(value.rows(), value.cols())),
      name_(std::move(name)),
      value_(std::move(value)),
      grad_(Matrix::Zero(value_.rows(), value_.cols())) {}

const Matrix& Var::value() const { return tape_->nodes_[index_].value; }

const Matrix& Var::grad() const { return tape_->nodes_[index_].grad; }

double Var::item() const {
  const Matrix& v = value();
  if (v.size() != 1) throw ShapeError("Var::item on a non-scalar value");
  return v(0, 0);
}

Var Tape::constant(Matrix value) {
  nodes_.push_back({std::move(value), Matrix(), nullptr, nullptr, false});
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(Parameter& p) {
  nodes_.push_back({p.value(), Matrix(), nullptr, &p, true});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(std::string_view op, Matrix value, std::initializer_list<Var> parents, BackwardFn backward) {
  bool needs = false;
  for (const Var& p : parents) {
    if (p.tape() != this) throw std::invalid_argument(std::string(op) + ": operand from another tape");
    needs = needs || nodes_[p.index()].requires_grad;
  }
  if (!value.allFinite()) throw NumericError(std::string(op) + ": non-finite result");
  nodes_.push_back({std::move(value), Matrix(), needs ? std::move(backward) : nullptr, nullptr, needs});
  return Var(this, nodes_.size() - 1);
}

void Tape::accumulate(const Var& v, const Matrix& g) {
  Node& node = nodes_[v.index()];
  if (!node.requires_grad) return;
  if (node.grad.size() == 0) {
    node.grad = g;
  } else {
    node.grad += g;
  }
}

void Tape::backward(const Var& root) {
  if (root.tape() != this) throw std::invalid_argument("backward: root from another tape");
  if (root.value().size() != 1) throw std::invalid_argument("backward: root must be a scalar");
  for (Node& n : nodes_) n.grad.resize(0, 0);
  if (!nodes_[root.index()].requires_grad) return;
  nodes_[root.index()].grad = Matrix::Ones(1, 1);
  for (std::size_t i = root.index() + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.requires_grad || node.grad.size() == 0) continue;
    if (node.param != nullptr) {
      node.param->mutable_grad() += node.grad;
    } else if (node.backward) {
      const Matrix g = node.grad;
      node.backward(*this, g);
    }
  }
}

namespace {

void require_same_shape(std::string_view op, const Var& a, const Var& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()) + ")");
  }
}

Tape& tape_of(const Var& a) {
  if (a.tape() == nullptr) throw std::invalid_argument("operation on an unbound Var");
  return *a.tape();
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions differ (" + std::to_string(a.cols()) + " vs " +
                     std::to_string(b.rows()) + ")");
  }
  return tape_of(a).record("matmul", a.value() * b.value(), {a, b}, [a, b](Tape& t, const Matrix& g) {
    if (t.requires_grad(a)) t.accumulate(a, g * b.value().transpose());
    if (t.requires_grad(b)) t.accumulate(b, a.value().transpose() * g);
  });
}

Var add(const Var& a, const Var& b) {
  require_same_shape("add", a, b);
  return tape_of(a).record("add", a.value() + b.value(), {a, b}, [a, b](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var sub(const Var& a, const Var& b) {
  require_same_shape("sub", a, b);
  return tape_of(a).record("sub", a.value() - b.value(), {a, b}, [a, b](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, -g);
  });
}

Var add_row(const Var& a, const Var& bias) {
  if (bias.rows() != 1 || bias.cols() != a.cols()) throw ShapeError("add_row: bias must be 1 x cols");
  Matrix out = a.value().rowwise() + bias.value().row(0);
  return tape_of(a).record("add_row", std::move(out), {a, bias}, [a, bias](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    if (t.requires_grad(bias)) t.accumulate(bias, g.colwise().sum());
  });
}

Var add_scalar(const Var& a, double k) {
  return tape_of(a).record("add_scalar", a.value().array() + k, {a},
                           [a](Tape& t, const Matrix& g) { t.accumulate(a, g); });
}

Var scale(const Var& a, double k) {
  return tape_of(a).record("scale", a.value() * k, {a},
                           [a, k](Tape& t, const Matrix& g) { t.accumulate(a, g * k); });
}

Var elementwise_mul(const Var& a, const Var& b) {
  require_same_shape("elementwise_mul", a, b);
  return tape_of(a).record("elementwise_mul", a.value().cwiseProduct(b.value()), {a, b},
                           [a, b](Tape& t, const Matrix& g) {
                             if (t.requires_grad(a)) t.accumulate(a, g.cwiseProduct(b.value()));
                             if (t.requires_grad(b)) t.accumulate(b, g.cwiseProduct(a.value()));
                           });
}

Var relu(const Var& a) {
  return tape_of(a).record("relu", a.value().cwiseMax(0.0), {a}, [a](Tape& t, const Matrix& g) {
    t.accumulate(a, (a.value().array() > 0.0).select(g.array(), 0.0).matrix());
  });
}

Var softplus(const Var& a) {
  const Matrix out = a.value().unaryExpr([](double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
  });
  return tape_of(a).record("softplus", out, {a}, [a](Tape& t, const Matrix& g) {
    const Matrix sig = a.value().unaryExpr([](double x) {
      return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    });
    t.accumulate(a, g.cwiseProduct(sig));
  });
}

Var log(const Var& a) {
  return tape_of(a).record("log", a.value().array().log().matrix(), {a}, [a](Tape& t, const Matrix& g) {
    t.accumulate(a, g.cwiseQuotient(a.value()));
  });
}

Var sum(const Var& a) {
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return tape_of(a).record("sum", std::move(out), {a}, [a](Tape& t, const Matrix& g) {
    t.accumulate(a, Matrix::Constant(a.rows(), a.cols(), g(0, 0)));
  });
}

Var row_sum_pool(const Eigen::SparseMatrix<double>& s, const Var& x) {
  if (s.cols() != x.rows()) throw ShapeError("row_sum_pool: operator width differs from row count");
  Matrix out = s * x.value();
  // The operator is captured by value; sparse copies are O(nnz).
  return tape_of(x).record("row_sum_pool", std::move(out), {x}, [s, x](Tape& t, const Matrix& g) {
    t.accumulate(x, s.transpose() * g);
  });
}

Var global_sum_pool(const Var& x) {
  return tape_of(x).record("global_sum_pool", x.value().colwise().sum(), {x}, [x](Tape& t, const Matrix& g) {
    t.accumulate(x, g.replicate(x.rows(), 1));
  });
}

Var flatten(const Var& x) {
  const auto r = x.rows(), c = x.cols();
  Matrix out(1, r * c);
  for (Eigen::Index i = 0; i < r; ++i) out.block(0, i * c, 1, c) = x.value().row(i);
  return tape_of(x).record("flatten", std::move(out), {x}, [x, r, c](Tape& t, const Matrix& g) {
    Matrix back(r, c);
    for (Eigen::Index i = 0; i < r; ++i) back.row(i) = g.block(0, i * c, 1, c);
    t.accumulate(x, back);
  });
}

Var gcn_layer(const Var& x, const Eigen::SparseMatrix<double>& s, const Var& w, const Var& w_skip) {
  if (s.rows() != x.rows() || s.cols() != x.rows()) throw ShapeError("gcn_layer: operator must be N x N");
  return relu(add(row_sum_pool(s, matmul(x, w)), matmul(x, w_skip)));
}

namespace {

Vector interior_point(const Vector& a) {
  Vector clamped = a.cwiseMax(1e-8).cwiseMin(1.0 - 1e-8);
  return clamped / clamped.sum();
}

Vector as_vector(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

void check_alpha(const Vector& alpha, const char* op) {
  if (alpha.size() == 0 || !(alpha.array() > 0.0).all() || !alpha.allFinite()) {
    throw std::domain_error(std::string(op) + ": concentration parameters must be positive");
  }
}

}  // namespace

double dirichlet_log_density(const Vector& alpha, const Vector& a) {
  check_alpha(alpha, "dirichlet_log_density");
  if (a.size() != alpha.size()) throw ShapeError("dirichlet_log_density: dimension mismatch");
  const Vector x = interior_point(a);
  double lp = log_gamma(alpha.sum());
  for (Eigen::Index i = 0; i < alpha.size(); ++i) lp += (alpha(i) - 1.0) * std::log(x(i)) - log_gamma(alpha(i));
  return lp;
}

Var dirichlet_log_prob(const Var& alpha, const Vector& a) {
  if (alpha.rows() != 1 && alpha.cols() != 1) throw ShapeError("dirichlet_log_prob: alpha must be a vector");
  const Vector al = as_vector(alpha.value());
  const double lp = dirichlet_log_density(al, a);
  const Vector log_x = interior_point(a).array().log();
  Matrix out(1, 1);
  out(0, 0) = lp;
  return tape_of(alpha).record("dirichlet_log_prob", std::move(out), {alpha},
                               [alpha, log_x, al](Tape& t, const Matrix& g) {
                                 const double psi_total = digamma(al.sum());
                                 Matrix d(alpha.rows(), alpha.cols());
                                 for (Eigen::Index i = 0; i < al.size(); ++i)
                                   d.data()[i] = g(0, 0) * (log_x(i) + psi_total - digamma(al(i)));
                                 t.accumulate(alpha, d);
                               });
}

Var dirichlet_entropy(const Var& alpha) {
  if (alpha.rows() != 1 && alpha.cols() != 1) throw ShapeError("dirichlet_entropy: alpha must be a vector");
  const Vector al = as_vector(alpha.value());
  check_alpha(al, "dirichlet_entropy");
  const double total = al.sum();
  const auto k = static_cast<double>(al.size());
  double h = -log_gamma(total) + (total - k) * digamma(total);
  for (Eigen::Index i = 0; i < al.size(); ++i) h += log_gamma(al(i)) - (al(i) - 1.0) * digamma(al(i));
  Matrix out(1, 1);
  out(0, 0) = h;
  return tape_of(alpha).record("dirichlet_entropy", std::move(out), {alpha}, [alpha, al, total, k](Tape& t, const Matrix& g) {
    const double common = (total - k) * trigamma(total);
    Matrix d(alpha.rows(), alpha.cols());
    for (Eigen::Index i = 0; i < al.size(); ++i)
      d.data()[i] = g(0, 0) * (common - (al(i) - 1.0) * trigamma(al(i)));
    t.accumulate(alpha, d);
  });
}

void adam_step(Parameter& p, double lr, double beta1, double beta2, double eps) {
  const Matrix& g = p.grad();
  p.first_moment = beta1 * p.first_moment + (1.0 - beta1) * g;
  p.second_moment = beta2 * p.second_moment + (1.0 - beta2) * g.cwiseProduct(g);
  ++p.step;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(p.step));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(p.step));
  p.mutable_value().array() -=
      lr * (p.first_moment.array() / c1) / ((p.second_moment.array() / c2).sqrt() + eps);
}

}  // namespace amod::ad
