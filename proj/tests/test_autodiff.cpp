#include <gtest/gtest.h>

#include <cmath>

#include "amod/autodiff.hpp"
#include "amod/network.hpp"
#include "amod/rng.hpp"
#include "fd_check.hpp"

using namespace amod;
using namespace amod::ad;
using amod::testing::gradient_error;

namespace {

Matrix random_matrix(int r, int c, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Matrix m(r, c);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = lo + (hi - lo) * rng.uniform();
  return m;
}

// Entries bounded away from zero so relu's kink is never straddled.
Matrix away_from_zero(int r, int c, Rng& rng) {
  Matrix m = random_matrix(r, c, rng, 0.05, 1.0);
  for (Eigen::Index k = 0; k < m.size(); ++k)
    if (rng.uniform() < 0.5) m.data()[k] = -m.data()[k];
  return m;
}

// Contract an output with a fixed random weight so the whole Jacobian is tested.
Var contract(Tape& t, const Var& v, const Matrix& w) { return sum(elementwise_mul(v, t.constant(w))); }

class AutodiffOps : public ::testing::TestWithParam<int> {
 protected:
  Rng rng{static_cast<std::uint64_t>(GetParam()) + 17};
};

}  // namespace

TEST_P(AutodiffOps, Matmul) {
  Parameter a("a", random_matrix(3, 4, rng)), b("b", random_matrix(4, 2, rng));
  const Matrix w = random_matrix(3, 2, rng);
  EXPECT_LT(gradient_error({&a, &b}, [&](Tape& t) { return contract(t, matmul(t.parameter(a), t.parameter(b)), w); }), 1e-5);
}

TEST_P(AutodiffOps, AddSubScale) {
  Parameter a("a", random_matrix(3, 3, rng)), b("b", random_matrix(3, 3, rng));
  const Matrix w = random_matrix(3, 3, rng);
  EXPECT_LT(gradient_error({&a, &b},
                           [&](Tape& t) {
                             const Var x = t.parameter(a), y = t.parameter(b);
                             return contract(t, add_scalar(scale(sub(add(x, y), scale(y, 3.0)), -0.7), 2.0), w);
                           }),
            1e-5);
}

TEST_P(AutodiffOps, AddRowBroadcast) {
  Parameter a("a", random_matrix(5, 3, rng)), b("b", random_matrix(1, 3, rng));
  const Matrix w = random_matrix(5, 3, rng);
  EXPECT_LT(gradient_error({&a, &b}, [&](Tape& t) { return contract(t, add_row(t.parameter(a), t.parameter(b)), w); }), 1e-5);
}

TEST_P(AutodiffOps, ElementwiseMul) {
  Parameter a("a", random_matrix(2, 5, rng)), b("b", random_matrix(2, 5, rng));
  const Matrix w = random_matrix(2, 5, rng);
  EXPECT_LT(gradient_error({&a, &b},
                           [&](Tape& t) { return contract(t, elementwise_mul(t.parameter(a), t.parameter(b)), w); }),
            1e-5);
}

TEST_P(AutodiffOps, Relu) {
  Parameter a("a", away_from_zero(4, 4, rng));
  const Matrix w = random_matrix(4, 4, rng);
  EXPECT_LT(gradient_error({&a}, [&](Tape& t) { return contract(t, relu(t.parameter(a)), w); }), 1e-4);
}

TEST_P(AutodiffOps, SoftplusAndLog) {
  Parameter a("a", random_matrix(3, 3, rng, -25.0, 25.0)), b("b", random_matrix(3, 3, rng, 0.2, 4.0));
  const Matrix w = random_matrix(3, 3, rng);
  EXPECT_LT(gradient_error({&a, &b},
                           [&](Tape& t) {
                             return add(contract(t, softplus(t.parameter(a)), w), contract(t, log(t.parameter(b)), w));
                           }),
            1e-5);
}

TEST_P(AutodiffOps, Pools) {
  const TransportNetwork net = build_grid_network(2, 3, 1, 1);
  const auto s = to_sparse(normalized_adjacency(net.adjacency.cast<double>()));
  Parameter x("x", random_matrix(6, 4, rng));
  const Matrix w = random_matrix(6, 4, rng), w2 = random_matrix(1, 4, rng), w3 = random_matrix(1, 24, rng);
  EXPECT_LT(gradient_error({&x},
                           [&](Tape& t) {
                             const Var v = t.parameter(x);
                             return add(add(contract(t, row_sum_pool(s, v), w), contract(t, global_sum_pool(v), w2)),
                                        contract(t, flatten(v), w3));
                           }),
            1e-5);
}

TEST_P(AutodiffOps, GcnLayer) {
  const TransportNetwork net = build_grid_network(3, 3, 1, 1);
  const auto s = to_sparse(normalized_adjacency(net.adjacency.cast<double>()));
  Parameter x("x", random_matrix(9, 5, rng)), wa("w", random_matrix(5, 5, rng)), ws("ws", random_matrix(5, 5, rng));
  const Matrix w = random_matrix(9, 5, rng);
  // Resample until no pre-activation sits near the relu kink.
  for (int tries = 0; tries < 100; ++tries) {
    const Matrix pre = s * (x.value() * wa.value()) + x.value() * ws.value();
    if (pre.cwiseAbs().minCoeff() > 1e-3) break;
    x.mutable_value() = random_matrix(9, 5, rng);
  }
  EXPECT_LT(gradient_error({&x, &wa, &ws},
                           [&](Tape& t) {
                             return contract(t, gcn_layer(t.parameter(x), s, t.parameter(wa), t.parameter(ws)), w);
                           }),
            1e-4);
}

TEST_P(AutodiffOps, DirichletLogProbAndEntropy) {
  Parameter alpha("alpha", random_matrix(4, 1, rng, 0.3, 6.0));
  Vector a = random_matrix(4, 1, rng, 0.05, 1.0);
  a /= a.sum();
  EXPECT_LT(gradient_error({&alpha}, [&](Tape& t) { return dirichlet_log_prob(t.parameter(alpha), a); }), 1e-5);
  EXPECT_LT(gradient_error({&alpha}, [&](Tape& t) { return dirichlet_entropy(t.parameter(alpha)); }), 1e-5);
}

INSTANTIATE_TEST_SUITE_P(Randomized, AutodiffOps, ::testing::Range(0, 5));

TEST(Tape, ParameterGradsAccumulateAcrossUses) {
  Parameter p("p", Matrix::Constant(1, 1, 3.0));
  Tape t;
  const Var x = t.parameter(p);
  t.backward(sum(elementwise_mul(x, x)));  // d/dx x^2 = 6
  EXPECT_DOUBLE_EQ(p.grad()(0, 0), 6.0);
}

TEST(Tape, ConstantsGetNoGradient) {
  Tape t;
  const Var c = t.constant(Matrix::Ones(2, 2));
  const Var s = sum(c);
  t.backward(s);
  EXPECT_FALSE(t.requires_grad(s));
}

TEST(Tape, NonFiniteValuesAreReported) {
  Tape t;
  const Var c = t.constant(Matrix::Zero(1, 1));
  try {
    log(c);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("log"), std::string::npos);
  }
}

TEST(Tape, ShapeErrors) {
  Tape t;
  EXPECT_THROW(matmul(t.constant(Matrix::Ones(2, 3)), t.constant(Matrix::Ones(2, 3))), ShapeError);
  EXPECT_THROW(add(t.constant(Matrix::Ones(2, 3)), t.constant(Matrix::Ones(3, 2))), ShapeError);
  EXPECT_THROW(t.backward(t.constant(Matrix::Ones(2, 2))), std::invalid_argument);
}

TEST(Softplus, StableForLargeInputs) {
  Tape t;
  Matrix m(1, 3);
  m << -800.0, 0.0, 800.0;
  const Matrix v = softplus(t.constant(m)).value();
  EXPECT_NEAR(v(0, 0), 0.0, 1e-300);
  EXPECT_NEAR(v(0, 1), std::log(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(v(0, 2), 800.0);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Parameter p("p", Matrix::Zero(1, 3));
  p.mutable_grad() << 2.0, -0.5, 1e-3;
  adam_step(p, 0.003);
  EXPECT_NEAR(p.value()(0, 0), -0.003, 1e-9);
  EXPECT_NEAR(p.value()(0, 1), 0.003, 1e-9);
  EXPECT_NEAR(p.value()(0, 2), -0.003, 1e-7);
  EXPECT_EQ(p.step, 1);
}

TEST(Adam, MinimizesQuadratic) {
  Parameter p("p", Matrix::Constant(2, 1, 5.0));
  for (int i = 0; i < 3000; ++i) {
    p.mutable_grad() = 2.0 * p.value();
    adam_step(p, 0.01);
  }
  EXPECT_LT(p.value().norm(), 1e-2);
}

TEST(DirichletDensity, UniformOnSimplex) {
  // Dir(1,1,1) has density Gamma(3) = 2.
  Vector a(3);
  a << 0.2, 0.3, 0.5;
  EXPECT_NEAR(dirichlet_log_density(Vector::Ones(3), a), std::log(2.0), 1e-12);
  EXPECT_THROW(dirichlet_log_density(Vector::Zero(3), a), std::domain_error);
}
