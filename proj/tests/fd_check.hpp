#pragma once

#include <functional>
#include <vector>

#include "amod/autodiff.hpp"

namespace amod::testing {

/// Norm-wise relative error between backward() gradients and central
/// differences of `loss` with respect to every entry of every parameter.
inline double gradient_error(std::vector<ad::Parameter*> params,
                             const std::function<ad::Var(ad::Tape&)>& loss, double h = 1e-6) {
  for (auto* p : params) p->zero_grad();
  {
    ad::Tape tape;
    tape.backward(loss(tape));
  }
  double diff2 = 0.0, ref2 = 0.0, num2 = 0.0;
  for (auto* p : params) {
    for (Eigen::Index k = 0; k < p->value().size(); ++k) {
      double& x = p->mutable_value().data()[k];
      const double x0 = x;
      x = x0 + h;
      double up, down;
      {
        ad::Tape t;
        up = loss(t).item();
      }
      x = x0 - h;
      {
        ad::Tape t;
        down = loss(t).item();
      }
      x = x0;
      const double numeric = (up - down) / (2 * h);
      const double analytic = p->grad().data()[k];
      diff2 += (numeric - analytic) * (numeric - analytic);
      ref2 += analytic * analytic;
      num2 += numeric * numeric;
    }
  }
  return std::sqrt(diff2) / std::max({std::sqrt(ref2), std::sqrt(num2), 1e-10});
}

}  // namespace amod::testing
