#include "mcnb/optimizer.hpp"

#include <cmath>

#include "mcnb/errors.hpp"

namespace mcnb {

void apply_step(ParamVector& params, const GradientVector& grad,
                OptimizerState& state, OptimizerMode mode, double lr) {
  const std::size_t n = params.values.size();
  if (grad.values.size() != n) {
    throw DimensionError("apply_step", n, grad.values.size());
  }
  if (mode == OptimizerMode::sgd) {
    for (std::size_t i = 0; i < n; ++i) {
      params.values[i] -= lr * grad.values[i];
    }
    return;
  }
  constexpr double beta1 = 0.9;
  constexpr double beta2 = 0.999;
  constexpr double eps = 1e-8;
  if (state.m1.empty()) {
    state.m1.assign(n, 0.0);
    state.m2.assign(n, 0.0);
  } else if (state.m1.size() != n) {
    throw DimensionError("adam state", n, state.m1.size());
  }
  state.step_count += 1;
  const double c1 =
      1.0 - std::pow(beta1, static_cast<double>(state.step_count));
  const double c2 =
      1.0 - std::pow(beta2, static_cast<double>(state.step_count));
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grad.values[i];
    state.m1[i] = beta1 * state.m1[i] + (1.0 - beta1) * g;
    state.m2[i] = beta2 * state.m2[i] + (1.0 - beta2) * g * g;
    const double mhat = state.m1[i] / c1;
    const double vhat = state.m2[i] / c2;
    params.values[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

}  // namespace mcnb
