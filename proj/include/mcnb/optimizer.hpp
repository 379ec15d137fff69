#pragma once

#include <cstdint>
#include <vector>

#include "mcnb/network.hpp"

namespace mcnb {

enum class OptimizerMode { sgd, adam };

// Adam moment buffers; lazily sized on the first adam step. Plain SGD
// never touches the state, so one state can sit unused behind sgd runs.
struct OptimizerState {
  std::vector<double> m1;
  std::vector<double> m2;
  std::uint64_t step_count = 0;

  void reset() {
    m1.clear();
    m2.clear();
    step_count = 0;
  }
};

// In-place update of `params`.
//   sgd:  theta -= lr * g
//   adam: bias-corrected first/second moments with beta1=0.9,
//         beta2=0.999, eps=1e-8
void apply_step(ParamVector& params, const GradientVector& grad,
                OptimizerState& state, OptimizerMode mode, double lr);

}  // namespace mcnb
