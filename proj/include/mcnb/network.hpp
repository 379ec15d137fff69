#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace mcnb {

using ArmContext = std::vector<double>;

// Fully connected ReLU network producing a scalar:
//   f(x) = W_L sigma(W_{L-1} ... sigma(W_1 x)),
// W_1 is width x input_dim, W_2..W_{L-1} are width x width, W_L is 1 x width.
struct NetworkShape {
  std::size_t input_dim = 0;
  std::size_t width = 0;
  std::size_t depth = 0;  // number of weight matrices L, >= 2

  std::size_t param_count() const {
    return width * input_dim + (depth - 2) * width * width + width;
  }
  std::size_t layer_rows(std::size_t l) const { return l == depth ? 1 : width; }
  std::size_t layer_cols(std::size_t l) const {
    return l == 1 ? input_dim : width;
  }
  // offset of vec(W_l) in the flat layout vec(W_1)..vec(W_L), row-major
  std::size_t layer_offset(std::size_t l) const;

  void validate() const;  // throws Error("invalid_shape") on bad fields
  bool operator==(const NetworkShape&) const = default;
};

// Flat parameter storage in the layout above; all arithmetic is double.
struct ParamVector {
  NetworkShape shape;
  std::vector<double> values;

  double* layer(std::size_t l) { return values.data() + shape.layer_offset(l); }
  const double* layer(std::size_t l) const {
    return values.data() + shape.layer_offset(l);
  }
};

// Gradients share the parameter layout exactly.
using GradientVector = ParamVector;

ParamVector zero_params(const NetworkShape& shape);

// W_l ~ N(0, 2/width) for l < L and W_L ~ N(0, 1/width), filled in flat
// order so a fixed seed gives a bit-identical vector.
ParamVector init_params(const NetworkShape& shape, std::uint64_t seed);

double forward(const ParamVector& params, const ArmContext& x);

struct Evaluation {
  double value = 0.0;
  GradientVector grad;
};

// Scalar output and its full parameter gradient in one pass. ReLU
// subgradient at 0 is 0, matching the mask convention used everywhere.
Evaluation value_and_grad(const ParamVector& params, const ArmContext& x);

GradientVector backward(const ParamVector& params, const ArmContext& x);

// loss = (f(x) - r)^2 / 2, gradient = (f - r) * grad f
std::pair<double, GradientVector> loss_and_grad(const ParamVector& params,
                                                const ArmContext& x, double r);

// || a - b ||_2 over the flattened vectors
double grad_l2_distance(const GradientVector& a, const GradientVector& b);

}  // namespace mcnb
