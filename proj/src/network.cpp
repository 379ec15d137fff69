#include "mcnb/network.hpp"

#include <cmath>
#include <string>

#include "mcnb/errors.hpp"
#include "mcnb/rng.hpp"

namespace mcnb {

std::size_t NetworkShape::layer_offset(std::size_t l) const {
  std::size_t off = 0;
  if (l > 1) off += width * input_dim;
  if (l > 2) off += (l - 2) * width * width;
  return off;
}

void NetworkShape::validate() const {
  if (input_dim == 0 || width == 0 || depth < 2) {
    throw Error("invalid_shape",
                "network shape requires input_dim >= 1, width >= 1, depth >= "
                "2; got input_dim=" +
                    std::to_string(input_dim) + " width=" +
                    std::to_string(width) + " depth=" + std::to_string(depth));
  }
}

ParamVector zero_params(const NetworkShape& shape) {
  shape.validate();
  return ParamVector{shape, std::vector<double>(shape.param_count(), 0.0)};
}

ParamVector init_params(const NetworkShape& shape, std::uint64_t seed) {
  ParamVector p = zero_params(shape);
  Rng rng(seed);
  const double hidden_sd = std::sqrt(2.0 / static_cast<double>(shape.width));
  const double out_sd = std::sqrt(1.0 / static_cast<double>(shape.width));
  const std::size_t out_off = shape.layer_offset(shape.depth);
  for (std::size_t i = 0; i < p.values.size(); ++i) {
    p.values[i] = (i < out_off ? hidden_sd : out_sd) * rng.gaussian();
  }
  return p;
}

namespace {

void check_input(const ParamVector& params, const ArmContext& x) {
  if (x.size() != params.shape.input_dim) {
    throw DimensionError("network input", params.shape.input_dim, x.size());
  }
  if (params.values.size() != params.shape.param_count()) {
    throw DimensionError("param vector", params.shape.param_count(),
                         params.values.size());
  }
}

// Writes h_1..h_{L-1} (each `width` long, post-ReLU) into `hidden` and
// returns f(x). `hidden` must hold (depth-1)*width doubles.
double forward_hidden(const ParamVector& params, const ArmContext& x,
                      double* hidden) {
  const NetworkShape& s = params.shape;
  const std::size_t m = s.width;
  const double* in = x.data();
  std::size_t in_dim = s.input_dim;
  for (std::size_t l = 1; l < s.depth; ++l) {
    const double* W = params.layer(l);
    double* out = hidden + (l - 1) * m;
    for (std::size_t i = 0; i < m; ++i) {
      double acc = 0.0;
      const double* row = W + i * in_dim;
      for (std::size_t j = 0; j < in_dim; ++j) acc += row[j] * in[j];
      out[i] = acc > 0.0 ? acc : 0.0;
    }
    in = out;
    in_dim = m;
  }
  const double* WL = params.layer(s.depth);
  double f = 0.0;
  for (std::size_t j = 0; j < m; ++j) f += WL[j] * in[j];
  return f;
}

}  // namespace

double forward(const ParamVector& params, const ArmContext& x) {
  check_input(params, x);
  std::vector<double> hidden((params.shape.depth - 1) * params.shape.width);
  return forward_hidden(params, x, hidden.data());
}

Evaluation value_and_grad(const ParamVector& params, const ArmContext& x) {
  check_input(params, x);
  const NetworkShape& s = params.shape;
  const std::size_t m = s.width;
  std::vector<double> hidden((s.depth - 1) * m);
  Evaluation ev;
  ev.value = forward_hidden(params, x, hidden.data());
  ev.grad = zero_params(s);

  // dW_L = h_{L-1}; then backpropagate delta through the ReLU masks.
  const double* h_last = hidden.data() + (s.depth - 2) * m;
  double* gL = ev.grad.layer(s.depth);
  for (std::size_t j = 0; j < m; ++j) gL[j] = h_last[j];

  // delta over layer l output; mask is h_l > 0 (ReLU' at 0 defined 0)
  std::vector<double> delta(m), next(m);
  const double* WL = params.layer(s.depth);
  for (std::size_t i = 0; i < m; ++i) {
    delta[i] = h_last[i] > 0.0 ? WL[i] : 0.0;
  }
  for (std::size_t l = s.depth - 1; l >= 1; --l) {
    const double* below = l == 1 ? x.data() : hidden.data() + (l - 2) * m;
    const std::size_t below_dim = l == 1 ? s.input_dim : m;
    double* gl = ev.grad.layer(l);
    const double* W = params.layer(l);
    for (std::size_t i = 0; i < m; ++i) {
      if (delta[i] == 0.0) continue;
      double* grow = gl + i * below_dim;
      for (std::size_t j = 0; j < below_dim; ++j) {
        grow[j] = delta[i] * below[j];
      }
    }
    if (l == 1) break;
    const double* h_below = hidden.data() + (l - 2) * m;
    for (std::size_t j = 0; j < m; ++j) {
      if (h_below[j] <= 0.0) {
        next[j] = 0.0;
        continue;
      }
      double acc = 0.0;
      for (std::size_t i = 0; i < m; ++i) acc += W[i * m + j] * delta[i];
      next[j] = acc;
    }
    delta.swap(next);
  }
  return ev;
}

GradientVector backward(const ParamVector& params, const ArmContext& x) {
  return value_and_grad(params, x).grad;
}

std::pair<double, GradientVector> loss_and_grad(const ParamVector& params,
                                                const ArmContext& x,
                                                double r) {
  Evaluation ev = value_and_grad(params, x);
  const double resid = ev.value - r;
  for (double& g : ev.grad.values) g *= resid;
  return {0.5 * resid * resid, std::move(ev.grad)};
}

double grad_l2_distance(const GradientVector& a, const GradientVector& b) {
  if (a.values.size() != b.values.size()) {
    throw DimensionError("grad_l2_distance", a.values.size(), b.values.size());
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double d = a.values[i] - b.values[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

}  // namespace mcnb
