#include "mcnb/kernels.hpp"

#include <cstddef>

namespace mcnb {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
  return acc;
}

// upper triangle computed per row, then mirrored; identical in both modes
template <typename RowDot>
std::vector<std::vector<double>> symmetric_matrix(std::size_t n, double scale,
                                                  Exec exec, RowDot row_dot) {
  std::vector<std::vector<double>> g(n, std::vector<double>(n, 0.0));
  const bool par = exec == Exec::parallel;
#pragma omp parallel for schedule(dynamic) if (par)
  for (long long ii = 0; ii < static_cast<long long>(n); ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    for (std::size_t j = i; j < n; ++j) {
      g[i][j] = scale * row_dot(i, j);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) g[i][j] = g[j][i];
  }
  return g;
}

}  // namespace

std::vector<double> forward_many(const ParamVector& params,
                                 const std::vector<ArmContext>& xs,
                                 Exec exec) {
  std::vector<double> out(xs.size(), 0.0);
  const bool par = exec == Exec::parallel;
#pragma omp parallel for schedule(static) if (par)
  for (long long ii = 0; ii < static_cast<long long>(xs.size()); ++ii) {
    out[ii] = forward(params, xs[ii]);
  }
  return out;
}

std::vector<double> forward_over_params(
    const std::vector<const ParamVector*>& params, const ArmContext& x,
    Exec exec) {
  std::vector<double> out(params.size(), 0.0);
  const bool par = exec == Exec::parallel;
#pragma omp parallel for schedule(static) if (par)
  for (long long ii = 0; ii < static_cast<long long>(params.size()); ++ii) {
    out[ii] = forward(*params[ii], x);
  }
  return out;
}

std::vector<GradientVector> backward_many(const ParamVector& params,
                                          const std::vector<ArmContext>& xs,
                                          Exec exec) {
  std::vector<GradientVector> out(xs.size());
  const bool par = exec == Exec::parallel;
#pragma omp parallel for schedule(static) if (par)
  for (long long ii = 0; ii < static_cast<long long>(xs.size()); ++ii) {
    out[ii] = backward(params, xs[ii]);
  }
  return out;
}

std::vector<std::vector<double>> gram(const std::vector<ArmContext>& rows,
                                      double scale, Exec exec) {
  return symmetric_matrix(rows.size(), scale, exec,
                          [&](std::size_t i, std::size_t j) {
                            return dot(rows[i], rows[j]);
                          });
}

std::vector<std::vector<double>> gram_of_grads(
    const std::vector<GradientVector>& grads, double scale, Exec exec) {
  return symmetric_matrix(grads.size(), scale, exec,
                          [&](std::size_t i, std::size_t j) {
                            return dot(grads[i].values, grads[j].values);
                          });
}

}  // namespace mcnb
