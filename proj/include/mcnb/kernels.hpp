#pragma once

#include <vector>

#include "mcnb/network.hpp"

namespace mcnb {

// Execution mode for the batch kernels. Every kernel computes each
// output element on exactly one thread with a fixed serial inner loop,
// so `parallel` is bit-identical to `serial` for any thread count.
enum class Exec { serial, parallel };

// f(x; params) for each context in xs
std::vector<double> forward_many(const ParamVector& params,
                                 const std::vector<ArmContext>& xs, Exec exec);

// f(x; *params[u]) for one context and many parameter vectors; the
// clustering scan over users
std::vector<double> forward_over_params(
    const std::vector<const ParamVector*>& params, const ArmContext& x,
    Exec exec);

// full parameter gradient per context
std::vector<GradientVector> backward_many(const ParamVector& params,
                                          const std::vector<ArmContext>& xs,
                                          Exec exec);

// symmetric matrix G[i][j] = scale * <rows[i], rows[j]>
std::vector<std::vector<double>> gram(const std::vector<ArmContext>& rows,
                                      double scale, Exec exec);

std::vector<std::vector<double>> gram_of_grads(
    const std::vector<GradientVector>& grads, double scale, Exec exec);

}  // namespace mcnb
