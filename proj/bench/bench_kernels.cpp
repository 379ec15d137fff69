// Side-by-side timing of the serial and OpenMP batch kernels. Outputs a
// plain table; correctness of serial==parallel is covered by the tests.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#include "mcnb/kernels.hpp"
#include "mcnb/network.hpp"
#include "mcnb/rng.hpp"

using namespace mcnb;

namespace {

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::vector<ArmContext> random_unit_contexts(std::size_t n, std::size_t dim,
                                             Rng& rng) {
  std::vector<ArmContext> xs(n, ArmContext(dim));
  for (auto& x : xs) {
    double norm2 = 0.0;
    for (double& v : x) {
      v = rng.gaussian();
      norm2 += v * v;
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& v : x) v *= inv;
  }
  return xs;
}

template <typename F>
double time_best_of(std::size_t reps, F&& body) {
  double best = 1e300;
  for (std::size_t r = 0; r < reps; ++r) {
    const double t0 = now_s();
    body();
    best = std::min(best, now_s() - t0);
  }
  return best;
}

void report(const char* name, double serial_s, double parallel_s) {
  std::printf("%-22s %10.4f ms %10.4f ms %8.2fx\n", name, serial_s * 1e3,
              parallel_s * 1e3, serial_s / parallel_s);
}

}  // namespace

int main() {
  const NetworkShape shape{20, 256, 2};
  const std::size_t n_contexts = 64;
  const std::size_t n_params = 128;
  const std::size_t reps = 5;

  Rng rng(12345);
  const ParamVector params = init_params(shape, 99);
  const std::vector<ArmContext> xs =
      random_unit_contexts(n_contexts, shape.input_dim, rng);

  std::vector<ParamVector> many_params;
  many_params.reserve(n_params);
  for (std::size_t i = 0; i < n_params; ++i) {
    many_params.push_back(init_params(shape, 1000 + i));
  }
  std::vector<const ParamVector*> param_ptrs;
  for (const ParamVector& p : many_params) param_ptrs.push_back(&p);

  std::printf("network d=%zu m=%zu L=%zu, %zu contexts, %zu param sets\n\n",
              shape.input_dim, shape.width, shape.depth, n_contexts,
              n_params);
  std::printf("%-22s %13s %13s %9s\n", "kernel", "serial", "parallel",
              "speedup");

  {
    std::vector<double> sink;
    const double ts = time_best_of(
        reps, [&] { sink = forward_many(params, xs, Exec::serial); });
    const double tp = time_best_of(
        reps, [&] { sink = forward_many(params, xs, Exec::parallel); });
    report("forward_many", ts, tp);
  }
  {
    std::vector<double> sink;
    const double ts = time_best_of(reps, [&] {
      sink = forward_over_params(param_ptrs, xs[0], Exec::serial);
    });
    const double tp = time_best_of(reps, [&] {
      sink = forward_over_params(param_ptrs, xs[0], Exec::parallel);
    });
    report("forward_over_params", ts, tp);
  }
  std::vector<GradientVector> grads;
  {
    const double ts = time_best_of(
        reps, [&] { grads = backward_many(params, xs, Exec::serial); });
    const double tp = time_best_of(
        reps, [&] { grads = backward_many(params, xs, Exec::parallel); });
    report("backward_many", ts, tp);
  }
  {
    std::vector<std::vector<double>> sink;
    const double ts =
        time_best_of(reps, [&] { sink = gram(xs, 1.0, Exec::serial); });
    const double tp =
        time_best_of(reps, [&] { sink = gram(xs, 1.0, Exec::parallel); });
    report("gram", ts, tp);
  }
  {
    std::vector<std::vector<double>> sink;
    const double ts = time_best_of(
        reps, [&] { sink = gram_of_grads(grads, 1.0, Exec::serial); });
    const double tp = time_best_of(
        reps, [&] { sink = gram_of_grads(grads, 1.0, Exec::parallel); });
    report("gram_of_grads", ts, tp);
  }
  return 0;
}
