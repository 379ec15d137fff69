#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "mcnb/errors.hpp"
#include "mcnb/network.hpp"
#include "mcnb/rng.hpp"

using namespace mcnb;

namespace {

// straight-line reference evaluation, written independently of forward():
// explicit matrix-vector products over per-layer matrices
double reference_forward(const ParamVector& p, const std::vector<double>& x) {
  const NetworkShape& s = p.shape;
  std::vector<double> cur = x;
  for (std::size_t l = 1; l < s.depth; ++l) {
    std::vector<double> nxt(s.width, 0.0);
    const double* W = p.layer(l);
    for (std::size_t i = 0; i < s.width; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < cur.size(); ++j) {
        acc += W[i * cur.size() + j] * cur[j];
      }
      nxt[i] = std::max(acc, 0.0);
    }
    cur = nxt;
  }
  const double* WL = p.layer(s.depth);
  double out = 0.0;
  for (std::size_t j = 0; j < s.width; ++j) out += WL[j] * cur[j];
  return out;
}

// true when every hidden pre-activation is at least `margin` away from
// the ReLU kink, so central differences see a locally linear function
bool off_kink(const ParamVector& p, const std::vector<double>& x,
              double margin) {
  const NetworkShape& s = p.shape;
  std::vector<double> cur = x;
  for (std::size_t l = 1; l < s.depth; ++l) {
    std::vector<double> nxt(s.width, 0.0);
    const double* W = p.layer(l);
    for (std::size_t i = 0; i < s.width; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < cur.size(); ++j) {
        acc += W[i * cur.size() + j] * cur[j];
      }
      if (std::fabs(acc) < margin) return false;
      nxt[i] = std::max(acc, 0.0);
    }
    cur = nxt;
  }
  return true;
}

std::vector<double> random_context(Rng& rng, std::size_t d) {
  std::vector<double> x(d);
  for (double& v : x) v = rng.gaussian();
  return x;
}

double fd_max_rel_err(const ParamVector& params, const std::vector<double>& x,
                      double eps) {
  GradientVector g = backward(params, x);
  ParamVector probe = params;
  double worst = 0.0;
  for (std::size_t i = 0; i < params.values.size(); ++i) {
    probe.values[i] = params.values[i] + eps;
    const double up = forward(probe, x);
    probe.values[i] = params.values[i] - eps;
    const double dn = forward(probe, x);
    probe.values[i] = params.values[i];
    const double fd = (up - dn) / (2.0 * eps);
    const double rel =
        std::fabs(fd - g.values[i]) / std::max(1.0, std::fabs(g.values[i]));
    worst = std::max(worst, rel);
  }
  return worst;
}

}  // namespace

TEST_CASE("param count and layer offsets") {
  NetworkShape s{10, 16, 3};
  CHECK(s.param_count() == 16 * 10 + 16 * 16 + 16);
  CHECK(s.layer_offset(1) == 0);
  CHECK(s.layer_offset(2) == 160);
  CHECK(s.layer_offset(3) == 160 + 256);
  NetworkShape two{4, 100, 2};
  CHECK(two.param_count() == 400 + 100);
  CHECK(two.layer_offset(2) == 400);
}

TEST_CASE("invalid shape rejected") {
  CHECK_THROWS_AS(zero_params(NetworkShape{0, 4, 2}), Error);
  CHECK_THROWS_AS(zero_params(NetworkShape{4, 0, 2}), Error);
  CHECK_THROWS_AS(zero_params(NetworkShape{4, 4, 1}), Error);
}

TEST_CASE("flatten round-trip is bit exact") {
  NetworkShape s{3, 5, 3};
  Rng rng(77);
  ParamVector p = zero_params(s);
  for (double& v : p.values) v = rng.gaussian();
  // split into per-layer copies, reassemble through offsets
  std::vector<double> rebuilt(s.param_count());
  for (std::size_t l = 1; l <= s.depth; ++l) {
    const std::size_t len = s.layer_rows(l) * s.layer_cols(l);
    std::vector<double> block(p.layer(l), p.layer(l) + len);
    std::copy(block.begin(), block.end(), rebuilt.begin() + s.layer_offset(l));
  }
  CHECK(rebuilt == p.values);
}

TEST_CASE("init variance close to 2/m for hidden layer") {
  ParamVector p = init_params(NetworkShape{4, 100, 2}, 1234);
  double mean = 0.0, var = 0.0;
  const std::size_t n = 400;  // W_1 entries
  for (std::size_t i = 0; i < n; ++i) mean += p.values[i];
  mean /= n;
  for (std::size_t i = 0; i < n; ++i) {
    var += (p.values[i] - mean) * (p.values[i] - mean);
  }
  var /= n;
  CHECK(var == doctest::Approx(0.02).epsilon(0.2));
}

TEST_CASE("init deterministic for a fixed seed") {
  ParamVector a = init_params(NetworkShape{4, 100, 2}, 99);
  ParamVector b = init_params(NetworkShape{4, 100, 2}, 99);
  CHECK(a.values == b.values);
  ParamVector c = init_params(NetworkShape{4, 100, 2}, 100);
  CHECK(a.values != c.values);
}

TEST_CASE("output layer sample mean within 3 standard errors of 0") {
  NetworkShape s{4, 10000, 2};
  ParamVector p = init_params(s, 2024);
  double mean = 0.0;
  const double* wl = p.layer(2);
  for (std::size_t j = 0; j < s.width; ++j) mean += wl[j];
  mean /= static_cast<double>(s.width);
  // sd = sqrt(1/m) = 0.01, SE over 10000 entries = 1e-4, bound 3e-4
  CHECK(std::fabs(mean) < 3.0 * std::sqrt(1.0 / 10000.0) / 100.0);
}

TEST_CASE("forward zero weights gives zero") {
  ParamVector p = zero_params(NetworkShape{5, 8, 3});
  CHECK(forward(p, {1.0, -2.0, 0.5, 3.0, -1.0}) == 0.0);
}

TEST_CASE("forward hand-unrolled two-layer case") {
  NetworkShape s{2, 1, 2};
  ParamVector p = zero_params(s);
  p.values = {1.0, 0.0, 1.0};  // W_1 = [1, 0], W_2 = [1]
  CHECK(forward(p, {0.6, 0.8}) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(forward(p, {-0.6, 0.8}) == 0.0);  // ReLU kills negative input
}

TEST_CASE("forward matches independent reference on random instances") {
  Rng rng(5150);
  for (int rep = 0; rep < 20; ++rep) {
    NetworkShape s{3 + rng.uniform_index(4), 2 + rng.uniform_index(6),
                   2 + rng.uniform_index(3)};
    ParamVector p = init_params(s, rng.next_u64());
    std::vector<double> x = random_context(rng, s.input_dim);
    CHECK(forward(p, x) ==
          doctest::Approx(reference_forward(p, x)).epsilon(1e-12));
  }
}

TEST_CASE("forward dimension mismatch raises structured error") {
  ParamVector p = zero_params(NetworkShape{4, 3, 2});
  CHECK_THROWS_WITH_AS(forward(p, {1.0, 2.0}),
                       doctest::Contains("expected size 4"), DimensionError);
}

TEST_CASE("forward linear in output layer") {
  Rng rng(31);
  NetworkShape s{4, 6, 3};
  ParamVector p = init_params(s, 8);
  std::vector<double> x = random_context(rng, 4);
  const double base = forward(p, x);
  ParamVector scaled = p;
  double* wl = scaled.layer(s.depth);
  for (std::size_t j = 0; j < s.width; ++j) wl[j] *= -2.5;
  CHECK(forward(scaled, x) == doctest::Approx(-2.5 * base).epsilon(1e-12));
}

TEST_CASE("dead relu zeroes the touched gradient blocks") {
  NetworkShape s{2, 1, 2};
  ParamVector p = zero_params(s);
  p.values = {-1.0, 0.0, 1.0};  // pre-activation -1 for x=(1,0)
  GradientVector g = backward(p, {1.0, 0.0});
  for (double v : g.values) CHECK(v == 0.0);
}

TEST_CASE("output layer gradient equals last hidden activation") {
  Rng rng(404);
  NetworkShape s{5, 7, 3};
  ParamVector p = init_params(s, 11);
  std::vector<double> x = random_context(rng, 5);
  GradientVector g = backward(p, x);
  // recompute h_{L-1} through the reference path
  std::vector<double> cur = x;
  for (std::size_t l = 1; l < s.depth; ++l) {
    std::vector<double> nxt(s.width, 0.0);
    const double* W = p.layer(l);
    for (std::size_t i = 0; i < s.width; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < cur.size(); ++j) {
        acc += W[i * cur.size() + j] * cur[j];
      }
      nxt[i] = std::max(acc, 0.0);
    }
    cur = nxt;
  }
  const double* gl = g.layer(s.depth);
  for (std::size_t j = 0; j < s.width; ++j) {
    CHECK(gl[j] == doctest::Approx(cur[j]).epsilon(1e-14));
  }
}

TEST_CASE("gradient matches central finite differences") {
  Rng rng(606);
  const double eps = 1e-5;
  int done = 0;
  while (done < 10) {
    NetworkShape s{3, 4, 2 + rng.uniform_index(2)};
    ParamVector p = init_params(s, rng.next_u64());
    std::vector<double> x = random_context(rng, 3);
    if (!off_kink(p, x, 1e-3)) continue;
    CHECK(fd_max_rel_err(p, x, eps) < 1e-4);
    ++done;
  }
}

TEST_CASE("loss examples") {
  NetworkShape s{2, 1, 2};
  ParamVector p = zero_params(s);
  p.values = {1.0, 0.0, 1.0};
  SUBCASE("zero residual gives zero loss and gradient") {
    auto [loss, g] = loss_and_grad(p, {0.6, 0.0}, 0.6);
    CHECK(loss == doctest::Approx(0.0).epsilon(1e-15));
    for (double v : g.values) CHECK(v == doctest::Approx(0.0).epsilon(1e-15));
  }
  SUBCASE("f=0.5, r=0 gives loss 0.125 and half the plain gradient") {
    auto [loss, g] = loss_and_grad(p, {0.5, 0.0}, 0.0);
    CHECK(loss == doctest::Approx(0.125).epsilon(1e-15));
    GradientVector plain = backward(p, {0.5, 0.0});
    for (std::size_t i = 0; i < g.values.size(); ++i) {
      CHECK(g.values[i] ==
            doctest::Approx(0.5 * plain.values[i]).epsilon(1e-15));
    }
  }
}

TEST_CASE("loss gradient matches finite differences of the loss") {
  Rng rng(707);
  const double eps = 1e-5;
  int done = 0;
  while (done < 5) {
    NetworkShape s{3, 5, 3};
    ParamVector p = init_params(s, rng.next_u64());
    std::vector<double> x = random_context(rng, 3);
    if (!off_kink(p, x, 1e-3)) continue;
    const double r = rng.uniform();
    auto [loss, g] = loss_and_grad(p, x, r);
    (void)loss;
    ParamVector probe = p;
    double worst = 0.0;
    for (std::size_t i = 0; i < p.values.size(); ++i) {
      probe.values[i] = p.values[i] + eps;
      const double up = loss_and_grad(probe, x, r).first;
      probe.values[i] = p.values[i] - eps;
      const double dn = loss_and_grad(probe, x, r).first;
      probe.values[i] = p.values[i];
      const double fd = (up - dn) / (2.0 * eps);
      worst = std::max(worst, std::fabs(fd - g.values[i]) /
                                  std::max(1.0, std::fabs(g.values[i])));
    }
    CHECK(worst < 1e-4);
    ++done;
  }
}

TEST_CASE("grad_l2_distance basics and naive oracle") {
  NetworkShape s{2, 3, 2};
  GradientVector a = zero_params(s);
  GradientVector b = zero_params(s);
  CHECK(grad_l2_distance(a, b) == 0.0);
  b.values[4] = 3.0;
  CHECK(grad_l2_distance(a, b) == doctest::Approx(3.0).epsilon(1e-15));
  Rng rng(9);
  for (double& v : a.values) v = rng.gaussian();
  for (double& v : b.values) v = rng.gaussian();
  double acc = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    acc += (a.values[i] - b.values[i]) * (a.values[i] - b.values[i]);
  }
  CHECK(grad_l2_distance(a, b) ==
        doctest::Approx(std::sqrt(acc)).epsilon(1e-14));
  GradientVector small = zero_params(NetworkShape{2, 2, 2});
  CHECK_THROWS_AS(grad_l2_distance(a, small), DimensionError);
}
