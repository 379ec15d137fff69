#pragma once

#include <cstdint>
#include <vector>

#include "mcnb/network.hpp"

namespace mcnb {

using Matrix = std::vector<std::vector<double>>;

// E[relu(a) relu(b)] and E[relu'(a) relu'(b)] under a centered bivariate
// normal with covariance [[sii, sij], [sij, sjj]]. Closed arc-cosine
// forms; correlation clipped to [-1, 1] to absorb 1-ulp excursions.
struct ReluMoments {
  double m1 = 0.0;  // activation moment, scales linearly with the covariance
  double m2 = 0.0;  // derivative moment, scale invariant
};
ReluMoments relu_moments(double sii, double sij, double sjj);

// Level-by-level covariance and kernel matrices for the infinite-width
// limit of the network in network.hpp. Level 0 holds plain dot products;
// each of the depth-1 updates applies
//   sigma_next = 2 * m1(level), h_next = 2 * h * m2(level) + sigma_next.
struct KernelState {
  std::vector<Matrix> sigma;  // levels 0..depth-1
  std::vector<Matrix> h;
};
KernelState kernel_recursion(const std::vector<ArmContext>& contexts,
                             std::size_t depth);

// Final kernel (h_last + sigma_last) / 2, matching the infinite-width
// gradient Gram of the network at initialization.
struct NtkMatrix {
  Matrix h;
  std::vector<ArmContext> contexts;
};
NtkMatrix ntk_matrix(const std::vector<ArmContext>& contexts,
                     std::size_t depth);

double min_eigenvalue(const NtkMatrix& ntk);

// log det(I + H) / log(1 + t_times_k)
double effective_dimension(const NtkMatrix& ntk, std::size_t t_times_k);

// sqrt(h' H^{-1} h); unbounded when H is singular at the 1e-8 tolerance
struct SComplexity {
  bool unbounded = false;
  double value = 0.0;
};
SComplexity s_complexity(const NtkMatrix& ntk,
                         const std::vector<double>& rewards);

// Gram of parameter gradients at a fresh width-m initialization, with
// its Frobenius distance to the analytic kernel of the same contexts.
struct EmpiricalGram {
  Matrix g;
  double frobenius_gap = 0.0;
};
EmpiricalGram empirical_gram(const std::vector<ArmContext>& contexts,
                             const NetworkShape& shape, std::uint64_t seed);

struct ComplexityReport {
  double min_eigenvalue = 0.0;
  double effective_dimension = 0.0;
  SComplexity s;
  bool has_frobenius_gap = false;
  double frobenius_gap = 0.0;
};

}  // namespace mcnb
