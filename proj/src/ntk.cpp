#include "mcnb/ntk.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "mcnb/errors.hpp"
#include "mcnb/kernels.hpp"

namespace mcnb {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSingularTol = 1e-8;

Eigen::MatrixXd to_eigen(const Matrix& m) {
  const std::size_t n = m.size();
  Eigen::MatrixXd out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(m[i][j])) {
        throw Error("non_finite", "kernel matrix has a non-finite entry");
      }
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          m[i][j];
    }
  }
  return out;
}

void check_contexts(const std::vector<ArmContext>& contexts,
                    std::size_t depth) {
  if (contexts.empty()) {
    throw Error("invalid_argument", "kernel needs at least one context");
  }
  if (depth < 2) {
    throw Error("invalid_argument",
                "kernel depth must be >= 2, got " + std::to_string(depth));
  }
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    double n2 = 0.0;
    for (double v : contexts[i]) n2 += v * v;
    if (std::fabs(std::sqrt(n2) - 1.0) > 1e-8) {
      throw Error("non_unit_context",
                  "context " + std::to_string(i) + " has norm " +
                      std::to_string(std::sqrt(n2)) + ", expected 1");
    }
  }
}

}  // namespace

ReluMoments relu_moments(double sii, double sij, double sjj) {
  if (!(sii > 0.0) || !(sjj > 0.0)) {
    throw Error("invalid_covariance",
                "variances must be positive, got sii=" + std::to_string(sii) +
                    " sjj=" + std::to_string(sjj));
  }
  const double denom = std::sqrt(sii * sjj);
  double rho = sij / denom;
  if (rho > 1.0 + 1e-12 || rho < -1.0 - 1e-12) {
    throw Error("invalid_covariance",
                "correlation " + std::to_string(rho) + " outside [-1, 1]");
  }
  rho = std::min(1.0, std::max(-1.0, rho));
  const double theta = std::acos(rho);
  ReluMoments m;
  m.m1 = denom * (std::sin(theta) + (kPi - theta) * std::cos(theta)) /
         (2.0 * kPi);
  m.m2 = (kPi - theta) / (2.0 * kPi);
  return m;
}

KernelState kernel_recursion(const std::vector<ArmContext>& contexts,
                             std::size_t depth) {
  check_contexts(contexts, depth);
  const std::size_t n = contexts.size();
  KernelState ks;
  ks.sigma.push_back(gram(contexts, 1.0, Exec::serial));
  ks.h.push_back(ks.sigma.back());
  for (std::size_t level = 1; level < depth; ++level) {
    const Matrix& s_prev = ks.sigma.back();
    const Matrix& h_prev = ks.h.back();
    Matrix s_next(n, std::vector<double>(n, 0.0));
    Matrix h_next(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        ReluMoments m = relu_moments(s_prev[i][i], s_prev[i][j], s_prev[j][j]);
        s_next[i][j] = 2.0 * m.m1;
        h_next[i][j] = 2.0 * h_prev[i][j] * m.m2 + s_next[i][j];
        s_next[j][i] = s_next[i][j];
        h_next[j][i] = h_next[i][j];
      }
    }
    ks.sigma.push_back(std::move(s_next));
    ks.h.push_back(std::move(h_next));
  }
  return ks;
}

NtkMatrix ntk_matrix(const std::vector<ArmContext>& contexts,
                     std::size_t depth) {
  KernelState ks = kernel_recursion(contexts, depth);
  const std::size_t n = contexts.size();
  NtkMatrix out;
  out.contexts = contexts;
  out.h.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out.h[i][j] = 0.5 * (ks.h.back()[i][j] + ks.sigma.back()[i][j]);
    }
  }
  return out;
}

double min_eigenvalue(const NtkMatrix& ntk) {
  Eigen::MatrixXd h = to_eigen(ntk.h);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h,
                                                    Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw Error("eigensolve_failed", "symmetric eigensolve did not converge");
  }
  return es.eigenvalues().minCoeff();
}

double effective_dimension(const NtkMatrix& ntk, std::size_t t_times_k) {
  if (t_times_k == 0) {
    throw Error("invalid_argument", "context count T*K must be positive");
  }
  Eigen::MatrixXd a = to_eigen(ntk.h);
  a += Eigen::MatrixXd::Identity(a.rows(), a.cols());
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw Error("not_positive_definite",
                "I + H failed Cholesky; kernel matrix is corrupted");
  }
  const double logdet =
      2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return logdet / std::log(1.0 + static_cast<double>(t_times_k));
}

SComplexity s_complexity(const NtkMatrix& ntk,
                         const std::vector<double>& rewards) {
  const std::size_t n = ntk.h.size();
  if (rewards.size() != n) {
    throw DimensionError("s_complexity rewards", n, rewards.size());
  }
  SComplexity out;
  if (min_eigenvalue(ntk) <= kSingularTol) {
    out.unbounded = true;
    return out;
  }
  Eigen::MatrixXd h = to_eigen(ntk.h);
  Eigen::VectorXd r(n);
  for (std::size_t i = 0; i < n; ++i) {
    r(static_cast<Eigen::Index>(i)) = rewards[i];
  }
  Eigen::VectorXd y = Eigen::LDLT<Eigen::MatrixXd>(h).solve(r);
  out.value = std::sqrt(std::max(0.0, r.dot(y)));
  return out;
}

EmpiricalGram empirical_gram(const std::vector<ArmContext>& contexts,
                             const NetworkShape& shape, std::uint64_t seed) {
  check_contexts(contexts, shape.depth);
  ParamVector p0 = init_params(shape, seed);
  std::vector<GradientVector> grads =
      backward_many(p0, contexts, Exec::parallel);
  EmpiricalGram out;
  out.g = gram_of_grads(grads, 1.0, Exec::parallel);
  NtkMatrix analytic = ntk_matrix(contexts, shape.depth);
  double acc = 0.0;
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    for (std::size_t j = 0; j < contexts.size(); ++j) {
      const double d = out.g[i][j] - analytic.h[i][j];
      acc += d * d;
    }
  }
  out.frobenius_gap = std::sqrt(acc);
  return out;
}

}  // namespace mcnb
