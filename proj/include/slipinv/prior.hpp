#ifndef SLIPINV_PRIOR_HPP
#define SLIPINV_PRIOR_HPP

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "slipinv/mesh.hpp"

namespace slipinv {

struct MaternParams {
  double lambda_s = 40000.0;  // strike correlation length, m
  double lambda_d = 45000.0;  // dip correlation length, m
  double gamma_sq = 1.0;

  void validate() const {
    if (!(lambda_s > 0.0 && lambda_d > 0.0 && gamma_sq > 0.0))
      throw std::invalid_argument("matern params: lambda_s, lambda_d, gamma_sq must be positive");
  }
};

struct PriorSpec {
  double beta_s = 1.0;
  double beta_d = 0.2;
  double z_lim = 50000.0;       // m
  double bound_s_lo = -0.1;     // m
  double bound_s_hi = 0.1;
  double bound_d_lo = -0.0804;  // m
  double bound_d_hi = 0.4;
  double sigma_beta_sq = 2e-4;

  void validate() const {
    if (!(beta_s > 0.0 && beta_d > 0.0 && sigma_beta_sq > 0.0))
      throw std::invalid_argument("prior spec: beta_s, beta_d, sigma_beta_sq must be positive");
    if (!(bound_s_lo < bound_s_hi && bound_d_lo < bound_d_hi))
      throw std::invalid_argument("prior spec: bounds must satisfy lower < upper");
  }

  /// Interleaved (strike, dip) bound vectors of length 2M.
  Eigen::VectorXd lower_bounds(Eigen::Index m) const {
    Eigen::VectorXd lo(2 * m);
    for (Eigen::Index i = 0; i < m; ++i) {
      lo[2 * i] = bound_s_lo;
      lo[2 * i + 1] = bound_d_lo;
    }
    return lo;
  }
  Eigen::VectorXd upper_bounds(Eigen::Index m) const {
    Eigen::VectorXd hi(2 * m);
    for (Eigen::Index i = 0; i < m; ++i) {
      hi[2 * i] = bound_s_hi;
      hi[2 * i + 1] = bound_d_hi;
    }
    return hi;
  }
};

/// Dense symmetric positive definite matrix, validated at construction.
class PrecisionMatrix {
 public:
  explicit PrecisionMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols())
      throw std::invalid_argument("precision matrix: not square");
    const double scale = std::max(1.0, entries_.cwiseAbs().maxCoeff());
    if ((entries_ - entries_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw std::invalid_argument("precision matrix: not symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(entries_);
    if (llt.info() != Eigen::Success) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(entries_, Eigen::EigenvaluesOnly);
      const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
      throw std::runtime_error(
          "precision matrix: Cholesky failed, eigenvalue range [" + std::to_string(lo) + ", " +
          std::to_string(hi) + "], condition estimate " +
          std::to_string(lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity()));
    }
  }

  const Eigen::MatrixXd& entries() const { return entries_; }
  Eigen::Index size() const { return entries_.rows(); }

 private:
  Eigen::MatrixXd entries_;
};

/// Matern 3/2 correlation: gamma^2 (1 + sqrt(3) d/lambda) exp(-sqrt(3) d/lambda).
inline double matern_correlation(double dist, double lambda, double gamma_sq = 1.0) {
  if (!(dist >= 0.0)) throw std::domain_error("matern_correlation: dist must be >= 0");
  if (!(lambda > 0.0)) throw std::domain_error("matern_correlation: lambda must be positive");
  if (!(gamma_sq > 0.0)) throw std::domain_error("matern_correlation: gamma_sq must be positive");
  const double s = std::sqrt(3.0) * dist / lambda;
  return gamma_sq * (1.0 + s) * std::exp(-s);
}

/// Interleaved 2M x 2M correlation matrix. Strike and dip blocks each get
/// their own correlation length; cross entries are exactly zero.
inline Eigen::MatrixXd build_correlation_matrix(const FaultMesh& mesh, const MaternParams& params) {
  mesh.validate();
  params.validate();
  const Eigen::Index m = mesh.subfault_count();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i; j < m; ++j) {
      const double d = mesh.pairwise_distance(i, j);
      const double cs = matern_correlation(d, params.lambda_s, params.gamma_sq);
      const double cd = matern_correlation(d, params.lambda_d, params.gamma_sq);
      c(2 * i, 2 * j) = c(2 * j, 2 * i) = cs;
      c(2 * i + 1, 2 * j + 1) = c(2 * j + 1, 2 * i + 1) = cd;
    }
  }
  return c;
}

/// Depth penalty weights, one per subfault, duplicated onto both components.
inline Eigen::VectorXd build_weight_matrix(const FaultMesh& mesh, double z_lim) {
  if (!(z_lim > 0.0)) throw std::domain_error("build_weight_matrix: z_lim must be positive");
  mesh.validate();
  const Eigen::Index m = mesh.subfault_count();
  Eigen::VectorXd w(2 * m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double depth = mesh.depths[i];
    const double wi = depth > z_lim ? 1.0 + 0.5 * (depth - z_lim) / 1000.0 : 1.0;
    w[2 * i] = w[2 * i + 1] = wi;
  }
  return w;
}

namespace detail {
// Invert one component block of C through its Cholesky factor.
inline Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& block, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(block);
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
    throw std::runtime_error(std::string(what) + ": Cholesky failed, condition estimate " +
                             std::to_string(lo > 0.0 ? hi / lo
                                                     : std::numeric_limits<double>::infinity()));
  }
  return llt.solve(Eigen::MatrixXd::Identity(block.rows(), block.cols()));
}
}  // namespace detail

/// A0 = beta W C^{-1} W beta on the interleaved ordering. C is inverted
/// blockwise per component, which keeps the cross blocks exactly zero.
inline PrecisionMatrix build_prior_precision(const Eigen::MatrixXd& correlation,
                                             const Eigen::VectorXd& weights,
                                             const PriorSpec& spec) {
  spec.validate();
  const Eigen::Index n = correlation.rows();
  if (n % 2 != 0 || correlation.cols() != n)
    throw std::invalid_argument("build_prior_precision: correlation must be 2M x 2M");
  if (weights.size() != n)
    throw std::invalid_argument("build_prior_precision: weights length must be 2M");
  const Eigen::Index m = n / 2;

  Eigen::MatrixXd cs(m, m), cd(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      cs(i, j) = correlation(2 * i, 2 * j);
      cd(i, j) = correlation(2 * i + 1, 2 * j + 1);
    }
  const Eigen::MatrixXd cs_inv = detail::spd_inverse(cs, "prior correlation (strike)");
  const Eigen::MatrixXd cd_inv = detail::spd_inverse(cd, "prior correlation (dip)");

  Eigen::MatrixXd a0 = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      a0(2 * i, 2 * j) = spec.beta_s * weights[2 * i] * cs_inv(i, j) * weights[2 * j] * spec.beta_s;
      a0(2 * i + 1, 2 * j + 1) =
          spec.beta_d * weights[2 * i + 1] * cd_inv(i, j) * weights[2 * j + 1] * spec.beta_d;
    }
  a0 = 0.5 * (a0 + a0.transpose()).eval();
  return PrecisionMatrix(std::move(a0));
}

/// log of the unnormalized prior density; -inf outside the box.
inline double prior_log_density_unnormalized(const Eigen::VectorXd& d, const PrecisionMatrix& a0,
                                             const PriorSpec& spec) {
  if (d.size() != a0.size())
    throw std::invalid_argument("prior_log_density_unnormalized: slip vector length mismatch");
  const Eigen::Index m = d.size() / 2;
  const Eigen::VectorXd lo = spec.lower_bounds(m), hi = spec.upper_bounds(m);
  for (Eigen::Index i = 0; i < d.size(); ++i)
    if (d[i] < lo[i] || d[i] > hi[i]) return -std::numeric_limits<double>::infinity();
  return -0.5 / spec.sigma_beta_sq * d.dot(a0.entries() * d);
}

}  // namespace slipinv

#endif
