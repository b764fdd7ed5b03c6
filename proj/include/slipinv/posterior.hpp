#ifndef SLIPINV_POSTERIOR_HPP
#define SLIPINV_POSTERIOR_HPP

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "slipinv/greens.hpp"
#include "slipinv/prior.hpp"

namespace slipinv {

struct LikelihoodSpec {
  Eigen::Vector3d axis_sigmas{0.0021, 0.0025, 0.0051};  // meters

  void validate() const {
    if (!(axis_sigmas.array() > 0.0).all())
      throw std::invalid_argument("likelihood spec: axis sigmas must be positive");
  }

  /// Diagonal of the noise precision A = Sigma^{-1}, length 3N.
  Eigen::VectorXd noise_precision_diagonal(Eigen::Index n_stations) const {
    validate();
    Eigen::VectorXd diag(3 * n_stations);
    for (Eigen::Index k = 0; k < n_stations; ++k)
      for (int r = 0; r < 3; ++r) diag[3 * k + r] = 1.0 / (axis_sigmas[r] * axis_sigmas[r]);
    return diag;
  }
};

/// Gaussian density restricted to a box, in mean/precision form. Covariance,
/// correlation and the precision eigendecomposition are computed once at
/// construction and shared read-only afterwards.
class MTNDistribution {
 public:
  MTNDistribution(Eigen::VectorXd mean, Eigen::MatrixXd precision, Eigen::VectorXd lower,
                  Eigen::VectorXd upper)
      : mean_(std::move(mean)),
        precision_(std::move(precision)),
        lower_(std::move(lower)),
        upper_(std::move(upper)) {
    const Eigen::Index n = mean_.size();
    if (precision_.rows() != n || precision_.cols() != n || lower_.size() != n ||
        upper_.size() != n)
      throw std::invalid_argument("mtn: inconsistent dimensions");
    if (!mean_.allFinite()) throw std::invalid_argument("mtn: mean must be finite");
    for (Eigen::Index i = 0; i < n; ++i)
      if (!(lower_[i] < upper_[i]))
        throw std::invalid_argument("mtn: bounds must satisfy lower < upper (index " +
                                    std::to_string(i) + ")");
    const double scale = std::max(1.0, precision_.cwiseAbs().maxCoeff());
    if ((precision_ - precision_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw std::invalid_argument("mtn: precision not symmetric");

    Eigen::LLT<Eigen::MatrixXd> llt(precision_);
    if (llt.info() != Eigen::Success) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(precision_, Eigen::EigenvaluesOnly);
      const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
      throw std::runtime_error("mtn: precision Cholesky failed, condition estimate " +
                               std::to_string(lo > 0.0 ? hi / lo
                                                       : std::numeric_limits<double>::infinity()));
    }
    covariance_ = llt.solve(Eigen::MatrixXd::Identity(n, n));
    covariance_ = 0.5 * (covariance_ + covariance_.transpose()).eval();

    Eigen::VectorXd inv_sd = covariance_.diagonal().cwiseSqrt().cwiseInverse();
    correlation_ = inv_sd.asDiagonal() * covariance_ * inv_sd.asDiagonal();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(precision_);
    if (es.info() != Eigen::Success) throw std::runtime_error("mtn: eigendecomposition failed");
    eigenvalues_ = es.eigenvalues();
    eigenvectors_ = es.eigenvectors();
  }

  Eigen::Index dim() const { return mean_.size(); }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& precision() const { return precision_; }
  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }
  const Eigen::MatrixXd& covariance() const { return covariance_; }
  const Eigen::MatrixXd& correlation() const { return correlation_; }
  const Eigen::VectorXd& precision_eigenvalues() const { return eigenvalues_; }
  const Eigen::MatrixXd& precision_eigenvectors() const { return eigenvectors_; }

  bool inside_box(const Eigen::VectorXd& x) const {
    return (x.array() > lower_.array()).all() && (x.array() < upper_.array()).all();
  }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd precision_;
  Eigen::VectorXd lower_, upper_;
  Eigen::MatrixXd covariance_;
  Eigen::MatrixXd correlation_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
};

/// Gaussian log likelihood of the observations given a slip vector.
inline double log_likelihood(const Eigen::VectorXd& d, const ObservationVector& y,
                             const GreensMatrix& x, const LikelihoodSpec& spec) {
  const Eigen::Index rows = x.entries.rows();
  if (y.values.size() != rows || d.size() != x.entries.cols())
    throw std::invalid_argument("log_likelihood: shape mismatch");
  const Eigen::Index n = rows / 3;
  const Eigen::VectorXd a_diag = spec.noise_precision_diagonal(n);
  const Eigen::VectorXd resid = y.values - x.entries * d;
  const double log_det_a = a_diag.array().log().sum();
  return -0.5 * static_cast<double>(rows) * std::log(2.0 * std::numbers::pi) + 0.5 * log_det_a -
         0.5 * resid.dot(a_diag.asDiagonal() * resid);
}

/// Conjugate update: precision X^T A X + A0 / sigma_beta^2, mean solved by
/// Cholesky. Bounds are the prior box tiled over subfaults.
inline MTNDistribution build_posterior(const ObservationVector& y, const GreensMatrix& x,
                                       const LikelihoodSpec& likelihood, const PrecisionMatrix& a0,
                                       const PriorSpec& spec) {
  spec.validate();
  const Eigen::Index rows = x.entries.rows();
  const Eigen::Index cols = x.entries.cols();
  if (y.values.size() != rows || a0.size() != cols)
    throw std::invalid_argument("build_posterior: shape mismatch");
  const Eigen::VectorXd a_diag = likelihood.noise_precision_diagonal(rows / 3);

  Eigen::MatrixXd xtax = x.entries.transpose() * a_diag.asDiagonal() * x.entries;
  Eigen::MatrixXd a_p = xtax + a0.entries() / spec.sigma_beta_sq;
  a_p = 0.5 * (a_p + a_p.transpose()).eval();

  Eigen::LLT<Eigen::MatrixXd> llt(a_p);
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a_p, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
    throw std::runtime_error("build_posterior: Cholesky failed, condition estimate " +
                             std::to_string(lo > 0.0 ? hi / lo
                                                     : std::numeric_limits<double>::infinity()));
  }
  Eigen::VectorXd rhs = x.entries.transpose() * (a_diag.asDiagonal() * y.values);
  Eigen::VectorXd mu_p = llt.solve(rhs);

  const Eigen::Index m = cols / 2;
  return MTNDistribution(std::move(mu_p), std::move(a_p), spec.lower_bounds(m),
                         spec.upper_bounds(m));
}

}  // namespace slipinv

#endif
