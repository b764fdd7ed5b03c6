#ifndef SLIPINV_HYPEROPT_HPP
#define SLIPINV_HYPEROPT_HPP

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "slipinv/prior.hpp"

namespace slipinv {

struct HyperPriors {
  double a = 1.0;
  double b = 1.0;
  double a_beta = 1.0;
  double b_beta = 1.0;

  void validate() const {
    if (!(a > 0.0 && b > 0.0 && a_beta > 0.0 && b_beta > 0.0))
      throw std::invalid_argument("hyper priors: all parameters must be positive");
  }
};

struct HyperOptOptions {
  int grid_points = 50;
  double bracket_lo = 1e-8;
  double bracket_hi = 1e2;
  double golden_tol = 1e-6;  // relative, in log space
};

/// Marginal data covariance Sigma_py = A^{-1} sigma^2 + X A0^{-1} X^T sigma_beta^2,
/// where a_unit_diag is the diagonal of the unit-scaled noise precision.
inline Eigen::MatrixXd marginal_covariance(double sigma_sq, double sigma_beta_sq,
                                           const Eigen::MatrixXd& x,
                                           const Eigen::VectorXd& a_unit_diag,
                                           const PrecisionMatrix& a0) {
  if (!(sigma_sq > 0.0)) throw std::domain_error("marginal_covariance: sigma_sq must be positive");
  if (!(sigma_beta_sq >= 0.0))
    throw std::domain_error("marginal_covariance: sigma_beta_sq must be non-negative");
  if (x.rows() != a_unit_diag.size() || x.cols() != a0.size())
    throw std::invalid_argument("marginal_covariance: shape mismatch");

  Eigen::MatrixXd sigma_py =
      (sigma_sq * a_unit_diag.cwiseInverse()).asDiagonal().toDenseMatrix();
  if (sigma_beta_sq > 0.0 && x.cols() > 0) {
    Eigen::LLT<Eigen::MatrixXd> llt(a0.entries());
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("marginal_covariance: A0 Cholesky failed");
    sigma_py += sigma_beta_sq * (x * llt.solve(x.transpose()));
  }
  return 0.5 * (sigma_py + sigma_py.transpose()).eval();
}

namespace detail {
// ln det Sigma_py + Y^T Sigma_py^{-1} Y, the data-dependent part of the
// hyperparameter objective.
inline double marginal_core(double sigma_sq, double sigma_beta_sq, const Eigen::VectorXd& y,
                            const Eigen::MatrixXd& x, const Eigen::VectorXd& a_unit_diag,
                            const PrecisionMatrix& a0) {
  const Eigen::MatrixXd sigma_py = marginal_covariance(sigma_sq, sigma_beta_sq, x, a_unit_diag, a0);
  Eigen::LLT<Eigen::MatrixXd> llt(sigma_py);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("hyperopt: Sigma_py Cholesky failed");
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < sigma_py.rows(); ++i)
    log_det += 2.0 * std::log(llt.matrixL()(i, i));
  return log_det + y.dot(llt.solve(y));
}
}  // namespace detail

/// Negative log marginal posterior of the variance hyperparameters:
/// l = ln det Sigma_py + Y^T Sigma_py^{-1} Y
///     + (a_beta+1) ln sigma_beta^2 + b_beta/sigma_beta^2
///     + (a+1) ln sigma^2 + b/sigma^2.
inline double neg_log_marginal_posterior(double sigma_sq, double sigma_beta_sq,
                                         const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                                         const Eigen::VectorXd& a_unit_diag,
                                         const PrecisionMatrix& a0, const HyperPriors& priors) {
  priors.validate();
  if (!(sigma_sq > 0.0 && sigma_beta_sq > 0.0))
    throw std::domain_error("neg_log_marginal_posterior: variances must be positive");
  return detail::marginal_core(sigma_sq, sigma_beta_sq, y, x, a_unit_diag, a0) +
         (priors.a_beta + 1.0) * std::log(sigma_beta_sq) + priors.b_beta / sigma_beta_sq +
         (priors.a + 1.0) * std::log(sigma_sq) + priors.b / sigma_sq;
}

struct HyperOptResult {
  double sigma_sq = 0.0;
  double sigma_beta_sq = 0.0;
  double value = 0.0;
  bool at_boundary = false;
  // evaluated grid, one row per point: {sigma_sq, sigma_beta_sq, value}
  std::vector<std::array<double, 3>> grid;
};

namespace detail {

inline std::vector<double> log_grid(double lo, double hi, int points) {
  std::vector<double> g(static_cast<std::size_t>(points));
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < points; ++i)
    g[static_cast<std::size_t>(i)] =
        std::exp(llo + (lhi - llo) * static_cast<double>(i) / static_cast<double>(points - 1));
  return g;
}

// Golden-section minimization of f(exp(t)) on [log lo, log hi].
inline std::pair<double, double> golden_section_log(const std::function<double(double)>& f,
                                                    double lo, double hi, double tol) {
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = std::log(lo), b = std::log(hi);
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = f(std::exp(x1)), f2 = f(std::exp(x2));
  while (b - a > tol * std::max(1.0, std::abs(a) + std::abs(b))) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = f(std::exp(x1));
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = f(std::exp(x2));
    }
  }
  return f1 < f2 ? std::make_pair(std::exp(x1), f1) : std::make_pair(std::exp(x2), f2);
}

// Grid scan plus golden-section polish around the grid minimum. Guarantees
// the returned value is <= every grid value.
inline std::tuple<double, double, bool, std::vector<std::pair<double, double>>> minimize_1d(
    const std::function<double(double)>& f, const HyperOptOptions& opts) {
  const auto grid = log_grid(opts.bracket_lo, opts.bracket_hi, opts.grid_points);
  std::vector<std::pair<double, double>> evals;
  evals.reserve(grid.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    evals.emplace_back(grid[i], f(grid[i]));
    if (evals[i].second < evals[best].second) best = i;
  }

  const bool at_boundary = best == 0 || best + 1 == grid.size();
  double arg = evals[best].first, val = evals[best].second;
  const double lo = grid[best == 0 ? 0 : best - 1];
  const double hi = grid[best + 1 >= grid.size() ? grid.size() - 1 : best + 1];
  if (lo < hi) {
    auto [parg, pval] = golden_section_log(f, lo, hi, opts.golden_tol);
    if (pval < val) {
      arg = parg;
      val = pval;
    }
  }
  return {arg, val, at_boundary, evals};
}

}  // namespace detail

/// Optimal sigma_beta^2 for a known sigma^2 (the default pipeline mode).
inline HyperOptResult optimize_sigma_beta(double sigma_sq_known, const Eigen::VectorXd& y,
                                          const Eigen::MatrixXd& x,
                                          const Eigen::VectorXd& a_unit_diag,
                                          const PrecisionMatrix& a0, const HyperPriors& priors,
                                          const HyperOptOptions& opts = {}) {
  priors.validate();
  auto objective = [&](double sb) {
    return detail::marginal_core(sigma_sq_known, sb, y, x, a_unit_diag, a0) +
           (priors.a_beta + 1.0) * std::log(sb) + priors.b_beta / sb;
  };
  auto [arg, val, at_boundary, evals] = detail::minimize_1d(objective, opts);

  HyperOptResult result;
  result.sigma_sq = sigma_sq_known;
  result.sigma_beta_sq = arg;
  result.value = val;
  result.at_boundary = at_boundary;
  for (const auto& [sb, v] : evals) result.grid.push_back({sigma_sq_known, sb, v});
  return result;
}

/// Joint optimization of (sigma^2, sigma_beta^2): 2-D log-grid scan followed
/// by coordinate-wise golden-section polish.
inline HyperOptResult optimize_both(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                                    const Eigen::VectorXd& a_unit_diag, const PrecisionMatrix& a0,
                                    const HyperPriors& priors, const HyperOptOptions& opts = {}) {
  auto objective = [&](double s, double sb) {
    return neg_log_marginal_posterior(s, sb, y, x, a_unit_diag, a0, priors);
  };

  HyperOptResult result;
  const auto grid = detail::log_grid(opts.bracket_lo, opts.bracket_hi, opts.grid_points);
  double best_s = grid.front(), best_sb = grid.front();
  double best_val = std::numeric_limits<double>::infinity();
  bool boundary = false;
  for (std::size_t i = 0; i < grid.size(); ++i)
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double v = objective(grid[i], grid[j]);
      result.grid.push_back({grid[i], grid[j], v});
      if (v < best_val) {
        best_val = v;
        best_s = grid[i];
        best_sb = grid[j];
        boundary = i == 0 || i + 1 == grid.size() || j == 0 || j + 1 == grid.size();
      }
    }

  // coordinate-wise polish, two passes
  for (int pass = 0; pass < 2; ++pass) {
    auto fs = [&](double s) { return objective(s, best_sb); };
    auto [s_arg, s_val] = detail::golden_section_log(
        fs, std::max(opts.bracket_lo, best_s / 10.0), std::min(opts.bracket_hi, best_s * 10.0),
        opts.golden_tol);
    if (s_val < best_val) {
      best_val = s_val;
      best_s = s_arg;
    }
    auto fsb = [&](double sb) { return objective(best_s, sb); };
    auto [sb_arg, sb_val] = detail::golden_section_log(
        fsb, std::max(opts.bracket_lo, best_sb / 10.0), std::min(opts.bracket_hi, best_sb * 10.0),
        opts.golden_tol);
    if (sb_val < best_val) {
      best_val = sb_val;
      best_sb = sb_arg;
    }
  }

  result.sigma_sq = best_s;
  result.sigma_beta_sq = best_sb;
  result.value = best_val;
  result.at_boundary = boundary;
  return result;
}

}  // namespace slipinv

#endif
