#ifndef SLIPINV_POSTPROC_HPP
#define SLIPINV_POSTPROC_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "slipinv/mesh.hpp"
#include "slipinv/posterior.hpp"
#include "slipinv/sampler.hpp"

namespace slipinv {

/// Linear-interpolation quantile of an unsorted sample (numpy default).
inline double sample_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("sample_quantile: empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - std::floor(pos);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

/// Componentwise median of the draws.
inline Eigen::VectorXd pointwise_median(const ChainResult& chain) {
  if (chain.draws.rows() == 0) throw std::invalid_argument("pointwise_median: empty chain");
  const Eigen::Index n = chain.draws.cols();
  Eigen::VectorXd med(n);
  std::vector<double> col(static_cast<std::size_t>(chain.draws.rows()));
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index t = 0; t < chain.draws.rows(); ++t)
      col[static_cast<std::size_t>(t)] = chain.draws(t, j);
    med[j] = sample_quantile(col, 0.5);
  }
  return med;
}

struct CvResult {
  Eigen::VectorXd cv_percent;     // per subfault; NaN where undefined
  std::vector<bool> defined;      // false when the mean magnitude is below the floor
};

/// Coefficient of variation (percent) of the per-draw slip magnitude
/// sqrt(d_s^2 + d_d^2) at each subfault. Means below `mean_floor` are flagged
/// undefined instead of producing huge or infinite ratios.
inline CvResult pointwise_cv(const ChainResult& chain, double mean_floor = 1e-6) {
  const Eigen::Index s = chain.draws.rows();
  if (s == 0) throw std::invalid_argument("pointwise_cv: empty chain");
  if (chain.draws.cols() % 2 != 0)
    throw std::invalid_argument("pointwise_cv: draws must have 2M columns");
  const Eigen::Index m = chain.draws.cols() / 2;

  CvResult r;
  r.cv_percent.resize(m);
  r.defined.assign(static_cast<std::size_t>(m), false);
  for (Eigen::Index i = 0; i < m; ++i) {
    double mean = 0.0, m2 = 0.0;
    for (Eigen::Index t = 0; t < s; ++t) {
      const double mag = std::hypot(chain.draws(t, 2 * i), chain.draws(t, 2 * i + 1));
      const double delta = mag - mean;
      mean += delta / static_cast<double>(t + 1);
      m2 += delta * (mag - mean);
    }
    if (mean < mean_floor || s < 2) {
      r.cv_percent[i] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    const double sd = std::sqrt(m2 / static_cast<double>(s - 1));
    r.cv_percent[i] = 100.0 * sd / mean;
    r.defined[static_cast<std::size_t>(i)] = true;
  }
  return r;
}

/// Box-constrained posterior mode: minimize (D-mu)^T A (D-mu) over the box by
/// projected coordinate descent. The KKT tolerance is scaled by the initial
/// gradient magnitude so that it is meaningful for arbitrarily scaled systems.
inline Eigen::VectorXd map_estimate(const MTNDistribution& posterior, double kkt_tol = 1e-8,
                                    Eigen::Index max_sweeps = 20000) {
  const Eigen::Index n = posterior.dim();
  const Eigen::MatrixXd& a = posterior.precision();
  const Eigen::VectorXd& mu = posterior.mean();
  const Eigen::VectorXd& lo = posterior.lower();
  const Eigen::VectorXd& hi = posterior.upper();

  Eigen::VectorXd x = mu;
  for (Eigen::Index i = 0; i < n; ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
  Eigen::VectorXd grad = a * (x - mu);
  const double tol = kkt_tol * std::max(1.0, grad.cwiseAbs().maxCoeff());

  auto kkt_residual = [&]() {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double viol;
      if (x[i] <= lo[i])
        viol = std::max(0.0, -grad[i]);
      else if (x[i] >= hi[i])
        viol = std::max(0.0, grad[i]);
      else
        viol = std::abs(grad[i]);
      worst = std::max(worst, viol);
    }
    return worst;
  };

  for (Eigen::Index sweep = 0; sweep < max_sweeps; ++sweep) {
    if (kkt_residual() <= tol) return x;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double target = std::clamp(x[i] - grad[i] / a(i, i), lo[i], hi[i]);
      const double delta = target - x[i];
      if (delta != 0.0) {
        grad += delta * a.col(i);
        x[i] = target;
      }
    }
  }
  if (kkt_residual() <= tol) return x;
  throw std::runtime_error("map_estimate: no convergence after " + std::to_string(max_sweeps) +
                           " sweeps, KKT residual " + std::to_string(kkt_residual()));
}

/// Ridge-stabilized maximum likelihood baseline. The default ridge exists
/// only to make the normal equations solvable; it is a comparison point, not
/// part of the Bayesian pipeline.
inline Eigen::VectorXd mle_estimate(const ObservationVector& y, const GreensMatrix& x,
                                    const LikelihoodSpec& likelihood, double ridge = -1.0) {
  const Eigen::Index cols = x.entries.cols();
  const Eigen::VectorXd a_diag = likelihood.noise_precision_diagonal(x.entries.rows() / 3);
  Eigen::MatrixXd xtax = x.entries.transpose() * a_diag.asDiagonal() * x.entries;
  if (ridge < 0.0) ridge = 1e-12 * xtax.trace() / static_cast<double>(cols);
  xtax.diagonal().array() += ridge;

  Eigen::LDLT<Eigen::MatrixXd> ldlt(xtax);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("mle_estimate: factorization failed");
  return ldlt.solve(x.entries.transpose() * (a_diag.asDiagonal() * y.values));
}

/// Moment magnitude of a slip vector; subfaults with magnitude below
/// slip_floor do not contribute to the seismic moment.
inline double moment_magnitude(const Eigen::VectorXd& d, const FaultMesh& mesh,
                               double mu_rigidity = 32e9, double slip_floor = 0.01) {
  if (!(mu_rigidity > 0.0)) throw std::domain_error("moment_magnitude: rigidity must be positive");
  if (d.size() != 2 * mesh.subfault_count())
    throw std::invalid_argument("moment_magnitude: slip vector length must be 2M");
  double m0 = 0.0;
  for (Eigen::Index i = 0; i < mesh.subfault_count(); ++i) {
    const double mag = std::hypot(d[2 * i], d[2 * i + 1]);
    if (mag >= slip_floor) m0 += mesh.areas[i] * mag;
  }
  m0 *= mu_rigidity;
  if (!(m0 > 0.0))
    throw std::domain_error("moment_magnitude: undefined, no subfault slip above the floor");
  return 2.0 / 3.0 * (std::log10(m0) - 9.1);
}

struct MwPosterior {
  std::vector<double> draws;
  Eigen::Index undefined_count = 0;
  double median = 0.0;
  double q025 = 0.0;
  double q975 = 0.0;
};

/// Moment magnitude evaluated on every chain draw; draws with no slip above
/// the floor are excluded and counted.
inline MwPosterior mw_posterior(const ChainResult& chain, const FaultMesh& mesh,
                                double mu_rigidity = 32e9, double slip_floor = 0.01) {
  if (chain.draws.rows() == 0) throw std::invalid_argument("mw_posterior: empty chain");
  MwPosterior r;
  r.draws.reserve(static_cast<std::size_t>(chain.draws.rows()));
  for (Eigen::Index t = 0; t < chain.draws.rows(); ++t) {
    try {
      r.draws.push_back(
          moment_magnitude(chain.draws.row(t).transpose(), mesh, mu_rigidity, slip_floor));
    } catch (const std::domain_error&) {
      ++r.undefined_count;
    }
  }
  if (r.draws.empty())
    throw std::runtime_error("mw_posterior: magnitude undefined for every draw");
  r.median = sample_quantile(r.draws, 0.5);
  r.q025 = sample_quantile(r.draws, 0.025);
  r.q975 = sample_quantile(r.draws, 0.975);
  return r;
}

struct ResidualQuantiles {
  Eigen::VectorXd q025, q500, q975;  // per observation component
};

/// Quantiles of the predictive residual Y - X D^(t) per data component.
inline ResidualQuantiles predictive_residuals(const ChainResult& chain,
                                              const ObservationVector& y, const GreensMatrix& x) {
  const Eigen::Index s = chain.draws.rows();
  if (s == 0) throw std::invalid_argument("predictive_residuals: empty chain");
  const Eigen::Index rows = x.entries.rows();

  // residual matrix: one column per data component
  Eigen::MatrixXd resid(s, rows);
  for (Eigen::Index t = 0; t < s; ++t)
    resid.row(t) = (y.values - x.entries * chain.draws.row(t).transpose()).transpose();

  ResidualQuantiles r;
  r.q025.resize(rows);
  r.q500.resize(rows);
  r.q975.resize(rows);
  std::vector<double> col(static_cast<std::size_t>(s));
  for (Eigen::Index j = 0; j < rows; ++j) {
    for (Eigen::Index t = 0; t < s; ++t) col[static_cast<std::size_t>(t)] = resid(t, j);
    r.q025[j] = sample_quantile(col, 0.025);
    r.q500[j] = sample_quantile(col, 0.5);
    r.q975[j] = sample_quantile(col, 0.975);
  }
  return r;
}

}  // namespace slipinv

#endif
