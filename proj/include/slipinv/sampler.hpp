#ifndef SLIPINV_SAMPLER_HPP
#define SLIPINV_SAMPLER_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "slipinv/diagnostics.hpp"
#include "slipinv/posterior.hpp"
#include "slipinv/rng.hpp"
#include "slipinv/truncated_normal.hpp"

namespace slipinv {

/// Direction ensembles for the directional Gibbs sampler: eigenvectors of the
/// precision with their eigenvalues, and unit-normalized covariance columns
/// with the correlation-derived selection weights P_i.
struct DirectionSet {
  Eigen::MatrixXd eigen_directions;     // columns are unit eigenvectors
  Eigen::VectorXd eigenvalues;          // matching precision eigenvalues, > 0
  Eigen::MatrixXd cov_column_directions;
  Eigen::VectorXd p_weights;            // P_i = -(1/2n) sum_j log(rho_ij^2)
};

struct SamplerConfig {
  Eigen::Index sample_count = 20000;
  Eigen::Index burn_in = -1;  // negative means 10% of sample_count
  Eigen::Index thin = 1;
  std::uint64_t seed = 0;
  double mixing_probability = 0.5;
  double beta_shape_a = 2.0;
  double beta_shape_b = 9.0;

  Eigen::Index effective_burn_in() const {
    return burn_in >= 0 ? burn_in : sample_count / 10;
  }

  void validate() const {
    if (sample_count < 0) throw std::invalid_argument("sampler: sample_count must be >= 0");
    if (thin < 1) throw std::invalid_argument("sampler: thin must be >= 1");
    if (!(mixing_probability >= 0.0 && mixing_probability <= 1.0))
      throw std::invalid_argument("sampler: mixing_probability must be in [0,1]");
    if (!(beta_shape_a > 0.0 && beta_shape_b > 0.0))
      throw std::invalid_argument("sampler: beta shape parameters must be positive");
  }
};

/// Ordered post-burn-in, post-thinning draws plus mixing diagnostics.
struct ChainResult {
  Eigen::MatrixXd draws;  // sample_count x n
  Eigen::VectorXd ess;
  Eigen::VectorXd iat;
  std::uint64_t seed = 0;
  Eigen::Index eigen_steps = 0;
  Eigen::Index covcol_steps = 0;
  double wall_seconds = 0.0;
};

inline DirectionSet precompute_directions(const MTNDistribution& target) {
  const Eigen::Index n = target.dim();
  DirectionSet ds;
  ds.eigenvalues = target.precision_eigenvalues();
  if (!(ds.eigenvalues.array() > 0.0).all())
    throw std::runtime_error("precompute_directions: non-positive precision eigenvalue");
  ds.eigen_directions = target.precision_eigenvectors();
  for (Eigen::Index j = 0; j < n; ++j) ds.eigen_directions.col(j).normalize();

  ds.cov_column_directions = target.covariance();
  for (Eigen::Index j = 0; j < n; ++j) ds.cov_column_directions.col(j).normalize();

  // rho = 0 would give log(rho^2) = -inf; the clamp keeps P finite while
  // preserving the ordering of the weights.
  const Eigen::MatrixXd& rho = target.correlation();
  ds.p_weights.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;  // rho_ii = 1 contributes zero
      const double r2 = std::max(rho(i, j) * rho(i, j), 1e-300);
      acc += std::log(r2);
    }
    ds.p_weights[i] = -acc / (2.0 * static_cast<double>(n));
  }
  return ds;
}

namespace detail {
// p_i proportional to base_i^{-b}, computed in log space.
inline Eigen::VectorXd power_law_weights(const Eigen::VectorXd& base, double b) {
  const Eigen::Index n = base.size();
  if (n == 1) return Eigen::VectorXd::Ones(1);
  Eigen::VectorXd logw = -b * base.array().log();
  logw.array() -= logw.maxCoeff();
  Eigen::VectorXd w = logw.array().exp();
  return w / w.sum();
}
}  // namespace detail

/// Selection probabilities over eigen directions: p_i proportional to
/// lambda_i^{-b}, so low-precision (high-variance) directions dominate.
inline Eigen::VectorXd direction_weights_eigen(const Eigen::VectorXd& eigenvalues, double b) {
  if (!(eigenvalues.array() > 0.0).all())
    throw std::domain_error("direction_weights_eigen: eigenvalues must be positive");
  return detail::power_law_weights(eigenvalues, b);
}

/// Selection probabilities over covariance-column directions: p_i
/// proportional to P_i^{-b}.
inline Eigen::VectorXd direction_weights_covcol(const Eigen::VectorXd& p_weights, double b) {
  if (p_weights.size() > 1 && !(p_weights.array() > 0.0).all())
    throw std::domain_error("direction_weights_covcol: P weights must be positive");
  return detail::power_law_weights(p_weights, b);
}

/// Range of r such that x + r e stays inside the box. Coordinates with
/// e_i = 0 impose no constraint; an unconstrained side is +-inf.
inline std::pair<double, double> line_bounds(const Eigen::VectorXd& x, const Eigen::VectorXd& e,
                                             const Eigen::VectorXd& lower,
                                             const Eigen::VectorXd& upper) {
  const Eigen::Index n = x.size();
  double c = -std::numeric_limits<double>::infinity();
  double d = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(x[i] > lower[i] && x[i] < upper[i]))
      throw std::domain_error("line_bounds: point not strictly inside the box");
    if (e[i] > 0.0) {
      c = std::max(c, (lower[i] - x[i]) / e[i]);
      d = std::min(d, (upper[i] - x[i]) / e[i]);
    } else if (e[i] < 0.0) {
      c = std::max(c, (upper[i] - x[i]) / e[i]);
      d = std::min(d, (lower[i] - x[i]) / e[i]);
    }
  }
  return {c, d};
}

/// Mean and precision of the Gaussian conditional along direction e:
/// mu_r = -e^T A (x - mu) / (e^T A e), tau_r = e^T A e.
inline std::pair<double, double> line_conditional(const Eigen::VectorXd& x,
                                                  const Eigen::VectorXd& e,
                                                  const MTNDistribution& target) {
  const Eigen::VectorXd ae = target.precision() * e;
  const double tau_r = e.dot(ae);
  const double mu_r = -ae.dot(x - target.mean()) / tau_r;
  return {mu_r, tau_r};
}

namespace detail {
inline Eigen::Index sample_categorical(const Eigen::VectorXd& probs, Rng& rng) {
  double u = rng.uniform();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u <= acc) return i;
  }
  return probs.size() - 1;
}

// Nudge a state off the box faces; line sampling returns open-interval
// values but the addition x + r e can still round onto a face.
inline void enforce_interior(Eigen::VectorXd& x, const Eigen::VectorXd& lower,
                             const Eigen::VectorXd& upper) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] <= lower[i]) x[i] = std::nextafter(lower[i], upper[i]);
    if (x[i] >= upper[i]) x[i] = std::nextafter(upper[i], lower[i]);
  }
}
}  // namespace detail

/// One directional Gibbs transition. Draws the tempering exponent b, picks an
/// ensemble by the mixing probability, selects a direction, and replaces the
/// state with an exact draw from the conditional along that line.
/// used_eigen, when given, reports which ensemble was chosen.
inline Eigen::VectorXd odg_step(const Eigen::VectorXd& x, const MTNDistribution& target,
                                const DirectionSet& directions, const SamplerConfig& config,
                                Rng& rng, bool* used_eigen = nullptr) {
  const double b = rng.beta(config.beta_shape_a, config.beta_shape_b);
  const double p = rng.uniform();
  const bool eigen_branch = p < config.mixing_probability;
  if (used_eigen) *used_eigen = eigen_branch;

  const Eigen::VectorXd probs = eigen_branch
                                    ? direction_weights_eigen(directions.eigenvalues, b)
                                    : direction_weights_covcol(directions.p_weights, b);
  const Eigen::Index idx = detail::sample_categorical(probs, rng);
  const Eigen::VectorXd e = eigen_branch ? directions.eigen_directions.col(idx)
                                         : directions.cov_column_directions.col(idx);

  const auto [mu_r, tau_r] = line_conditional(x, e, target);
  const auto [c, d] = line_bounds(x, e, target.lower(), target.upper());
  const double r = sample_truncated_normal_1d(mu_r, tau_r, c, d, rng);

  Eigen::VectorXd next = x + r * e;
  detail::enforce_interior(next, target.lower(), target.upper());
  return next;
}

/// Default chain start: the target mean clamped strictly inside the box.
/// For an infinite side the offset falls back to a scale set by the finite
/// bound, since 1e-8 of an infinite width is meaningless.
inline Eigen::VectorXd interior_start_point(const MTNDistribution& target) {
  const Eigen::Index n = target.dim();
  Eigen::VectorXd x = target.mean();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lo = target.lower()[i], hi = target.upper()[i];
    const double width = hi - lo;
    const double eps = std::isfinite(width)
                           ? 1e-8 * width
                           : 1e-8 * std::max(1.0, std::isfinite(lo) ? std::abs(lo)
                                                                    : std::abs(hi));
    if (std::isfinite(lo) && x[i] < lo + eps) x[i] = lo + eps;
    if (std::isfinite(hi) && x[i] > hi - eps) x[i] = hi - eps;
  }
  detail::enforce_interior(x, target.lower(), target.upper());
  return x;
}

namespace detail {
template <typename Step>
inline ChainResult drive_chain(const MTNDistribution& target, const SamplerConfig& config,
                               Step step) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const Eigen::Index n = target.dim();

  ChainResult result;
  result.seed = config.seed;
  result.draws.resize(config.sample_count, n);
  if (config.sample_count == 0) {
    result.ess = Eigen::VectorXd::Zero(n);
    result.iat = Eigen::VectorXd::Ones(n);
    return result;
  }

  Eigen::VectorXd x = interior_start_point(target);
  const Eigen::Index burn = config.effective_burn_in();
  for (Eigen::Index t = 0; t < burn; ++t) step(x);
  for (Eigen::Index s = 0; s < config.sample_count; ++s) {
    for (Eigen::Index t = 0; t < config.thin; ++t) step(x);
    result.draws.row(s) = x;
  }

  result.iat = per_coordinate_iat(result.draws);
  result.ess = per_coordinate_ess(result.draws);
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}
}  // namespace detail

/// Run the hybrid directional Gibbs chain on a MTN target.
inline ChainResult run_chain(const MTNDistribution& target, const SamplerConfig& config) {
  const DirectionSet directions = precompute_directions(target);
  Rng rng(config.seed);
  Eigen::Index eigen_steps = 0, covcol_steps = 0;
  ChainResult result = detail::drive_chain(target, config, [&](Eigen::VectorXd& x) {
    bool used_eigen = false;
    x = odg_step(x, target, directions, config, rng, &used_eigen);
    (used_eigen ? eigen_steps : covcol_steps) += 1;
  });
  result.eigen_steps = eigen_steps;
  result.covcol_steps = covcol_steps;
  return result;
}

/// Systematic-scan coordinate Gibbs on the same target; one recorded draw per
/// full sweep. Baseline for efficiency comparisons.
inline ChainResult run_coordinate_gibbs(const MTNDistribution& target,
                                        const SamplerConfig& config) {
  const Eigen::Index n = target.dim();
  const Eigen::MatrixXd& a = target.precision();
  Rng rng(config.seed);
  Eigen::VectorXd grad;  // A (x - mu), maintained incrementally
  Eigen::Index sweeps = 0;
  ChainResult result = detail::drive_chain(target, config, [&](Eigen::VectorXd& x) {
    if (sweeps++ % 128 == 0) grad = a * (x - target.mean());  // periodic drift refresh
    for (Eigen::Index i = 0; i < n; ++i) {
      const double tau = a(i, i);
      const double mu_cond = x[i] - grad[i] / tau;
      const double lo = target.lower()[i], hi = target.upper()[i];
      double xi = sample_truncated_normal_1d(mu_cond, tau, lo, hi, rng);
      if (xi <= lo) xi = std::nextafter(lo, hi);
      if (xi >= hi) xi = std::nextafter(hi, lo);
      const double delta = xi - x[i];
      if (delta != 0.0) {
        grad += delta * a.col(i);
        x[i] = xi;
      }
    }
  });
  return result;
}

/// Condition a MTN on coordinate `index` taking value `value`; returns the
/// (n-1)-dimensional MTN over the remaining coordinates.
inline MTNDistribution conditional_mtn(const MTNDistribution& target, Eigen::Index index,
                                       double value) {
  const Eigen::Index n = target.dim();
  if (index < 0 || index >= n) throw std::out_of_range("conditional_mtn: index out of range");
  if (!(value >= target.lower()[index] && value <= target.upper()[index]))
    throw std::domain_error("conditional_mtn: conditioning value outside the box");

  Eigen::VectorXd mean_rest(n - 1), lower_rest(n - 1), upper_rest(n - 1), cross(n - 1);
  Eigen::MatrixXd prec_rest(n - 1, n - 1);
  for (Eigen::Index i = 0, r = 0; i < n; ++i) {
    if (i == index) continue;
    mean_rest[r] = target.mean()[i];
    lower_rest[r] = target.lower()[i];
    upper_rest[r] = target.upper()[i];
    cross[r] = target.precision()(i, index);
    for (Eigen::Index j = 0, cidx = 0; j < n; ++j) {
      if (j == index) continue;
      prec_rest(r, cidx++) = target.precision()(i, j);
    }
    ++r;
  }

  Eigen::LLT<Eigen::MatrixXd> llt(prec_rest);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("conditional_mtn: conditional precision not SPD");
  const Eigen::VectorXd shift = llt.solve(cross) * (value - target.mean()[index]);
  return MTNDistribution(mean_rest - shift, std::move(prec_rest), std::move(lower_rest),
                         std::move(upper_rest));
}

}  // namespace slipinv

#endif
