#ifndef SLIPINV_DIAGNOSTICS_HPP
#define SLIPINV_DIAGNOSTICS_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include <Eigen/Core>
#include <unsupported/Eigen/FFT>

namespace slipinv {

/// Autocovariance at lags 0..max_lag via FFT of the demeaned series,
/// normalized by the series length.
inline Eigen::VectorXd autocovariance(const Eigen::VectorXd& x, Eigen::Index max_lag) {
  const Eigen::Index n = x.size();
  max_lag = std::min(max_lag, n - 1);
  Eigen::VectorXd acov = Eigen::VectorXd::Zero(max_lag + 1);
  if (n < 2) return acov;

  std::size_t padded = 1;
  while (padded < 2 * static_cast<std::size_t>(n)) padded <<= 1;
  std::vector<double> buf(padded, 0.0);
  const double mean = x.mean();
  for (Eigen::Index i = 0; i < n; ++i) buf[static_cast<std::size_t>(i)] = x[i] - mean;

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> freq;
  fft.fwd(freq, buf);
  for (auto& f : freq) f *= std::conj(f);
  std::vector<double> corr;
  fft.inv(corr, freq);
  for (Eigen::Index k = 0; k <= max_lag; ++k)
    acov[k] = corr[static_cast<std::size_t>(k)] / static_cast<double>(n);
  return acov;
}

/// Integrated autocorrelation time with Geyer's initial monotone positive
/// sequence truncation. Returns 1 for uncorrelated or degenerate series.
inline double integrated_autocorrelation_time(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  if (n < 4) return 1.0;
  const Eigen::VectorXd acov = autocovariance(x, n - 1);
  if (!(acov[0] > 0.0)) return 1.0;

  double tau = 0.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (Eigen::Index m = 0; 2 * m + 1 < acov.size(); ++m) {
    double pair = (acov[2 * m] + acov[2 * m + 1]) / acov[0];
    if (pair <= 0.0) break;
    pair = std::min(pair, prev_pair);
    prev_pair = pair;
    tau += 2.0 * pair;
  }
  return std::max(1.0, tau - 1.0);
}

inline double effective_sample_size(const Eigen::VectorXd& x) {
  const double n = static_cast<double>(x.size());
  if (n == 0.0) return 0.0;
  return std::min(n, n / integrated_autocorrelation_time(x));
}

/// Per-column IAT of a draws matrix (one draw per row).
inline Eigen::VectorXd per_coordinate_iat(const Eigen::MatrixXd& draws) {
  Eigen::VectorXd out(draws.cols());
  for (Eigen::Index j = 0; j < draws.cols(); ++j)
    out[j] = integrated_autocorrelation_time(draws.col(j));
  return out;
}

inline Eigen::VectorXd per_coordinate_ess(const Eigen::MatrixXd& draws) {
  Eigen::VectorXd out(draws.cols());
  for (Eigen::Index j = 0; j < draws.cols(); ++j) out[j] = effective_sample_size(draws.col(j));
  return out;
}

}  // namespace slipinv

#endif
