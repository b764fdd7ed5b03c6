#ifndef SLIPINV_TRUNCATED_NORMAL_HPP
#define SLIPINV_TRUNCATED_NORMAL_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "slipinv/rng.hpp"

namespace slipinv {

namespace detail {

// Interval probability Phi(b) - Phi(a) using complementary tails when the
// interval sits away from the origin.
inline double standard_interval_mass(double a, double b) {
  if (a >= 0.0) return normal_cdf_upper(a) - normal_cdf_upper(b);
  if (b <= 0.0) return normal_cdf_upper(-b) - normal_cdf_upper(-a);
  return normal_cdf(b) - normal_cdf(a);
}

// Rejection sampler on [a,b], a >= 0, with a tilted-exponential proposal
// (Robert 1995). Valid even when the interval carries negligible mass.
inline double sample_tail_rejection(double a, double b, Rng& rng) {
  const double alpha = 0.5 * (a + std::sqrt(a * a + 4.0));
  const bool bounded = std::isfinite(b);
  const double span = bounded ? -std::expm1(-alpha * (b - a)) : 1.0;
  for (;;) {
    double u = rng.uniform();
    double z = bounded ? a - std::log1p(-u * span) / alpha : a - std::log(u) / alpha;
    double t = z - alpha;
    if (std::log(rng.uniform()) <= -0.5 * t * t) return z;
  }
}

inline double clamp_open(double x, double lo, double hi) {
  if (x <= lo) x = std::nextafter(lo, hi);
  if (x >= hi) x = std::nextafter(hi, lo);
  return x;
}

// Standard normal restricted to (a,b). Inverse CDF while the interval mass is
// resolvable in double precision, tail rejection otherwise.
inline double sample_standard_truncated(double a, double b, Rng& rng) {
  const double inf = std::numeric_limits<double>::infinity();
  if (a == -inf && b == inf) return rng.normal();

  const double mass = standard_interval_mass(a, b);
  if (mass > 1e-10) {
    double u = rng.uniform();
    double z;
    if (a >= 0.0) {
      double t = normal_cdf_upper(a) - u * mass;
      z = -normal_quantile(std::clamp(t, std::numeric_limits<double>::min(), 1.0 - 1e-16));
    } else if (b <= 0.0) {
      double t = normal_cdf_upper(-a) + u * mass;
      z = normal_quantile(std::clamp(t, std::numeric_limits<double>::min(), 1.0 - 1e-16));
    } else {
      z = normal_quantile(std::clamp(normal_cdf(a) + u * mass, 1e-300, 1.0 - 1e-16));
    }
    return clamp_open(z, a, b);
  }

  if (a >= 0.0) return clamp_open(sample_tail_rejection(a, b, rng), a, b);
  if (b <= 0.0) return clamp_open(-sample_tail_rejection(-b, -a, rng), a, b);
  // A sliver straddling the origin: the density is flat to within 1e-10.
  return clamp_open(a + rng.uniform() * (b - a), a, b);
}

}  // namespace detail

/// Draw from N(mu, 1/tau) restricted to the open interval (c,d).
inline double sample_truncated_normal_1d(double mu, double tau, double c, double d, Rng& rng) {
  if (!(tau > 0.0)) throw std::domain_error("sample_truncated_normal_1d: tau must be positive");
  if (!(c < d)) throw std::domain_error("sample_truncated_normal_1d: requires c < d");
  const double sd = 1.0 / std::sqrt(tau);
  double z = detail::sample_standard_truncated((c - mu) / sd, (d - mu) / sd, rng);
  return detail::clamp_open(mu + sd * z, c, d);
}

}  // namespace slipinv

#endif
