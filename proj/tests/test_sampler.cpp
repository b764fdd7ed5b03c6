#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Dense>

#include "slipinv/sampler.hpp"
#include "test_helpers.hpp"

using namespace slipinv;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

MTNDistribution make_target(Eigen::VectorXd mean, Eigen::MatrixXd precision, double lo, double hi) {
  const Eigen::Index n = mean.size();
  return MTNDistribution(std::move(mean), std::move(precision),
                         Eigen::VectorXd::Constant(n, lo), Eigen::VectorXd::Constant(n, hi));
}

// Independent oracle: draw from the untruncated Gaussian by Cholesky and
// keep points inside the box.
struct RejectionSample {
  Eigen::MatrixXd draws;
  double acceptance = 0.0;
};

RejectionSample rejection_sample(const MTNDistribution& target, Eigen::Index count,
                                 std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  const Eigen::Index n = target.dim();
  const Eigen::MatrixXd l = Eigen::LLT<Eigen::MatrixXd>(target.covariance()).matrixL();

  RejectionSample rs;
  rs.draws.resize(count, n);
  Eigen::Index kept = 0;
  long long attempts = 0;
  while (kept < count) {
    ++attempts;
    Eigen::VectorXd u(n);
    for (Eigen::Index i = 0; i < n; ++i) u[i] = z(gen);
    Eigen::VectorXd x = target.mean() + l * u;
    if (target.inside_box(x)) rs.draws.row(kept++) = x;
    if (attempts > 500LL * count && kept == 0)
      throw std::runtime_error("rejection oracle: acceptance too low");
  }
  rs.acceptance = static_cast<double>(count) / static_cast<double>(attempts);
  return rs;
}

}  // namespace

TEST_CASE("precompute_directions on the identity precision") {
  const auto target = make_target(Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Identity(3, 3),
                                  -1.0, 1.0);
  const auto ds = precompute_directions(target);
  CHECK(ds.eigenvalues.isApprox(Eigen::VectorXd::Ones(3)));
  // covariance columns are the canonical axes
  for (int j = 0; j < 3; ++j) {
    CHECK(std::abs(ds.cov_column_directions.col(j).cwiseAbs().maxCoeff() - 1.0) < 1e-12);
    CHECK(ds.cov_column_directions.col(j).norm() == Catch::Approx(1.0).epsilon(1e-12));
  }
  // diagonal target: every off-diagonal correlation is 0, P hits the clamp
  for (int i = 0; i < 3; ++i) CHECK(std::isfinite(ds.p_weights[i]));
  CHECK((ds.p_weights.array() > 0.0).all());
}

TEST_CASE("precompute_directions matches the hand eigensolve of [[2,-1],[-1,2]]") {
  Eigen::MatrixXd a(2, 2);
  a << 2.0, -1.0, -1.0, 2.0;
  const auto target = make_target(Eigen::VectorXd::Zero(2), a, -kInf, kInf);
  const auto ds = precompute_directions(target);

  REQUIRE(ds.eigenvalues.size() == 2);
  CHECK(ds.eigenvalues[0] == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(ds.eigenvalues[1] == Catch::Approx(3.0).epsilon(1e-12));

  const double s = 1.0 / std::sqrt(2.0);
  Eigen::VectorXd e0 = ds.eigen_directions.col(0), e1 = ds.eigen_directions.col(1);
  CHECK(std::min((e0 - Eigen::Vector2d(s, s)).norm(), (e0 + Eigen::Vector2d(s, s)).norm()) <
        1e-12);
  CHECK(std::min((e1 - Eigen::Vector2d(s, -s)).norm(), (e1 + Eigen::Vector2d(s, -s)).norm()) <
        1e-12);
}

TEST_CASE("direction weights: equal inputs give the uniform distribution") {
  const Eigen::VectorXd lam = Eigen::VectorXd::Constant(5, 2.7);
  const Eigen::VectorXd w = direction_weights_eigen(lam, 0.4);
  CHECK((w.array() - 0.2).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(w.sum() == Catch::Approx(1.0).epsilon(1e-12));

  const Eigen::VectorXd p = Eigen::VectorXd::Constant(4, 9.9);
  CHECK((direction_weights_covcol(p, 0.7).array() - 0.25).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("direction weights: frozen two-point values") {
  Eigen::VectorXd lam(2);
  lam << 1.0, 4.0;
  const Eigen::VectorXd w = direction_weights_eigen(lam, 0.5);
  CHECK(w[0] == Catch::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(w[1] == Catch::Approx(1.0 / 3.0).epsilon(1e-12));

  Eigen::VectorXd p(2);
  p << 1.0, 16.0;
  const Eigen::VectorXd w2 = direction_weights_covcol(p, 0.25);
  CHECK(w2[0] == Catch::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(w2[1] == Catch::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("direction weights: b -> 0 limit is uniform, n=1 is certain") {
  Eigen::VectorXd lam(3);
  lam << 0.01, 1.0, 100.0;
  const Eigen::VectorXd w = direction_weights_eigen(lam, 1e-15);
  CHECK((w.array() - 1.0 / 3.0).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(direction_weights_covcol(Eigen::VectorXd::Zero(1), 0.3)[0] == 1.0);

  // smaller eigenvalue always gets the larger probability
  const Eigen::VectorXd w2 = direction_weights_eigen(lam, 0.35);
  CHECK(w2[0] > w2[1]);
  CHECK(w2[1] > w2[2]);
  CHECK(w2.sum() == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("line bounds on the unit box") {
  Eigen::VectorXd lo = Eigen::VectorXd::Zero(2), hi = Eigen::VectorXd::Ones(2);
  Eigen::VectorXd x(2), e(2);

  x << 0.5, 0.5;
  e << 1.0, 0.0;
  auto [c1, d1] = line_bounds(x, e, lo, hi);
  CHECK(c1 == Catch::Approx(-0.5));
  CHECK(d1 == Catch::Approx(0.5));

  e << -1.0, 0.0;
  auto [c2, d2] = line_bounds(x, e, lo, hi);
  CHECK(c2 == Catch::Approx(-0.5));
  CHECK(d2 == Catch::Approx(0.5));

  x << 0.2, 0.8;
  e << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  auto [c3, d3] = line_bounds(x, e, lo, hi);
  CHECK(c3 == Catch::Approx(-0.2 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(d3 == Catch::Approx(0.2 * std::sqrt(2.0)).epsilon(1e-12));

  x << 1.5, 0.5;
  CHECK_THROWS(line_bounds(x, e, lo, hi));
}

TEST_CASE("line bounds honor per-coordinate ratios on random instances") {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  std::normal_distribution<double> z(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(gen() % 6);
    Eigen::VectorXd lo(n), hi(n), x(n), e(n);
    for (int i = 0; i < n; ++i) {
      lo[i] = -1.0 - u(gen);
      hi[i] = 1.0 + u(gen);
      x[i] = lo[i] + u(gen) * (hi[i] - lo[i]);
      e[i] = z(gen);
    }
    e[static_cast<int>(gen() % n)] = 0.0;  // exercise the excluded-coordinate path
    if (e.norm() == 0.0) e[0] = 1.0;
    e.normalize();
    auto [c, d] = line_bounds(x, e, lo, hi);
    REQUIRE(c < 0.0);
    REQUIRE(d > 0.0);

    // oracle: brute scan over candidate ratios
    double c_want = -kInf, d_want = kInf;
    for (int i = 0; i < n; ++i) {
      if (e[i] == 0.0) continue;
      const double r1 = (lo[i] - x[i]) / e[i];
      const double r2 = (hi[i] - x[i]) / e[i];
      c_want = std::max(c_want, std::min(r1, r2));
      d_want = std::min(d_want, std::max(r1, r2));
    }
    CHECK(c == Catch::Approx(c_want).epsilon(1e-12));
    CHECK(d == Catch::Approx(d_want).epsilon(1e-12));
  }
}

TEST_CASE("line conditional closed forms") {
  const auto target = make_target(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2),
                                  -kInf, kInf);
  Eigen::VectorXd x(2), e(2);
  x << 1.0, 0.0;
  e << 1.0, 0.0;
  auto [mu_r, tau_r] = line_conditional(x, e, target);
  CHECK(mu_r == Catch::Approx(-1.0));
  CHECK(tau_r == Catch::Approx(1.0));

  // at the mean the conditional is centered for any direction
  std::mt19937_64 gen(23);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd dir = testutil::random_vector(gen, 2);
    dir.normalize();
    auto [m0, t0] = line_conditional(target.mean(), dir, target);
    CHECK(std::abs(m0) < 1e-14);
    CHECK(t0 > 0.0);
  }
}

TEST_CASE("line conditional matches the dense quadratic-form oracle in 5d") {
  std::mt19937_64 gen(29);
  const Eigen::MatrixXd a = testutil::random_spd(gen, 5, 0.4, 3.0);
  const Eigen::VectorXd mu = testutil::random_vector(gen, 5);
  const auto target = make_target(mu, a, -kInf, kInf);

  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd x = testutil::random_vector(gen, 5);
    Eigen::VectorXd e = testutil::random_vector(gen, 5);
    e.normalize();
    auto [mu_r, tau_r] = line_conditional(x, e, target);

    const double tau_want = (e.transpose() * a * e).value();
    const double mu_want = -(e.transpose() * a * (x - mu)).value() / tau_want;
    CHECK(tau_r == Catch::Approx(tau_want).epsilon(1e-12));
    CHECK(mu_r == Catch::Approx(mu_want).epsilon(1e-12).margin(1e-12));
  }
}

TEST_CASE("odg chain reproduces an unconstrained gaussian in 5d") {
  const int n = 5;
  std::mt19937_64 gen(43);
  const auto target =
      make_target(Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Identity(n, n), -kInf, kInf);

  SamplerConfig cfg;
  cfg.sample_count = 200000;
  cfg.burn_in = 2000;
  cfg.seed = 99;
  const auto chain = run_chain(target, cfg);
  REQUIRE(chain.draws.rows() == cfg.sample_count);

  const Eigen::VectorXd mean = chain.draws.colwise().mean().transpose();
  Eigen::MatrixXd centered = chain.draws.rowwise() - mean.transpose();
  const Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(chain.draws.rows() - 1);

  CHECK(mean.cwiseAbs().maxCoeff() < 0.02);
  CHECK((cov - Eigen::MatrixXd::Identity(n, n)).norm() / std::sqrt(static_cast<double>(n)) <
        0.05);
}

TEST_CASE("mixing probability 1 uses only eigen directions") {
  const auto target = make_target(Eigen::VectorXd::Zero(3),
                                  Eigen::MatrixXd::Identity(3, 3), -2.0, 2.0);
  SamplerConfig cfg;
  cfg.sample_count = 500;
  cfg.burn_in = 10;
  cfg.mixing_probability = 1.0;
  auto chain = run_chain(target, cfg);
  CHECK(chain.eigen_steps == 510);
  CHECK(chain.covcol_steps == 0);

  cfg.mixing_probability = 0.0;
  chain = run_chain(target, cfg);
  CHECK(chain.eigen_steps == 0);
  CHECK(chain.covcol_steps == 510);
}

TEST_CASE("fixed seed reproduces the chain bit for bit") {
  std::mt19937_64 gen(47);
  const Eigen::MatrixXd a = testutil::random_spd(gen, 4, 0.5, 2.0);
  const auto target = make_target(Eigen::VectorXd::Zero(4), a, -1.0, 1.5);
  SamplerConfig cfg;
  cfg.sample_count = 400;
  cfg.seed = 31415;
  const auto c1 = run_chain(target, cfg);
  const auto c2 = run_chain(target, cfg);
  CHECK(c1.draws == c2.draws);

  cfg.seed = 31416;
  const auto c3 = run_chain(target, cfg);
  CHECK(c1.draws != c3.draws);
}

TEST_CASE("zero requested samples produce an empty result without error") {
  const auto target = make_target(Eigen::VectorXd::Zero(2),
                                  Eigen::MatrixXd::Identity(2, 2), 0.0, 1.0);
  SamplerConfig cfg;
  cfg.sample_count = 0;
  const auto chain = run_chain(target, cfg);
  CHECK(chain.draws.rows() == 0);
}

TEST_CASE("every draw stays strictly inside the box") {
  std::mt19937_64 gen(53);
  const Eigen::MatrixXd a = testutil::random_spd(gen, 3, 0.5, 2.0);
  Eigen::VectorXd mean(3);
  mean << 2.0, -2.0, 0.0;  // mean far outside the box stresses the boundary
  const auto target = make_target(mean, a, -0.5, 0.5);
  SamplerConfig cfg;
  cfg.sample_count = 20000;
  cfg.seed = 7;
  const auto chain = run_chain(target, cfg);
  for (Eigen::Index t = 0; t < chain.draws.rows(); ++t) {
    REQUIRE((chain.draws.row(t).array() > -0.5).all());
    REQUIRE((chain.draws.row(t).array() < 0.5).all());
  }
}

TEST_CASE("2d half-open box chain matches the rejection oracle") {
  Eigen::MatrixXd a(2, 2);
  a << 1.0, 0.6, 0.6, 1.0;
  Eigen::VectorXd mean(2);
  mean << 0.4, 0.2;
  Eigen::VectorXd lo = Eigen::VectorXd::Zero(2);
  Eigen::VectorXd hi = Eigen::VectorXd::Constant(2, kInf);
  const MTNDistribution target(mean, a, lo, hi);

  SamplerConfig cfg;
  cfg.sample_count = 100000;
  cfg.burn_in = 2000;
  cfg.seed = 1234;
  const auto chain = run_chain(target, cfg);
  const auto oracle = rejection_sample(target, 100000, 999);
  REQUIRE(oracle.acceptance >= 0.01);

  for (int j = 0; j < 2; ++j) {
    const double got = chain.draws.col(j).mean();
    const double want = oracle.draws.col(j).mean();
    const auto sd = [](const Eigen::VectorXd& v) {
      const double m = v.mean();
      return std::sqrt((v.array() - m).square().sum() / static_cast<double>(v.size() - 1));
    };
    const double se_chain = sd(chain.draws.col(j)) / std::sqrt(chain.ess[j]);
    const double se_oracle =
        sd(oracle.draws.col(j)) / std::sqrt(static_cast<double>(oracle.draws.rows()));
    const double se = std::sqrt(se_chain * se_chain + se_oracle * se_oracle);
    CHECK(std::abs(got - want) < 3.0 * se);
  }
}

TEST_CASE("thinning does not increase the integrated autocorrelation time") {
  Eigen::MatrixXd a(2, 2);
  a << 1.0, 0.95, 0.95, 1.0;  // strongly correlated, slow coordinate mixing
  const auto target = make_target(Eigen::VectorXd::Zero(2), a, -3.0, 3.0);

  SamplerConfig thin1;
  thin1.sample_count = 20000;
  thin1.burn_in = 500;
  thin1.thin = 1;
  thin1.seed = 2;
  thin1.mixing_probability = 0.0;  // covariance columns only, to slow mixing down

  SamplerConfig thin10 = thin1;
  thin10.thin = 10;
  thin10.sample_count = 2000;

  const double iat1 = run_chain(target, thin1).iat.maxCoeff();
  const double iat10 = run_chain(target, thin10).iat.maxCoeff();
  CHECK(iat10 <= iat1 + 0.5);
}

TEST_CASE("conditional of a diagonal target ignores the conditioned value") {
  Eigen::VectorXd mean(3);
  mean << 0.1, 0.2, 0.3;
  Eigen::MatrixXd a = Eigen::VectorXd::Constant(3, 2.0).asDiagonal();
  const MTNDistribution target(mean, a, Eigen::VectorXd::Constant(3, -1.0),
                               Eigen::VectorXd::Constant(3, 1.0));
  const auto cond = conditional_mtn(target, 1, 0.9);
  CHECK(cond.dim() == 2);
  CHECK(cond.mean()[0] == Catch::Approx(0.1));
  CHECK(cond.mean()[1] == Catch::Approx(0.3));
}

TEST_CASE("conditional mean matches the gaussian conditioning oracle") {
  Eigen::MatrixXd a(2, 2);
  a << 1.0, 0.5, 0.5, 1.0;
  const MTNDistribution target(Eigen::VectorXd::Zero(2), a,
                               Eigen::VectorXd::Constant(2, -5.0),
                               Eigen::VectorXd::Constant(2, 5.0));
  const auto cond = conditional_mtn(target, 0, 1.0);
  REQUIRE(cond.dim() == 1);
  // precision-form conditioning: mu = -A_22^{-1} A_21 (d_1 - mu_1) = -0.5
  CHECK(cond.mean()[0] == Catch::Approx(-0.5).epsilon(1e-12));
  CHECK(cond.precision()(0, 0) == Catch::Approx(1.0));

  CHECK_THROWS(conditional_mtn(target, 5, 0.0));
  CHECK_THROWS(conditional_mtn(target, 0, 7.0));
}

TEST_CASE("conditioning then marginalizing is consistent with the joint sampler") {
  std::mt19937_64 gen(61);
  const Eigen::MatrixXd a = testutil::random_spd(gen, 3, 0.8, 2.0);
  Eigen::VectorXd mean(3);
  mean << 0.05, -0.1, 0.2;
  const MTNDistribution joint(mean, a, Eigen::VectorXd::Constant(3, -1.2),
                              Eigen::VectorXd::Constant(3, 1.2));

  SamplerConfig cfg;
  cfg.sample_count = 150000;
  cfg.burn_in = 2000;
  cfg.seed = 5;
  const auto joint_chain = run_chain(joint, cfg);

  // joint draws with x0 near a slice value, vs the exact conditional chain
  const double slice = 0.3, width = 0.05;
  std::vector<double> sliced;
  for (Eigen::Index t = 0; t < joint_chain.draws.rows(); ++t)
    if (std::abs(joint_chain.draws(t, 0) - slice) < width)
      sliced.push_back(joint_chain.draws(t, 1));
  REQUIRE(sliced.size() > 3000);
  double slice_mean = 0.0;
  for (double v : sliced) slice_mean += v;
  slice_mean /= static_cast<double>(sliced.size());

  const auto cond = conditional_mtn(joint, 0, slice);
  cfg.sample_count = 150000;
  const auto cond_chain = run_chain(cond, cfg);
  const double cond_mean = cond_chain.draws.col(0).mean();

  CHECK(std::abs(slice_mean - cond_mean) < 0.02);
}
