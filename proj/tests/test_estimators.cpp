#include <doctest.h>

#include <cmath>
#include <vector>

#include "singloc/errors.hpp"
#include "singloc/estimators.hpp"
#include "singloc/likelihood.hpp"
#include "singloc/sampler.hpp"
#include "singloc/stats.hpp"
#include "test_support.hpp"

using namespace singloc;
using test::make_batch;
using test::make_model;

namespace {

std::vector<double> uniform_thetas(double lo, double hi, std::size_t count) {
  std::vector<double> v(count);
  for (std::size_t i = 0; i < count; ++i) {
    v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return v;
}

double phi(double z) { return 0.5 * (1.0 + std::erf(z / std::sqrt(2.0))); }
double dnorm(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

}  // namespace

TEST_CASE("flat likelihood reproduces the prior (seam)") {
  const auto thetas = uniform_thetas(0.5, 1.5, 1025);
  const std::vector<double> zeros(thetas.size(), 0.0);
  const auto grid = posterior_from_loglik(thetas, zeros, Prior::uniform());
  CHECK(posterior_mass(grid) == doctest::Approx(1.0).epsilon(1e-8));
  for (std::size_t i = 0; i < grid.thetas.size(); i += 128) {
    CHECK(std::exp(grid.log_posterior[i]) == doctest::Approx(1.0).epsilon(1e-10));
  }
  CHECK(posterior_mean(grid) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("flat likelihood with a truncated-normal prior recovers its mean (seam)") {
  const double mu = 1.2, sd = 0.1, alpha = 0.5, beta = 1.5;
  const auto thetas = uniform_thetas(alpha, beta, 4097);
  const std::vector<double> zeros(thetas.size(), 0.0);
  const auto grid = posterior_from_loglik(thetas, zeros, Prior::truncated_normal(mu, sd));
  const double za = (alpha - mu) / sd, zb = (beta - mu) / sd;
  const double expected = mu + sd * (dnorm(za) - dnorm(zb)) / (phi(zb) - phi(za));
  CHECK(posterior_mean(grid) == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("posterior seam rejects degenerate input") {
  CHECK_THROWS_AS((void)posterior_from_loglik({1.0}, {0.0}, Prior::uniform()), Error);
  CHECK_THROWS_AS((void)posterior_from_loglik({1.0, 0.9}, {0.0, 0.0}, Prior::uniform()), Error);
  const auto inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS((void)posterior_from_loglik({0.9, 1.0}, {0.0, inf}, Prior::uniform()), Error);
  CHECK_THROWS_AS((void)posterior_from_loglik({0.9, 1.0}, {-inf, -inf}, Prior::uniform()), Error);
}

TEST_CASE("posterior grids are normalized on real batches") {
  const auto m = make_model(1, 1, 0.5);
  const auto batch = sample_batch(m, 32, 2);
  const auto grid = posterior_grid(batch, m, Prior::uniform(), 256);
  CHECK(grid.thetas.size() == 256);
  CHECK(posterior_mass(grid) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("grid refinement self-oracle: coarse vs 10x finer posterior mean") {
  const auto m = make_model(1, 1, 0.5);
  const auto batch = make_batch(m, {{0.8, 1.05, 1.3}});
  const double coarse = posterior_mean(posterior_grid(batch, m, Prior::uniform(), 512));
  const double fine = posterior_mean(posterior_grid(batch, m, Prior::uniform(), 5120));
  CHECK(std::fabs(coarse - fine) < 1e-4 * m.theta_interval.width());
}

TEST_CASE("doubling the scan grid barely moves the Bayes estimate") {
  const auto m = make_model(1, 1, 0.5);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto batch = sample_batch(m, 64, seed);
    EstimatorConfig c1;
    c1.grid_size = 1024;
    EstimatorConfig c2;
    c2.grid_size = 2048;
    const double e1 = bayes_estimate(batch, m, Prior::uniform(), c1).estimate;
    const double e2 = bayes_estimate(batch, m, Prior::uniform(), c2).estimate;
    CHECK(std::fabs(e1 - e2) < 1e-4 * m.theta_interval.width());
    CHECK(e1 > m.theta_interval.lo);
    CHECK(e1 < m.theta_interval.hi);
  }
}

TEST_CASE("infinity-type batches stay finite through the jitter policy") {
  const auto m = make_model(1, 1, -0.5);
  // events placed on top of what a uniform grid would produce
  const auto batch = sample_batch(m, 16, 77);
  EstimatorConfig cfg;
  cfg.grid_size = 256;
  cfg.refine_passes = 2;
  const auto est = bayes_estimate(batch, m, Prior::uniform(), cfg);
  CHECK(std::isfinite(est.estimate));
  CHECK(est.estimate > m.theta_interval.lo);
  CHECK(est.estimate < m.theta_interval.hi);
}

TEST_CASE("MLE refuses infinity-type orders") {
  const auto m = make_model(1, 1, -0.5);
  const auto batch = sample_batch(m, 8, 3);
  try {
    (void)mle_estimate(batch, m, EstimatorConfig{});
    FAIL_CHECK("expected MleUndefinedForNegativeP");
  } catch (const Error& e) {
    CHECK(e.code() == errc::mle_undefined_for_negative_p);
  }
}

TEST_CASE("MLE beats a brute-force scan up to tolerance") {
  const auto m = make_model(1, 1, 0.5);
  EstimatorConfig cfg;
  cfg.grid_size = 2048;  // scan 4096
  for (std::uint64_t seed : {10, 11, 12}) {
    const auto batch = sample_batch(m, 8, seed);
    const auto est = mle_estimate(batch, m, cfg);
    const BatchProfile profile(batch, m);
    const double got = profile(est.estimate);
    double brute = -std::numeric_limits<double>::infinity();
    const auto nodes = uniform_thetas(0.5 + 1e-6, 1.5 - 1e-6, 100000);
    for (double th : nodes) brute = std::max(brute, profile(th));
    CHECK(got >= brute - 1e-6);
  }
}

TEST_CASE("MLE of the mirrored batch is the mirror of the MLE") {
  const auto m = make_model(1, 1, 0.5);  // a=b, psi=0, theta interval symmetric about T/2
  const auto batch = sample_batch(m, 24, 15);
  SampleBatch mirrored = batch;
  for (auto& path : mirrored.paths) {
    for (auto& t : path.times) t = m.T - t;
    std::sort(path.times.begin(), path.times.end());
  }
  const auto e1 = mle_estimate(batch, m, EstimatorConfig{});
  const auto e2 = mle_estimate(mirrored, m, EstimatorConfig{});
  CHECK(e2.estimate == doctest::Approx(m.T - e1.estimate).epsilon(1e-8));
}

TEST_CASE("estimates tighten along the ladder (consistency smoke)") {
  for (double p : {0.5, -0.5}) {
    const auto m = make_model(1, 1, p);
    EstimatorConfig cfg;
    cfg.grid_size = 512;
    cfg.refine_passes = p < 0 ? 2 : 1;
    std::vector<double> med;
    for (std::size_t n : {16, 64, 256}) {
      std::vector<double> abs_err;
      for (std::uint64_t r = 0; r < 60; ++r) {
        const auto batch = sample_batch(m, n, derive_seed({99, n, r}));
        abs_err.push_back(
            std::fabs(bayes_estimate(batch, m, Prior::uniform(), cfg).estimate - m.theta));
      }
      med.push_back(stats::median(std::move(abs_err)));
    }
    INFO("p = ", p, " medians: ", med[0], " ", med[1], " ", med[2]);
    CHECK(med[1] < med[0]);
    CHECK(med[2] < med[1]);
  }
}
