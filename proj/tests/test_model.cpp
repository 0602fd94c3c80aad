#include <doctest.h>

#include <cmath>
#include <limits>

#include "singloc/errors.hpp"
#include "singloc/model.hpp"
#include "singloc/quadrature.hpp"
#include "singloc/rng.hpp"
#include "test_support.hpp"

using namespace singloc;
using test::make_model;
using test::with_psi;

namespace {

void check_throws(errc code, const IntensityModel& m) {
  try {
    validate(m);
    FAIL_CHECK("expected ", errc_name(code));
  } catch (const Error& e) {
    CHECK(e.code() == code);
  }
}

// Independent route for Lambda(t): tanh-sinh quadrature of the intensity
// with a split at theta (never touches the closed-form antiderivatives).
double lambda_by_quadrature(const IntensityModel& m, double t) {
  quad::Options opt;
  opt.rel_tol = 1e-12;
  if (m.theta > 0.0 && m.theta < t) {
    const double left = quad::integrate(
        [&](double, double, double dhi) { return dhi == 0.0 ? 0.0 : m.s(-dhi); }, 0.0, m.theta,
        opt);
    const double right = quad::integrate(
        [&](double, double dlo, double) { return dlo == 0.0 ? 0.0 : m.s(dlo); }, m.theta, t, opt);
    return left + right;
  }
  return quad::integrate([&](double x, double, double) { return m.s(x - m.theta); }, 0.0, t, opt);
}

}  // namespace

TEST_CASE("validate accepts the pure power model") {
  CHECK_NOTHROW(validate(make_model(1, 1, 0.5)));
  CHECK_NOTHROW(validate(make_model(1, 2, -0.5)));
}

TEST_CASE("validate rejects psi(0) != 0 for zero-type orders") {
  check_throws(errc::smooth_part_nonzero_at_origin,
               with_psi(make_model(1, 1, 0.5), 0.3, 0.0, 1.0, 0.0));
}

TEST_CASE("validate accepts a constant offset for infinity-type orders") {
  CHECK_NOTHROW(validate(with_psi(make_model(1, 1, -0.5), 0.3, 0.0, 1.0, 0.0)));
}

TEST_CASE("validate rejects an intensity that dips below zero") {
  check_throws(errc::nonpositive_intensity,
               with_psi(make_model(0.5, 0.5, -0.5), -1.0, 0.0, 0.0, 0.0));
}

TEST_CASE("validate rejects orders outside the admissible range") {
  check_throws(errc::invalid_order, make_model(1, 1, 0.0));
  check_throws(errc::invalid_order, make_model(1, 1, 1.2));
  check_throws(errc::invalid_order, make_model(1, 1, -1.0));
}

TEST_CASE("validate rejects bad shift intervals") {
  check_throws(errc::bad_interval, make_model(1, 1, 0.5, /*theta=*/0.4));
  check_throws(errc::bad_interval, make_model(1, 1, 0.5, 1.0, 2.0, 0.5, 2.5));
  IntensityModel m = make_model(1, 1, 0.5);
  m.T = -1.0;
  check_throws(errc::bad_interval, m);
}

TEST_CASE("intensity values at and around the singular point") {
  const auto m = make_model(1, 1, 0.5);
  CHECK(intensity_at(m, 1.25) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(intensity_at(m, 1.0) == 0.0);  // zero-type: vanishes at theta

  const auto mi = make_model(1, 2, -0.5);
  CHECK(intensity_at(mi, 1.0) == std::numeric_limits<double>::infinity());

  const auto mq = with_psi(make_model(1, 2, -0.5), 0.0, 0.0, 1.0, 0.0);
  const double expected = std::pow(0.25, -0.5) + 0.0625;  // left side, amp a = 1
  CHECK(intensity_at(mq, 0.75) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("cumulative intensity closed form") {
  const auto m = make_model(1, 1, 0.5);
  CHECK(cumulative_intensity(m, 2.0) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
  CHECK(cumulative_intensity(m, 0.0) == 0.0);

  const auto mq = with_psi(make_model(1, 2, -0.5), 0.0, 0.0, 1.0, 0.0);
  // left power 2 sqrt(1), right power 2*2 sqrt(1), polynomial 2/3
  CHECK(cumulative_intensity(mq, 2.0) == doctest::Approx(20.0 / 3.0).epsilon(1e-13));
  CHECK(cumulative_intensity(mq, 2.0) ==
        doctest::Approx(lambda_by_quadrature(mq, 2.0)).epsilon(1e-10));
}

TEST_CASE("cumulative intensity is nondecreasing") {
  const auto m = with_psi(make_model(0.7, 1.3, -0.4), 0.1, 0.05, 0.02, 0.0);
  validate(m);
  double prev = 0.0;
  for (int i = 1; i <= 2000; ++i) {
    const double t = 2.0 * i / 2000.0;
    const double cur = cumulative_intensity(m, t);
    CHECK(cur >= prev);
    prev = cur;
  }
}

TEST_CASE("closed-form cumulative agrees with quadrature on random models") {
  Rng rng(2024, 0);
  int tested = 0;
  while (tested < 20) {
    IntensityModel m;
    m.sing.a = 0.3 + 2.7 * rng.uniform01();
    m.sing.b = 0.3 + 2.7 * rng.uniform01();
    const double mag = 0.1 + 0.8 * rng.uniform01();
    m.sing.p = rng.uniform01() < 0.5 ? mag : -mag;
    m.T = 2.0;
    m.theta_interval = {0.5, 1.5};
    m.theta = 0.5 + rng.uniform01();
    m.smooth.c = {m.sing.p < 0.0 ? 0.1 * rng.uniform01() : 0.0,
                  0.05 * (2.0 * rng.uniform01() - 1.0), 0.05 * (2.0 * rng.uniform01() - 1.0),
                  0.02 * (2.0 * rng.uniform01() - 1.0)};
    try {
      validate(m);
    } catch (const Error&) {
      continue;
    }
    for (double t : {0.5 * m.T, m.T}) {
      const double closed = cumulative_intensity(m, t);
      const double quadr = lambda_by_quadrature(m, t);
      CHECK(std::fabs(closed - quadr) <= 1e-9 * std::fabs(quadr));
    }
    ++tested;
  }
}

TEST_CASE("hellinger distance basics") {
  const auto m = make_model(1, 1, 0.5);
  CHECK(hellinger_F(m, 0.0) == 0.0);
  CHECK_THROWS_AS((void)hellinger_F(m, 0.6), Error);  // theta + u = 1.6 outside (0.5, 1.5)

  // symmetric model (a = b, even psi, theta = T/2): F(u) = F(-u)
  for (double p : {0.5, -0.5}) {
    const auto sym = with_psi(make_model(1, 1, p), 0.0, 0.0, 0.3, 0.0);
    for (double u : {0.1, 0.25, 0.4}) {
      CHECK(hellinger_F(sym, u) == doctest::Approx(hellinger_F(sym, -u)).epsilon(1e-8));
    }
  }
}

TEST_CASE("hellinger distance against a fixed-grid Riemann oracle") {
  const auto m = make_model(1, 1, 0.5);
  const double u = 0.1;
  // midpoint rule with 10^7 cells; midpoints never hit the singular shifts
  const std::size_t cells = 10000000;
  const double h = m.T / static_cast<double>(cells);
  double sum = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    const double t = (static_cast<double>(i) + 0.5) * h;
    const double r = std::sqrt(m.s(t - m.theta - u)) - std::sqrt(m.s(t - m.theta));
    sum += r * r;
  }
  sum *= h;
  CHECK(hellinger_F(m, u) == doctest::Approx(sum).epsilon(1e-6));
}

TEST_CASE("hellinger lower bound F(u) >= c|u|^{p+1} on a grid") {
  for (double p : {0.5, -0.5}) {
    const auto m = make_model(1.0, 1.5, p);
    double c_min = std::numeric_limits<double>::infinity();
    for (int i = -8; i <= 8; ++i) {
      if (i == 0) continue;
      const double u = 0.05 * i;
      const double ratio = hellinger_F(m, u) / std::pow(std::fabs(u), p + 1.0);
      c_min = std::min(c_min, ratio);
    }
    CHECK(c_min > 0.0);
  }
}

TEST_CASE("model serialization round-trips exactly") {
  const auto m = with_psi(make_model(1.0 / 3.0, M_PI, -0.123456789123456789, 1.1, 2.0), 0.01,
                          -0.02, 0.003, 0.0);
  const auto kv = model_to_key_value(m);
  const auto back = model_from_key_value(kv);
  CHECK(back.sing.a == m.sing.a);
  CHECK(back.sing.b == m.sing.b);
  CHECK(back.sing.p == m.sing.p);
  CHECK(back.theta == m.theta);
  CHECK(back.T == m.T);
  CHECK(back.theta_interval.lo == m.theta_interval.lo);
  CHECK(back.theta_interval.hi == m.theta_interval.hi);
  for (int k = 0; k < 4; ++k) CHECK(back.smooth.c[k] == m.smooth.c[k]);
  CHECK(model_fingerprint(back) == model_fingerprint(m));
  CHECK(model_fingerprint(back) != model_fingerprint(make_model(1, 1, 0.5)));
}
