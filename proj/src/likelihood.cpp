#include "singloc/likelihood.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "singloc/errors.hpp"

namespace singloc {

namespace {

void require_in_interval(const IntensityModel& family, double th, const char* name) {
  if (!family.theta_interval.contains(th)) {
    std::ostringstream msg;
    msg << name << " = " << th << " outside (" << family.theta_interval.lo << ","
        << family.theta_interval.hi << ")";
    raise(errc::out_of_interval, msg.str());
  }
}

}  // namespace

LogLikelihoodValue log_likelihood_ratio(const SampleBatch& batch, const IntensityModel& family,
                                        double theta, double theta1) {
  require_in_interval(family, theta, "theta");
  require_in_interval(family, theta1, "theta1");
  constexpr double inf = std::numeric_limits<double>::infinity();
  const double p = family.sing.p;

  bool plus_inf = false, minus_inf = false, singular = false;
  double event_sum = 0.0;
  for (const auto& path : batch.paths) {
    for (double t : path.times) {
      if (t == theta) {
        singular = true;
        (p < 0.0 ? plus_inf : minus_inf) = true;
        continue;
      }
      if (t == theta1) {
        singular = true;
        (p < 0.0 ? minus_inf : plus_inf) = true;
        continue;
      }
      event_sum += std::log(family.s(t - theta)) - std::log(family.s(t - theta1));
    }
  }

  LogLikelihoodValue out;
  out.at_event_singularity = singular;
  if (plus_inf && minus_inf) {
    out.value = std::numeric_limits<double>::quiet_NaN();  // two exact collisions at once
    return out;
  }
  if (plus_inf) {
    out.value = inf;
    return out;
  }
  if (minus_inf) {
    out.value = -inf;
    return out;
  }
  const double n = static_cast<double>(batch.n());
  const double integral_term =
      family.with_theta(theta).total_mass() - family.with_theta(theta1).total_mass();
  out.value = event_sum - n * integral_term;
  return out;
}

LogLikelihoodValue normalized_llr(const SampleBatch& batch, const IntensityModel& family,
                                  double theta_true, double u) {
  require_in_interval(family, theta_true, "theta");
  const double theta_u = theta_true + u * local_scale(family.sing.p, batch.n());
  if (!family.theta_interval.contains(theta_u)) {
    std::ostringstream msg;
    msg << "u = " << u << " outside U_n (shifted point " << theta_u << ")";
    raise(errc::out_of_interval, msg.str());
  }
  if (u == 0.0) return {0.0, false};
  return log_likelihood_ratio(batch, family, theta_u, theta_true);
}

double sqrt_llr(const SampleBatch& batch, const IntensityModel& family, double theta_true,
                double u) {
  const LogLikelihoodValue v = normalized_llr(batch, family, theta_true, u);
  if (v.value == -std::numeric_limits<double>::infinity()) return 0.0;
  if (v.value == std::numeric_limits<double>::infinity()) {
    return std::numeric_limits<double>::infinity();
  }
  return std::exp(0.5 * v.value);
}

BatchProfile::BatchProfile(const SampleBatch& batch, const IntensityModel& family)
    : times_(pooled_event_times(batch)),
      family_(family),
      n_(static_cast<double>(batch.n())),
      pure_power_(family.smooth.is_zero()),
      log_a_(std::log(family.sing.a)),
      log_b_(std::log(family.sing.b)) {}

double BatchProfile::operator()(double theta) const {
  const double p = family_.sing.p;
  double sum = 0.0;
  if (pure_power_) {
    for (double t : times_) {
      const double x = t - theta;
      if (x == 0.0) return p < 0.0 ? std::numeric_limits<double>::infinity()
                                   : -std::numeric_limits<double>::infinity();
      sum += (x < 0.0 ? log_a_ : log_b_) + p * std::log(std::fabs(x));
    }
  } else {
    for (double t : times_) {
      const double x = t - theta;
      if (x == 0.0) return p < 0.0 ? std::numeric_limits<double>::infinity()
                                   : -std::numeric_limits<double>::infinity();
      sum += std::log(family_.s(x));
    }
  }
  return sum - n_ * family_.with_theta(theta).total_mass();
}

}  // namespace singloc
