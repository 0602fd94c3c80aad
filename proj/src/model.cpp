#include "singloc/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "singloc/errors.hpp"
#include "singloc/quadrature.hpp"

namespace singloc {

namespace {

// Largest delta in (0, T] such that |psi(x)| <= min(a,b)|x|^p / 2 for all
// |x| <= delta. For p > 0 this uses |psi(x)| <= |x| (|c1| + |c2|d + |c3|d^2)
// (c0 = 0 there); for p < 0 the crude bound sum_k |ck| d^k. Both sides are
// monotone in delta, so bisection suffices. Returns 0 if even tiny radii
// fail (cannot happen for a valid polynomial smooth part, but kept safe).
double domination_radius(const IntensityModel& m) {
  const auto& c = m.smooth.c;
  if (m.smooth.is_zero()) return m.T;
  const double target = 0.5 * std::min(m.sing.a, m.sing.b);
  const double p = m.sing.p;
  auto envelope = [&](double d) {
    if (p > 0.0) {
      // |psi(x)| / |x|^p <= d^{1-p} (|c1| + |c2| d + |c3| d^2)
      return std::pow(d, 1.0 - p) *
             (std::fabs(c[1]) + d * (std::fabs(c[2]) + d * std::fabs(c[3])));
    }
    // |psi(x)| / |x|^p <= d^{-p} sum_k |ck| d^k
    return std::pow(d, -p) *
           (std::fabs(c[0]) + d * (std::fabs(c[1]) + d * (std::fabs(c[2]) + d * std::fabs(c[3]))));
  };
  if (envelope(m.T) <= target) return m.T;
  double lo = 0.0, hi = m.T;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (envelope(mid) <= target ? lo : hi) = mid;
  }
  return lo;
}

// t - th with endpoint-exact arithmetic: when th coincides with a piece
// endpoint the quadrature distances stay accurate where t itself rounds.
double shifted_coordinate(double t, double th, double piece_lo, double piece_hi, double dist_lo,
                          double dist_hi) {
  if (th == piece_lo) return dist_lo;
  if (th == piece_hi) return -dist_hi;
  return t - th;
}

}  // namespace

void validate(const IntensityModel& model) {
  std::ostringstream msg;
  const double p = model.sing.p;
  if (!(p > -1.0 && p < 1.0) || p == 0.0 || std::isnan(p)) {
    msg << "p = " << p << " must lie in (-1,0) or (0,1)";
    raise(errc::invalid_order, msg.str());
  }
  if (!(model.sing.a > 0.0) || !(model.sing.b > 0.0)) {
    msg << "amplitudes a = " << model.sing.a << ", b = " << model.sing.b << " must be positive";
    raise(errc::nonpositive_intensity, msg.str());
  }
  if (p > 0.0 && model.smooth.c[0] != 0.0) {
    msg << "psi(0) = " << model.smooth.c[0] << " must vanish when p > 0";
    raise(errc::smooth_part_nonzero_at_origin, msg.str());
  }
  if (!(model.T > 0.0)) {
    raise(errc::bad_interval, "window length T must be positive");
  }
  const Interval th = model.theta_interval;
  if (!(th.lo >= 0.0 && th.hi <= model.T && th.lo < th.hi)) {
    msg << "(alpha,beta) = (" << th.lo << "," << th.hi << ") must sit inside (0,T) = (0," << model.T
        << ")";
    raise(errc::bad_interval, msg.str());
  }
  if (!th.contains(model.theta)) {
    msg << "theta = " << model.theta << " outside (alpha,beta) = (" << th.lo << "," << th.hi << ")";
    raise(errc::bad_interval, msg.str());
  }

  // Positivity: inside the domination radius s(x) >= d(x)|x|^p / 2 > 0 by
  // construction; outside it scan a grid (>= 10^4 points over both sides).
  const double delta = domination_radius(model);
  if (delta <= 0.0) {
    raise(errc::nonpositive_intensity, "no domination radius around the singular point");
  }
  if (delta < model.T) {
    const int points_per_side = 5001;
    for (int side = -1; side <= 1; side += 2) {
      for (int i = 0; i < points_per_side; ++i) {
        const double frac = static_cast<double>(i) / (points_per_side - 1);
        const double x = side * (delta + frac * (model.T - delta));
        if (!(model.s(x) > 0.0)) {
          msg << "s(" << x << ") = " << model.s(x) << " is not positive";
          raise(errc::nonpositive_intensity, msg.str());
        }
      }
    }
  }
}

double intensity_at(const IntensityModel& model, double t) { return model.intensity(t); }

double cumulative_intensity(const IntensityModel& model, double t) { return model.cumulative(t); }

double hellinger_between(const IntensityModel& model, double th1, double th2) {
  quad::Options opt;
  opt.rel_tol = 1e-9;
  std::vector<double> splits = {th1, th2};
  std::sort(splits.begin(), splits.end());
  double total = 0.0;
  std::vector<double> bounds{0.0};
  for (double s : splits) {
    if (s > bounds.back() && s < model.T) bounds.push_back(s);
  }
  bounds.push_back(model.T);
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
    const double lo = bounds[i], hi = bounds[i + 1];
    total += quad::integrate(
        [&](double t, double da, double db) {
          if (da == 0.0 || db == 0.0) return 0.0;  // beyond representable distance
          const double x1 = shifted_coordinate(t, th1, lo, hi, da, db);
          const double x2 = shifted_coordinate(t, th2, lo, hi, da, db);
          const double r = std::sqrt(model.s(x1)) - std::sqrt(model.s(x2));
          return r * r;
        },
        lo, hi, opt);
  }
  return total;
}

double hellinger_F(const IntensityModel& model, double u) {
  const double shifted = model.theta + u;
  if (!model.theta_interval.contains(shifted)) {
    std::ostringstream msg;
    msg << "theta + u = " << shifted << " outside (" << model.theta_interval.lo << ","
        << model.theta_interval.hi << ")";
    raise(errc::out_of_interval, msg.str());
  }
  if (u == 0.0) return 0.0;
  return hellinger_between(model, shifted, model.theta);
}

}  // namespace singloc
