#pragma once

#include <array>
#include <cmath>
#include <limits>

namespace singloc {

/// Two-sided power law d(x)|x|^p with d(x) = a for x < 0 and b for x > 0.
/// The order p lives in (-1,0) u (0,1): negative p blows up at the origin
/// (infinity-type), positive p vanishes there (zero-type).
struct PowerSingularity {
  double a = 1.0;  // left amplitude
  double b = 1.0;  // right amplitude
  double p = 0.5;  // singularity order

  double side(double x) const { return x < 0.0 ? a : b; }
};

/// Polynomial smooth part psi(x) = c0 + c1 x + c2 x^2 + c3 x^3 on [-T,T].
/// The constant term is admissible only for p < 0; for p > 0 the intensity
/// must vanish at the singular point, so validation forces c0 = 0 there.
/// Polynomials are Lipschitz on the window, hence Holder of every order
/// needed for admissible p.
struct SmoothPart {
  std::array<double, 4> c{0.0, 0.0, 0.0, 0.0};

  double eval(double x) const { return c[0] + x * (c[1] + x * (c[2] + x * c[3])); }

  /// Antiderivative with value 0 at the origin.
  double antiderivative(double x) const {
    return x * (c[0] + x * (c[1] / 2.0 + x * (c[2] / 3.0 + x * (c[3] / 4.0))));
  }

  bool is_zero() const { return c[0] == 0.0 && c[1] == 0.0 && c[2] == 0.0 && c[3] == 0.0; }
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  double midpoint() const { return 0.5 * (lo + hi); }
  bool contains(double x) const { return x > lo && x < hi; }
};

/// Shift family of intensities S_theta(t) = s(t - theta) on the observation
/// window [0,T], with s(x) = d(x)|x|^p + psi(x) and the shift restricted to
/// the open interval (alpha, beta) inside (0,T).
///
/// Instances are treated as immutable once validate() has passed; every
/// operation below is a pure function, safe to share across workers.
struct IntensityModel {
  PowerSingularity sing;
  SmoothPart smooth;
  double theta = 1.0;  // evaluation / data-generating shift
  double T = 2.0;      // observation window length
  Interval theta_interval{0.5, 1.5};

  /// Same family evaluated at another shift.
  IntensityModel with_theta(double th) const {
    IntensityModel m = *this;
    m.theta = th;
    return m;
  }

  /// Base profile s(x). At x = 0 returns +infinity for p < 0 and psi(0)
  /// for p > 0 (zero after validation): the singular value is a feature of
  /// the model, not an error.
  double s(double x) const {
    if (x == 0.0) {
      return sing.p < 0.0 ? std::numeric_limits<double>::infinity() : smooth.c[0];
    }
    return sing.side(x) * std::pow(std::fabs(x), sing.p) + smooth.eval(x);
  }

  double intensity(double t) const { return s(t - theta); }

  /// Exact cumulative intensity Lambda(t) = int_0^t s(x - theta) dx: power
  /// part in closed form on each side of theta plus the exact polynomial
  /// antiderivative. Continuous, nondecreasing, Lambda(0) = 0.
  double cumulative(double t) const {
    const double y0 = -theta;
    const double y1 = t - theta;
    return power_antiderivative(y1) - power_antiderivative(y0) + smooth.antiderivative(y1) -
           smooth.antiderivative(y0);
  }

  double total_mass() const { return cumulative(T); }

 private:
  // int_0^y d(x)|x|^p dx
  double power_antiderivative(double y) const {
    if (y == 0.0) return 0.0;
    const double amp = y > 0.0 ? sing.b : -sing.a;
    return amp * std::pow(std::fabs(y), sing.p + 1.0) / (sing.p + 1.0);
  }
};

/// Checks every model invariant: order range, amplitude positivity,
/// psi(0) = 0 for p > 0, interval placement, and strict positivity of s on
/// [-T,T]\{0}. Positivity is decided by the near-origin domination radius
/// (largest delta with |psi| <= min(a,b)|x|^p / 2 on (-delta,delta)) plus a
/// grid scan of at least 10^4 points outside it. Throws Error on failure.
void validate(const IntensityModel& model);

/// S_theta(t) for t in [0,T]; +infinity at t = theta when p < 0, psi(0)
/// when p > 0.
double intensity_at(const IntensityModel& model, double t);

/// Closed-form Lambda(t); see IntensityModel::cumulative.
double cumulative_intensity(const IntensityModel& model, double t);

/// Squared Hellinger-type distance between the shifts th1 and th2:
/// int_0^T [sqrt(s(t-th1)) - sqrt(s(t-th2))]^2 dt, by singularity-aware
/// quadrature with subdivision at both shifts. Relative accuracy ~1e-8.
double hellinger_between(const IntensityModel& model, double th1, double th2);

/// F(u) = int_0^T [sqrt(S_{theta+u}) - sqrt(S_theta)]^2 dt. Requires
/// theta + u inside (alpha, beta); throws out_of_interval otherwise.
double hellinger_F(const IntensityModel& model, double u);

}  // namespace singloc
