#include "singloc/quadrature.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>

namespace singloc::quad {

namespace {

// boost's xc is the signed distance to the nearest endpoint: negative near
// the lower endpoint (xc = x - lo), positive near the upper (xc = hi - x).
double integrate_piece(const Integrand& f, double lo, double hi, const Options& opt) {
  if (!(hi > lo)) return 0.0;
  boost::math::quadrature::tanh_sinh<double> integrator(opt.max_refinements);
  return integrator.integrate(
      [&](double x, double xc) {
        const double dist_lo = (xc < 0) ? -xc : x - lo;
        const double dist_hi = (xc > 0) ? xc : hi - x;
        return f(x, dist_lo, dist_hi);
      },
      lo, hi, opt.rel_tol);
}

std::vector<double> piece_bounds(double lo, double hi, std::vector<double>& splits) {
  std::sort(splits.begin(), splits.end());
  std::vector<double> bounds;
  bounds.push_back(lo);
  for (double s : splits) {
    if (s > bounds.back() && s < hi) bounds.push_back(s);
  }
  bounds.push_back(hi);
  return bounds;
}

}  // namespace

double integrate(const Integrand& f, double lo, double hi, const Options& opt) {
  return integrate_piece(f, lo, hi, opt);
}

double integrate_split(const Integrand& f, double lo, double hi, std::vector<double> splits,
                       const Options& opt) {
  if (!(hi > lo)) return 0.0;
  const auto bounds = piece_bounds(lo, hi, splits);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
    total += integrate_piece(f, bounds[i], bounds[i + 1], opt);
  }
  return total;
}

std::complex<double> integrate_split_complex(const ComplexIntegrand& f, double lo, double hi,
                                             std::vector<double> splits, const Options& opt) {
  // The tanh-sinh engine here is real-valued; run the two components
  // separately (nodes are cheap relative to robustness).
  const double re = integrate_split(
      [&](double x, double da, double db) { return f(x, da, db).real(); }, lo, hi, splits, opt);
  const double im = integrate_split(
      [&](double x, double da, double db) { return f(x, da, db).imag(); }, lo, hi, splits, opt);
  return {re, im};
}

double expm1m(double y) {
  if (std::fabs(y) > 1e-3) return std::expm1(y) - y;
  // series y^2/2 (1 + y/3 + y^2/12 + y^3/60)
  return y * y * (0.5 + y * (1.0 / 6.0 + y * (1.0 / 24.0 + y / 120.0)));
}

std::complex<double> expm1m(std::complex<double> y) {
  if (std::abs(y) > 1e-3) return std::exp(y) - 1.0 - y;
  return y * y * (0.5 + y * (1.0 / 6.0 + y * (1.0 / 24.0 + y / 120.0)));
}

}  // namespace singloc::quad
