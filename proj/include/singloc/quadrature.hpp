#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace singloc::quad {

/// Integrand evaluated at x together with its exact distances to the two
/// endpoints of the active piece. Near an endpoint the abscissa x rounds to
/// the endpoint itself while the distance stays accurate down to ~1e-300,
/// which is what integrable endpoint singularities (|y|^p, log|y|) need.
using Integrand = std::function<double(double x, double dist_lo, double dist_hi)>;
using ComplexIntegrand = std::function<std::complex<double>(double x, double dist_lo, double dist_hi)>;

struct Options {
  double rel_tol = 1e-10;
  std::size_t max_refinements = 15;
};

/// Tanh-sinh quadrature of f over [lo, hi]. Endpoint singularities must be
/// expressed through the distance arguments.
double integrate(const Integrand& f, double lo, double hi, const Options& opt = {});

/// Splits [lo, hi] at the interior points (singularities of f) and sums the
/// piecewise tanh-sinh integrals; f receives distances to the active piece's
/// endpoints. Split points outside (lo, hi) are ignored.
double integrate_split(const Integrand& f, double lo, double hi, std::vector<double> splits,
                       const Options& opt = {});

std::complex<double> integrate_split_complex(const ComplexIntegrand& f, double lo, double hi,
                                             std::vector<double> splits, const Options& opt = {});

/// exp(y) - 1 - y without cancellation for small |y| (real and complex).
double expm1m(double y);
std::complex<double> expm1m(std::complex<double> y);

}  // namespace singloc::quad
