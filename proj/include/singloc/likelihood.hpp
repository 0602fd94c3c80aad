#pragma once

#include "singloc/model.hpp"
#include "singloc/sampler.hpp"

namespace singloc {

/// Extended-real log-likelihood-ratio value. +infinity can only arise when
/// p < 0 and an event time coincides exactly with the first shift argument;
/// -infinity when p > 0 does. Callers that scan a shift grid observe the
/// flag and skip singular nodes instead of failing.
struct LogLikelihoodValue {
  double value = 0.0;
  bool at_event_singularity = false;
};

/// Rate exponent nu = 1/(p+1): errors shrink like n^{-nu}.
inline double rate_exponent(double p) { return 1.0 / (p + 1.0); }

/// n^{-nu}, the local coordinate scale at sample size n.
inline double local_scale(double p, std::size_t n) {
  return std::pow(static_cast<double>(n), -rate_exponent(p));
}

/// ln L(theta, theta1, X^n) = sum_i sum_{t in X_i} ln(S_theta(t)/S_theta1(t))
///                            - n (Lambda_theta(T) - Lambda_theta1(T)).
/// The integral term uses the closed-form cumulative intensity (the ratio
/// form integrates to the same difference exactly). Both shifts must lie in
/// (alpha, beta); throws out_of_interval otherwise. Exact coincidence of an
/// event with either shift sets the singularity flag; near-coincidence is a
/// caller-side (grid jitter) concern.
LogLikelihoodValue log_likelihood_ratio(const SampleBatch& batch, const IntensityModel& family,
                                        double theta, double theta1);

/// ln Z_n(u) = ln L(theta_true + u n^{-nu}, theta_true, X^n). Requires u in
/// U_n, i.e. the shifted point inside (alpha, beta).
LogLikelihoodValue normalized_llr(const SampleBatch& batch, const IntensityModel& family,
                                  double theta_true, double u);

/// Z_n(u)^{1/2} with the continuous extensions 0 at -infinity and +infinity
/// at +infinity.
double sqrt_llr(const SampleBatch& batch, const IntensityModel& family, double theta_true,
                double u);

/// Flattened batch view for repeated shift scans. profile(theta) is the
/// shift-dependent part of the log likelihood,
///   sum_events ln s(t - theta) - n Lambda_theta(T),
/// so log_likelihood_ratio(theta, ref) = profile(theta) - profile(ref);
/// grid scans evaluate profile(ref) once instead of per node. The pure
/// power-law family (psi = 0) short-circuits ln s to ln d + p ln|x|.
class BatchProfile {
 public:
  BatchProfile(const SampleBatch& batch, const IntensityModel& family);

  /// +infinity (p < 0) or -infinity (p > 0) when an event hits theta exactly.
  double operator()(double theta) const;

  std::size_t events() const { return times_.size(); }

 private:
  std::vector<double> times_;
  IntensityModel family_;
  double n_ = 0.0;
  bool pure_power_ = false;
  double log_a_ = 0.0, log_b_ = 0.0;
};

}  // namespace singloc
