#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace singloc::stats {

double mean(std::span<const double> xs);
double variance(std::span<const double> xs);  // unbiased

/// Monte Carlo estimate of E g with its standard error.
struct MomentEstimate {
  double value = 0.0;
  double se = 0.0;
};

/// E |x|^k (absolute = true) or E x^k over the sample, with the standard
/// error of the sample mean.
MomentEstimate moment(std::span<const double> xs, int k, bool absolute = true);

/// Exact two-sample Kolmogorov-Smirnov statistic sup|F1 - F2| from the
/// sorted merge of both samples.
double ks_two_sample(std::vector<double> xs, std::vector<double> ys);

/// One-sample KS distance of the sample from Uniform(0,1).
double ks_uniform(std::vector<double> xs);

/// Asymptotic Kolmogorov distribution K(x) = P(sup |B(t)| <= x) and the
/// one-sample critical distance at the given test level.
double kolmogorov_cdf(double x);
double ks_critical_value(double level, std::size_t n);

/// Regularized lower incomplete gamma P(a, x).
double gammp(double a, double x);
double chi2_cdf(double x, int df);
double chi2_quantile(double prob, int df);

double poisson_pmf(std::int64_t k, double mean);

/// Chi-square goodness of fit of iid counts against Poisson(mean), with
/// tail bins merged until every expected count is at least 5.
struct Chi2Result {
  double statistic = 0.0;
  int df = 0;
  double threshold = 0.0;  // quantile at 1 - level
  bool pass = false;
};
Chi2Result chi2_poisson_gof(const std::vector<std::int64_t>& counts, double mean, double level);

/// Least squares line fit with the usual residual-based slope standard
/// error: se^2 = (sum r^2 / (m-2)) / sum (x - xbar)^2.
struct OlsFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
};
OlsFit ols_fit(std::span<const double> xs, std::span<const double> ys);

double median(std::vector<double> xs);

}  // namespace singloc::stats
