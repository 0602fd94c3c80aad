#include "singloc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace singloc::stats {

double mean(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

MomentEstimate moment(std::span<const double> xs, int k, bool absolute) {
  std::vector<double> powered(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double base = absolute ? std::fabs(xs[i]) : xs[i];
    powered[i] = std::pow(base, k);
  }
  MomentEstimate est;
  est.value = mean(powered);
  est.se = std::sqrt(variance(powered) / static_cast<double>(powered.size()));
  return est;
}

double ks_two_sample(std::vector<double> xs, std::vector<double> ys) {
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  const double nx = static_cast<double>(xs.size());
  const double ny = static_cast<double>(ys.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < xs.size() && j < ys.size()) {
    const double t = std::min(xs[i], ys[j]);
    while (i < xs.size() && xs[i] <= t) ++i;
    while (j < ys.size() && ys[j] <= t) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return d;
}

double ks_uniform(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double fi = static_cast<double>(i) / n;
    const double fi1 = static_cast<double>(i + 1) / n;
    d = std::max({d, xs[i] - fi, fi1 - xs[i]});
  }
  return d;
}

double kolmogorov_cdf(double x) {
  if (x <= 0.0) return 0.0;
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    s += (k % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return 1.0 - 2.0 * s;
}

double ks_critical_value(double level, std::size_t n) {
  double lo = 0.0, hi = 4.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (kolmogorov_cdf(mid) < 1.0 - level ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi) / std::sqrt(static_cast<double>(n));
}

double gammp(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gammp domain");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) {
    // series
    double ap = a, sum = 1.0 / a, del = sum;
    for (int it = 0; it < 500; ++it) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  // continued fraction for Q, return 1 - Q
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return 1.0 - std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

double chi2_cdf(double x, int df) { return gammp(0.5 * df, 0.5 * x); }

double chi2_quantile(double prob, int df) {
  double lo = 0.0, hi = 10.0 * df + 100.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (chi2_cdf(mid, df) < prob ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double poisson_pmf(std::int64_t k, double mean) {
  if (k < 0) return 0.0;
  return std::exp(static_cast<double>(k) * std::log(mean) - mean -
                  std::lgamma(static_cast<double>(k) + 1.0));
}

Chi2Result chi2_poisson_gof(const std::vector<std::int64_t>& counts, double mean, double level) {
  const double m = static_cast<double>(counts.size());
  // Bin by count value, then merge right-to-left until expected >= 5.
  std::int64_t kmax = 0;
  for (std::int64_t c : counts) kmax = std::max(kmax, c);
  std::vector<double> expected;
  std::vector<double> observed;
  double tail_prob = 1.0;
  for (std::int64_t k = 0; k <= kmax; ++k) {
    const double pk = poisson_pmf(k, mean);
    expected.push_back(m * pk);
    tail_prob -= pk;
    observed.push_back(0.0);
  }
  expected.push_back(std::max(m * tail_prob, 0.0));  // counts > kmax (none observed)
  observed.push_back(0.0);
  for (std::int64_t c : counts) observed[static_cast<std::size_t>(c)] += 1.0;
  // merge sparse bins from the right, then from the left
  while (expected.size() > 2 && expected.back() < 5.0) {
    expected[expected.size() - 2] += expected.back();
    observed[observed.size() - 2] += observed.back();
    expected.pop_back();
    observed.pop_back();
  }
  while (expected.size() > 2 && expected.front() < 5.0) {
    expected[1] += expected[0];
    observed[1] += observed[0];
    expected.erase(expected.begin());
    observed.erase(observed.begin());
  }
  Chi2Result result;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const double diff = observed[i] - expected[i];
    result.statistic += diff * diff / expected[i];
  }
  result.df = static_cast<int>(expected.size()) - 1;
  result.threshold = chi2_quantile(1.0 - level, result.df);
  result.pass = result.statistic <= result.threshold;
  return result;
}

OlsFit ols_fit(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 3) throw std::invalid_argument("ols_fit needs >= 3 points");
  const double xbar = mean(xs), ybar = mean(ys);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - xbar) * (xs[i] - xbar);
    sxy += (xs[i] - xbar) * (ys[i] - ybar);
  }
  OlsFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;
  double rss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    rss += r * r;
  }
  fit.slope_se = std::sqrt(rss / static_cast<double>(xs.size() - 2) / sxx);
  return fit;
}

double median(std::vector<double> xs) {
  const std::size_t mid = xs.size() / 2;
  std::nth_element(xs.begin(), xs.begin() + mid, xs.end());
  double hi = xs[mid];
  if (xs.size() % 2 == 1) return hi;
  std::nth_element(xs.begin(), xs.begin() + mid - 1, xs.end());
  return 0.5 * (hi + xs[mid - 1]);
}

}  // namespace singloc::stats
