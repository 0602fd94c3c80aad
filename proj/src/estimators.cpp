#include "singloc/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "singloc/errors.hpp"

namespace singloc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double jitter_step(const IntensityModel& family) { return 1e-12 * family.T; }

double boundary_margin(const IntensityModel& family) {
  return 1e-6 * family.theta_interval.width();
}

bool collides_with_event(double th, const std::vector<double>& sorted_events) {
  return std::binary_search(sorted_events.begin(), sorted_events.end(), th);
}

// Shifts any node that coincides exactly with an event time.
void jitter_nodes(std::vector<double>& nodes, const std::vector<double>& sorted_events,
                  double step) {
  for (double& th : nodes) {
    while (collides_with_event(th, sorted_events)) th += step;
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
}

std::vector<double> uniform_nodes(double lo, double hi, std::size_t count) {
  std::vector<double> nodes(count);
  for (std::size_t i = 0; i < count; ++i) {
    nodes[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return nodes;
}

double reference_shift(const IntensityModel& family, const std::vector<double>& sorted_events) {
  double ref = family.theta_interval.midpoint();
  while (collides_with_event(ref, sorted_events)) ref += jitter_step(family);
  return ref;
}

struct TrapezoidWeights {
  std::vector<double> w;
  explicit TrapezoidWeights(const std::vector<double>& x) : w(x.size(), 0.0) {
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
      const double h = 0.5 * (x[i + 1] - x[i]);
      w[i] += h;
      w[i + 1] += h;
    }
  }
};

// Max finite entry, or -inf when none.
double max_finite(const std::vector<double>& v) {
  double m = -kInf;
  for (double x : v) {
    if (std::isfinite(x) && x > m) m = x;
  }
  return m;
}

struct PosteriorSums {
  double mass = 0.0;       // sum w exp(v - shift)
  double first_moment = 0.0;  // sum w theta exp(v - shift)
  double shift = 0.0;
};

PosteriorSums accumulate(const std::vector<double>& thetas, const std::vector<double>& v) {
  PosteriorSums sums;
  sums.shift = max_finite(v);
  if (!std::isfinite(sums.shift)) return sums;
  const TrapezoidWeights tw(thetas);
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    if (v[i] == -kInf) continue;
    const double q = std::exp(v[i] - sums.shift);
    sums.mass += tw.w[i] * q;
    sums.first_moment += tw.w[i] * thetas[i] * q;
  }
  return sums;
}

std::vector<double> profile_loglik(const BatchProfile& profile, const std::vector<double>& nodes,
                                   double ref_value) {
  std::vector<double> ll(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double v = profile(nodes[i]);
    ll[i] = std::isfinite(v) ? v - ref_value : v;
  }
  return ll;
}

PosteriorGrid posterior_on_nodes(const BatchProfile& profile, const Prior& prior,
                                 std::vector<double> nodes, double ref_value) {
  std::vector<double> ll = profile_loglik(profile, nodes, ref_value);
  return posterior_from_loglik(std::move(nodes), std::move(ll), prior);
}

// Window [lo, hi] holding the posterior mass quantiles [q, 1-q], widened by
// `pad` cells on each side and around the modal node.
struct Window {
  double lo, hi;
};

Window mass_window(const PosteriorGrid& grid, double q, int pad) {
  const auto& x = grid.thetas;
  const auto& v = grid.log_posterior;
  const std::size_t m = x.size();
  std::vector<double> cell(m - 1, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const double qa = v[i] == -kInf ? 0.0 : std::exp(v[i]);
    const double qb = v[i + 1] == -kInf ? 0.0 : std::exp(v[i + 1]);
    cell[i] = 0.5 * (qa + qb) * (x[i + 1] - x[i]);
    total += cell[i];
  }
  double running = 0.0;
  double lo = x.front(), hi = x.back();
  for (std::size_t i = 0; i + 1 < m; ++i) {
    running += cell[i];
    if (running >= q * total) {
      lo = x[i];
      break;
    }
  }
  running = 0.0;
  for (std::size_t i = m - 1; i-- > 0;) {
    running += cell[i];
    if (running >= q * total) {
      hi = x[i + 1];
      break;
    }
  }
  const std::size_t mode =
      static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
  const double h = (x.back() - x.front()) / static_cast<double>(m - 1);
  lo = std::min(lo, x[mode]) - pad * h;
  hi = std::max(hi, x[mode]) + pad * h;
  return {std::max(lo, x.front()), std::min(hi, x.back())};
}

// Geometrically graded nodes toward each event in the window; for p < 0 the
// posterior has integrable |theta - t|^p spikes there and a uniform grid
// either misses or wildly overweights them.
void add_graded_event_nodes(std::vector<double>& nodes, const std::vector<double>& sorted_events,
                            double lo, double hi, double base_spacing) {
  const auto begin = std::lower_bound(sorted_events.begin(), sorted_events.end(), lo);
  const auto end = std::upper_bound(sorted_events.begin(), sorted_events.end(), hi);
  for (auto it = begin; it != end; ++it) {
    double off = 0.5 * base_spacing;
    for (int level = 0; level < 26; ++level, off *= 0.5) {
      for (int side = -1; side <= 1; side += 2) {
        const double th = *it + side * off;
        if (th > lo && th < hi && th != *it) nodes.push_back(th);
      }
    }
  }
}

double golden_max(const std::function<double(double)>& g, double lo, double hi, int iters) {
  constexpr double invphi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = g(x1), f2 = g(x2);
  for (int it = 0; it < iters && b - a > 0.0; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = g(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = g(x1);
    }
  }
  return f1 > f2 ? x1 : x2;
}

}  // namespace

EstimatorConfig estimator_config_from_key_value(const KeyValue& kv, const std::string& prefix) {
  EstimatorConfig cfg;
  cfg.grid_size = static_cast<std::size_t>(get_int_or(kv, prefix + "grid_size", 2048));
  cfg.refine_passes = static_cast<int>(get_int_or(kv, prefix + "refine_passes", 1));
  const std::string kind = get_string_or(kv, prefix + "prior_kind", "uniform");
  if (kind == "uniform") {
    cfg.prior = Prior::uniform();
  } else if (kind == "truncated-normal") {
    cfg.prior = Prior::truncated_normal(get_double(kv, prefix + "prior_mean"),
                                        get_double(kv, prefix + "prior_sd"));
  } else {
    raise(errc::bad_config, "unknown prior_kind '" + kind + "'");
  }
  if (cfg.grid_size < 64) raise(errc::bad_config, "grid_size must be >= 64");
  if (cfg.refine_passes < 0 || cfg.refine_passes > 6) {
    raise(errc::bad_config, "refine_passes must be in [0, 6]");
  }
  return cfg;
}

KeyValue estimator_config_to_key_value(const EstimatorConfig& cfg, const std::string& prefix) {
  KeyValue kv;
  kv[prefix + "grid_size"] = std::to_string(cfg.grid_size);
  kv[prefix + "refine_passes"] = std::to_string(cfg.refine_passes);
  kv[prefix + "prior_kind"] =
      cfg.prior.kind == Prior::Kind::uniform ? "uniform" : "truncated-normal";
  if (cfg.prior.kind == Prior::Kind::truncated_normal) {
    kv[prefix + "prior_mean"] = format_double(cfg.prior.mean);
    kv[prefix + "prior_sd"] = format_double(cfg.prior.sd);
  }
  return kv;
}

PosteriorGrid posterior_from_loglik(std::vector<double> thetas, std::vector<double> log_lik,
                                    const Prior& prior) {
  if (thetas.size() != log_lik.size() || thetas.size() < 2) {
    raise(errc::degenerate_grid, "grid needs >= 2 matched nodes");
  }
  if (!std::is_sorted(thetas.begin(), thetas.end()) ||
      std::adjacent_find(thetas.begin(), thetas.end()) != thetas.end()) {
    raise(errc::degenerate_grid, "grid nodes must be strictly increasing");
  }
  PosteriorGrid grid;
  grid.thetas = std::move(thetas);
  grid.log_lik = std::move(log_lik);
  grid.log_prior.resize(grid.thetas.size());
  std::vector<double> v(grid.thetas.size());
  for (std::size_t i = 0; i < grid.thetas.size(); ++i) {
    if (grid.log_lik[i] == kInf) {
      raise(errc::degenerate_grid, "+infinite log-likelihood at a grid node");
    }
    grid.log_prior[i] = prior.log_density(grid.thetas[i]);
    v[i] = grid.log_lik[i] + grid.log_prior[i];
  }
  const PosteriorSums sums = accumulate(grid.thetas, v);
  if (!(sums.mass > 0.0) || !std::isfinite(sums.shift)) {
    raise(errc::degenerate_grid, "posterior mass vanishes on the grid");
  }
  const double log_norm = sums.shift + std::log(sums.mass);
  grid.log_posterior.resize(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) grid.log_posterior[i] = v[i] - log_norm;
  return grid;
}

PosteriorGrid posterior_grid(const SampleBatch& batch, const IntensityModel& family,
                             const Prior& prior, std::size_t grid_size) {
  if (grid_size < 64) raise(errc::degenerate_grid, "grid_size must be >= 64");
  const double eps = boundary_margin(family);
  const auto events = pooled_event_times(batch);
  auto nodes =
      uniform_nodes(family.theta_interval.lo + eps, family.theta_interval.hi - eps, grid_size);
  jitter_nodes(nodes, events, jitter_step(family));
  const BatchProfile profile(batch, family);
  const double ref_value = profile(reference_shift(family, events));
  return posterior_on_nodes(profile, prior, std::move(nodes), ref_value);
}

double posterior_mass(const PosteriorGrid& grid) {
  const TrapezoidWeights tw(grid.thetas);
  double mass = 0.0;
  for (std::size_t i = 0; i < grid.thetas.size(); ++i) {
    if (grid.log_posterior[i] == -kInf) continue;
    mass += tw.w[i] * std::exp(grid.log_posterior[i]);
  }
  return mass;
}

double posterior_mean(const PosteriorGrid& grid) {
  const PosteriorSums sums = accumulate(grid.thetas, grid.log_posterior);
  return sums.first_moment / sums.mass;
}

EstimateResult bayes_estimate(const SampleBatch& batch, const IntensityModel& family,
                              const Prior& prior, const EstimatorConfig& cfg) {
  const auto events = pooled_event_times(batch);
  const BatchProfile profile(batch, family);
  const double ref_value = profile(reference_shift(family, events));
  const double eps = boundary_margin(family);
  const double lo0 = family.theta_interval.lo + eps;
  const double hi0 = family.theta_interval.hi - eps;

  PosteriorGrid grid;
  {
    auto nodes = uniform_nodes(lo0, hi0, std::max<std::size_t>(cfg.grid_size, 64));
    jitter_nodes(nodes, events, jitter_step(family));
    grid = posterior_on_nodes(profile, prior, std::move(nodes), ref_value);
  }

  EstimateResult out;
  out.kind = EstimateResult::Kind::bayes;
  {
    const TrapezoidWeights tw(grid.thetas);
    const auto& x = grid.thetas;
    const auto& v = grid.log_posterior;
    const double first = 0.5 * (std::exp(v[0]) + std::exp(v[1])) * (x[1] - x[0]);
    const std::size_t m = x.size();
    const double last = 0.5 * (std::exp(v[m - 2]) + std::exp(v[m - 1])) * (x[m - 1] - x[m - 2]);
    out.diagnostics.boundary_mass = first + last;
  }

  for (int pass = 0; pass < cfg.refine_passes; ++pass) {
    const Window win = mass_window(grid, 5e-4, 3);
    const double lo = std::max(win.lo, lo0);
    const double hi = std::min(win.hi, hi0);
    if (!(hi > lo)) break;
    auto nodes = uniform_nodes(lo, hi, cfg.grid_size);
    if (family.sing.p < 0.0) {
      add_graded_event_nodes(nodes, events, lo, hi,
                             (hi - lo) / static_cast<double>(cfg.grid_size));
    }
    jitter_nodes(nodes, events, jitter_step(family));
    grid = posterior_on_nodes(profile, prior, std::move(nodes), ref_value);
    ++out.diagnostics.refine_passes;
  }

  out.estimate = posterior_mean(grid);
  out.diagnostics.grid_size = grid.thetas.size();
  return out;
}

EstimateResult mle_estimate(const SampleBatch& batch, const IntensityModel& family,
                            const EstimatorConfig& cfg) {
  if (family.sing.p < 0.0) {
    raise(errc::mle_undefined_for_negative_p,
          "the likelihood is infinite at every event when p < 0");
  }
  const auto events = pooled_event_times(batch);
  const BatchProfile profile(batch, family);
  const double ref_value = profile(reference_shift(family, events));
  const double eps = boundary_margin(family);
  const double lo0 = family.theta_interval.lo + eps;
  const double hi0 = family.theta_interval.hi - eps;
  const std::size_t scan_size = std::max<std::size_t>(2 * cfg.grid_size, 64);

  auto nodes = uniform_nodes(lo0, hi0, scan_size);
  jitter_nodes(nodes, events, jitter_step(family));
  std::vector<double> values = profile_loglik(profile, nodes, ref_value);

  std::vector<std::size_t> order(nodes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  if (!std::isfinite(values[order.front()])) {
    raise(errc::all_nodes_singular, "no finite log-likelihood node in the scan");
  }

  // Refine the few best well-separated brackets; the coarse maximum can sit
  // next to a narrow dip when events cluster.
  const double step = jitter_step(family);
  auto avoid_events = [&](double th) {
    auto it = std::lower_bound(events.begin(), events.end(), th);
    for (int k = 0; k < 2; ++k) {
      const auto candidate = (k == 0) ? it : (it == events.begin() ? events.end() : it - 1);
      if (candidate != events.end() && std::fabs(*candidate - th) < step) {
        th += 2.0 * step;
        it = std::lower_bound(events.begin(), events.end(), th);
      }
    }
    return th;
  };
  auto objective = [&](double th) {
    th = avoid_events(th);
    const double v = profile(th);
    return std::isfinite(v) ? v - ref_value : -kInf;
  };

  std::vector<std::size_t> picked;
  for (std::size_t idx : order) {
    if (!std::isfinite(values[idx])) break;
    bool separated = true;
    for (std::size_t other : picked) {
      if ((idx > other ? idx - other : other - idx) < 2) {
        separated = false;
        break;
      }
    }
    if (separated) picked.push_back(idx);
    if (picked.size() == 5) break;
  }

  struct Candidate {
    double theta;
    double value;
  };
  std::vector<Candidate> candidates;
  for (std::size_t idx : picked) {
    const double lo = idx == 0 ? nodes.front() : nodes[idx - 1];
    const double hi = idx + 1 == nodes.size() ? nodes.back() : nodes[idx + 1];
    const double th = golden_max(objective, lo, hi, 90);
    candidates.push_back({avoid_events(th), objective(th)});
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return a.value > b.value || (a.value == b.value && a.theta < b.theta);
  });

  EstimateResult out;
  out.kind = EstimateResult::Kind::mle;
  out.diagnostics.grid_size = scan_size;
  double best_theta = candidates.front().theta;
  const double tie_tol = 1e-9 * std::max(1.0, std::fabs(candidates.front().value));
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (candidates.front().value - candidates[i].value <= tie_tol) {
      out.diagnostics.tie_detected = true;
      best_theta = std::min(best_theta, candidates[i].theta);  // smallest-shift tie-break
    }
  }
  out.estimate = best_theta;
  return out;
}

}  // namespace singloc
