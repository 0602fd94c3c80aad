#include "singloc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "singloc/errors.hpp"
#include "singloc/likelihood.hpp"
#include "singloc/parallel.hpp"
#include "singloc/rng.hpp"
#include "singloc/sampler.hpp"
#include "singloc/version.hpp"

namespace singloc {

namespace {

std::uint64_t tag_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::size_t> parse_ladder(const std::string& text) {
  std::vector<std::size_t> ladder;
  std::istringstream in(text);
  std::string cell;
  while (std::getline(in, cell, ',')) {
    if (!cell.empty()) ladder.push_back(static_cast<std::size_t>(std::strtoull(cell.c_str(), nullptr, 10)));
  }
  if (ladder.empty() || !std::is_sorted(ladder.begin(), ladder.end()) ||
      std::adjacent_find(ladder.begin(), ladder.end()) != ladder.end()) {
    raise(errc::bad_config, "n_ladder must be a strictly increasing comma list");
  }
  return ladder;
}

std::string format_ladder(const std::vector<std::size_t>& ladder) {
  std::ostringstream out;
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    if (i) out << ",";
    out << ladder[i];
  }
  return out.str();
}

bool wants_bayes(const ExperimentConfig& cfg) {
  return cfg.estimator_kind == "bayes" || cfg.estimator_kind == "both";
}

bool wants_mle(const ExperimentConfig& cfg) {
  return cfg.estimator_kind == "mle" || cfg.estimator_kind == "both";
}

// Estimation errors for one rung, replicate r seeded by (seed, kind, n, r).
std::vector<double> replicate_errors(const ExperimentConfig& cfg, const std::string& which,
                                     std::size_t n) {
  std::vector<double> errors(cfg.replicates);
  const std::uint64_t tag = tag_hash(cfg.kind + ":" + which);
  parallel_for(cfg.replicates, cfg.threads, [&](std::size_t r) {
    const std::uint64_t batch_seed = derive_seed({cfg.seed, tag, n, r});
    const SampleBatch batch = sample_batch(cfg.model, n, batch_seed);
    const EstimateResult est =
        which == "mle" ? mle_estimate(batch, cfg.model, cfg.estimator)
                       : bayes_estimate(batch, cfg.model, cfg.estimator.prior, cfg.estimator);
    errors[r] = est.estimate - cfg.model.theta;
  });
  return errors;
}

void append_records(std::vector<ErrorRecord>& records, const std::vector<double>& errors,
                    std::size_t n, const std::string& which, double nu) {
  const double scale = std::pow(static_cast<double>(n), nu);
  for (std::size_t r = 0; r < errors.size(); ++r) {
    records.push_back({n, r, which, errors[r], errors[r] * scale});
  }
}

std::vector<double> rescale(const std::vector<double>& errors, std::size_t n, double nu) {
  const double scale = std::pow(static_cast<double>(n), nu);
  std::vector<double> out(errors.size());
  for (std::size_t i = 0; i < errors.size(); ++i) out[i] = errors[i] * scale;
  return out;
}

nlohmann::json moment_json(const stats::MomentEstimate& m) {
  return {{"value", m.value}, {"se", m.se}};
}

}  // namespace

ExperimentConfig experiment_config_from_key_value(const KeyValue& kv) {
  ExperimentConfig cfg;
  cfg.model = model_from_key_value(kv, "model.");
  validate(cfg.model);
  cfg.estimator = estimator_config_from_key_value(kv, "estimator.");
  cfg.limit = limit_config_from_key_value(kv, "limit.");
  if (const auto it = kv.find("experiment.n_ladder"); it != kv.end()) {
    cfg.n_ladder = parse_ladder(it->second);
  }
  cfg.replicates = static_cast<std::size_t>(get_int_or(kv, "experiment.replicates", 500));
  cfg.limit_replicates =
      static_cast<std::size_t>(get_int_or(kv, "experiment.limit_replicates", 0));
  cfg.seed = get_u64_or(kv, "experiment.seed", 1);
  cfg.kind = get_string_or(kv, "experiment.kind", "rate");
  cfg.estimator_kind = get_string_or(kv, "experiment.estimator", "bayes");
  cfg.lemma_u = get_double_or(kv, "experiment.u", 1.0);
  cfg.lemma_lambda = get_double_or(kv, "experiment.lambda", 1.0);
  if (cfg.estimator_kind != "bayes" && cfg.estimator_kind != "mle" &&
      cfg.estimator_kind != "both") {
    raise(errc::bad_config, "experiment.estimator must be bayes, mle or both");
  }
  // Infinity-type posteriors concentrate at rate n^{-1/(p+1)} with p+1 < 1;
  // one extra zoom pass keeps the final grid fine relative to the posterior
  // width across the whole ladder.
  if (cfg.model.sing.p < 0.0 && kv.find("estimator.refine_passes") == kv.end()) {
    cfg.estimator.refine_passes = std::max(cfg.estimator.refine_passes, 2);
  }
  return cfg;
}

KeyValue experiment_config_to_key_value(const ExperimentConfig& cfg) {
  KeyValue kv = model_to_key_value(cfg.model, "model.");
  const KeyValue est = estimator_config_to_key_value(cfg.estimator, "estimator.");
  kv.insert(est.begin(), est.end());
  const KeyValue lim = limit_config_to_key_value(cfg.limit, "limit.");
  kv.insert(lim.begin(), lim.end());
  kv["experiment.kind"] = cfg.kind;
  kv["experiment.n_ladder"] = format_ladder(cfg.n_ladder);
  kv["experiment.replicates"] = std::to_string(cfg.replicates);
  if (cfg.limit_replicates) {
    kv["experiment.limit_replicates"] = std::to_string(cfg.limit_replicates);
  }
  kv["experiment.seed"] = std::to_string(cfg.seed);
  kv["experiment.estimator"] = cfg.estimator_kind;
  if (cfg.kind == "lemma1") {
    kv["experiment.u"] = format_double(cfg.lemma_u);
    kv["experiment.lambda"] = format_double(cfg.lemma_lambda);
  }
  return kv;
}

RateReport run_rate_experiment(const ExperimentConfig& cfg) {
  if (cfg.n_ladder.size() < 2) raise(errc::bad_config, "rate experiment needs >= 2 ladder sizes");
  const double nu = rate_exponent(cfg.model.sing.p);
  RateReport report;
  std::vector<std::string> kinds;
  if (wants_bayes(cfg)) kinds.push_back("bayes");
  if (wants_mle(cfg)) kinds.push_back("mle");
  for (const auto& which : kinds) {
    EstimatorRate fit;
    fit.estimator = which;
    fit.target_slope = -nu;
    std::vector<double> log_n, log_rmse;
    for (std::size_t n : cfg.n_ladder) {
      const std::vector<double> errors = replicate_errors(cfg, which, n);
      append_records(report.records, errors, n, which, nu);
      std::vector<double> sq(errors.size()), absd(errors.size());
      for (std::size_t i = 0; i < errors.size(); ++i) {
        sq[i] = errors[i] * errors[i];
        absd[i] = std::fabs(errors[i]);
      }
      RateRow row;
      row.n = n;
      const auto m2 = stats::moment(errors, 2);
      row.rmse = std::sqrt(m2.value);
      row.rmse_se = m2.se / (2.0 * row.rmse);
      row.median_abs_error = stats::median(absd);
      fit.rows.push_back(row);
      log_n.push_back(std::log(static_cast<double>(n)));
      log_rmse.push_back(std::log(row.rmse));
    }
    if (fit.rows.size() >= 3) {
      const auto ols = stats::ols_fit(log_n, log_rmse);
      fit.slope = ols.slope;
      fit.slope_se = ols.slope_se;
    } else {
      fit.slope = (log_rmse.back() - log_rmse.front()) / (log_n.back() - log_n.front());
      fit.slope_se = 0.0;
    }
    report.fits.push_back(std::move(fit));
  }
  return report;
}

DistReport run_limit_dist_experiment(const ExperimentConfig& cfg) {
  const double nu = rate_exponent(cfg.model.sing.p);
  const std::size_t n = cfg.n_ladder.back();
  DistReport report;
  report.n = n;

  const LimitDraws draws = draw_zeta_xi(cfg.model.sing, cfg.limit, cfg.limit_m(),
                                        derive_seed({cfg.seed, tag_hash("limit-draws")}),
                                        cfg.threads);
  {
    const std::size_t half = draws.zetas.size() / 2;
    std::vector<double> first(draws.zetas.begin(), draws.zetas.begin() + half);
    std::vector<double> second(draws.zetas.begin() + half, draws.zetas.end());
    report.split_half_ks = stats::ks_two_sample(std::move(first), std::move(second));
  }

  auto compare = [&](const std::string& which, const std::vector<double>& limit_sample) {
    const std::vector<double> errors = replicate_errors(cfg, which, n);
    append_records(report.records, errors, n, which, nu);
    const std::vector<double> rescaled = rescale(errors, n, nu);
    DistComparison cmp;
    cmp.estimator = which;
    cmp.sample_size = rescaled.size();
    cmp.limit_size = limit_sample.size();
    cmp.ks = stats::ks_two_sample(rescaled, limit_sample);
    for (int k = 1; k <= 2; ++k) {
      cmp.moments.push_back({k, stats::moment(rescaled, k), stats::moment(limit_sample, k)});
    }
    report.comparisons.push_back(std::move(cmp));
  };

  if (wants_bayes(cfg)) compare("bayes", draws.zetas);
  if (wants_mle(cfg)) compare("mle", draws.xis);
  return report;
}

EfficiencyReport run_efficiency_experiment(const ExperimentConfig& cfg) {
  if (!(cfg.model.sing.p > 0.0)) {
    raise(errc::mle_undefined_for_negative_p, "efficiency comparison needs p > 0");
  }
  const double nu = rate_exponent(cfg.model.sing.p);
  const std::size_t n = cfg.n_ladder.back();
  EfficiencyReport report;
  report.n = n;

  const std::vector<double> bayes_err = replicate_errors(cfg, "bayes", n);
  const std::vector<double> mle_err = replicate_errors(cfg, "mle", n);
  append_records(report.records, bayes_err, n, "bayes", nu);
  append_records(report.records, mle_err, n, "mle", nu);
  report.bayes_m2 = stats::moment(rescale(bayes_err, n, nu), 2);
  report.mle_m2 = stats::moment(rescale(mle_err, n, nu), 2);

  const LimitDraws draws = draw_zeta_xi(cfg.model.sing, cfg.limit, cfg.limit_m(),
                                        derive_seed({cfg.seed, tag_hash("limit-draws")}),
                                        cfg.threads);
  report.zeta_m2 = stats::moment(draws.zetas, 2);
  report.xi_m2 = stats::moment(draws.xis, 2);

  const double sigma_pair = std::hypot(report.bayes_m2.se, report.mle_m2.se);
  report.ordering_margin = report.mle_m2.value + 2.0 * sigma_pair - report.bayes_m2.value;
  report.benchmark_gap = std::fabs(report.bayes_m2.value - report.zeta_m2.value);
  report.benchmark_band = 3.0 * std::hypot(report.bayes_m2.se, report.zeta_m2.se);
  return report;
}

Lemma1Report run_lemma1_check(const ExperimentConfig& cfg) {
  Lemma1Report report;
  report.u = cfg.lemma_u;
  report.lambda = cfg.lemma_lambda;
  report.limit_value =
      std::exp(limit_cf(cfg.lemma_lambda, cfg.lemma_u, cfg.model.sing, cfg.limit.quad_tol));
  const std::uint64_t tag = tag_hash("lemma1");
  for (std::size_t n : cfg.n_ladder) {
    std::vector<double> re(cfg.replicates), im(cfg.replicates);
    parallel_for(cfg.replicates, cfg.threads, [&](std::size_t r) {
      const SampleBatch batch = sample_batch(cfg.model, n, derive_seed({cfg.seed, tag, n, r}));
      const double v = normalized_llr(batch, cfg.model, cfg.model.theta, cfg.lemma_u).value;
      if (std::isfinite(v)) {
        re[r] = std::cos(cfg.lemma_lambda * v);
        im[r] = std::sin(cfg.lemma_lambda * v);
      } else {
        re[r] = 0.0;  // probability-zero singular draw contributes nothing
        im[r] = 0.0;
      }
    });
    Lemma1Row row;
    row.n = n;
    row.empirical = {stats::mean(re), stats::mean(im)};
    row.gap = std::abs(row.empirical - report.limit_value);
    row.mc_se = std::sqrt(stats::variance(re) / static_cast<double>(cfg.replicates) +
                          stats::variance(im) / static_cast<double>(cfg.replicates));
    report.rows.push_back(row);
  }
  report.gaps_decreasing = true;
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    if (!(report.rows[i].gap < report.rows[i - 1].gap)) report.gaps_decreasing = false;
  }
  report.final_gap = report.rows.back().gap;
  return report;
}

Lemma2Report run_lemma2_check(const ExperimentConfig& cfg) {
  Lemma2Report report;
  const double p = cfg.model.sing.p;
  const double theta = cfg.model.theta;
  report.fit_ns = {cfg.n_ladder.front(), cfg.n_ladder.back()};
  report.stochastic_n = cfg.n_ladder.front();
  report.replicates = cfg.replicates;

  // (u1, u2) grid inside U_n for the smallest fit size.
  const std::vector<double> us = {-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0};
  std::vector<std::pair<double, double>> pairs;
  for (std::size_t i = 0; i < us.size(); ++i) {
    for (std::size_t j = i + 1; j < us.size(); ++j) {
      const double gap = std::fabs(us[j] - us[i]);
      if (gap > 0.0 && gap <= 1.0) pairs.emplace_back(us[i], us[j]);
    }
  }

  for (std::size_t n : report.fit_ns) {
    const double scale = local_scale(p, n);
    double c_max = 0.0;
    for (const auto& [u1, u2] : pairs) {
      const double majorant =
          static_cast<double>(n) * hellinger_between(cfg.model, theta + u1 * scale,
                                                     theta + u2 * scale);
      c_max = std::max(c_max, majorant / std::pow(std::fabs(u1 - u2), p + 1.0));
    }
    report.fitted_C.push_back(c_max);
  }
  report.stability = std::fabs(report.fitted_C.back() - report.fitted_C.front()) /
                     report.fitted_C.front();

  // Stochastic side on a smaller pair subset at the smallest ladder size;
  // one batch per replicate serves every pair.
  const std::vector<std::pair<double, double>> mc_pairs = {
      {0.0, 0.5}, {0.0, 1.0}, {-0.5, 0.5}, {0.5, 1.5}, {-1.0, -0.5}, {1.0, 2.0}};
  const std::size_t n = report.stochastic_n;
  const double scale = local_scale(p, n);
  const std::uint64_t tag = tag_hash("lemma2");
  std::vector<std::vector<double>> diffs(mc_pairs.size(),
                                         std::vector<double>(cfg.replicates, 0.0));
  std::vector<double> wide(cfg.replicates, 0.0);
  parallel_for(cfg.replicates, cfg.threads, [&](std::size_t r) {
    const SampleBatch batch = sample_batch(cfg.model, n, derive_seed({cfg.seed, tag, n, r}));
    for (std::size_t k = 0; k < mc_pairs.size(); ++k) {
      const double s1 = sqrt_llr(batch, cfg.model, theta, mc_pairs[k].first);
      const double s2 = sqrt_llr(batch, cfg.model, theta, mc_pairs[k].second);
      diffs[k][r] = (s1 - s2) * (s1 - s2);
    }
    const double w1 = sqrt_llr(batch, cfg.model, theta, -1.0);
    const double w2 = sqrt_llr(batch, cfg.model, theta, 1.0);
    wide[r] = (w1 - w2) * (w1 - w2);
  });
  report.worst_margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < mc_pairs.size(); ++k) {
    Lemma2Pair pr;
    pr.u1 = mc_pairs[k].first;
    pr.u2 = mc_pairs[k].second;
    pr.majorant = static_cast<double>(n) * hellinger_between(cfg.model, theta + pr.u1 * scale,
                                                             theta + pr.u2 * scale);
    const auto m = stats::moment(diffs[k], 1, false);
    pr.mc_mean = m.value;
    pr.mc_se = m.se;
    report.worst_margin = std::min(report.worst_margin, pr.majorant + 3.0 * pr.mc_se - pr.mc_mean);
    report.pairs.push_back(pr);
  }
  report.wide_pair_mean = stats::mean(wide);
  return report;
}

Lemma3Report run_lemma3_check(const ExperimentConfig& cfg) {
  Lemma3Report report;
  const double p = cfg.model.sing.p;
  const std::size_t n = cfg.n_ladder.back();
  report.n = n;
  report.replicates = cfg.replicates;
  const double scale = local_scale(p, n);

  std::vector<double> grid;
  for (double u : {-4.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 4.0}) {
    if (cfg.model.theta_interval.contains(cfg.model.theta + u * scale)) grid.push_back(u);
  }
  if (grid.empty()) raise(errc::bad_config, "no admissible u grid point for lemma3");

  std::vector<double> f_values(grid.size());
  report.fitted_c = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    f_values[k] = hellinger_F(cfg.model, grid[k] * scale);
    const double ratio =
        static_cast<double>(n) * f_values[k] / std::pow(std::fabs(grid[k]), p + 1.0);
    report.fitted_c = std::min(report.fitted_c, ratio);
  }

  const std::uint64_t tag = tag_hash("lemma3");
  std::vector<std::vector<double>> sqrt_vals(grid.size(),
                                             std::vector<double>(cfg.replicates, 0.0));
  parallel_for(cfg.replicates, cfg.threads, [&](std::size_t r) {
    const SampleBatch batch = sample_batch(cfg.model, n, derive_seed({cfg.seed, tag, n, r}));
    for (std::size_t k = 0; k < grid.size(); ++k) {
      sqrt_vals[k][r] = sqrt_llr(batch, cfg.model, cfg.model.theta, grid[k]);
    }
  });
  report.worst_margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    Lemma3Point pt;
    pt.u = grid[k];
    pt.ratio = static_cast<double>(n) * f_values[k] / std::pow(std::fabs(grid[k]), p + 1.0);
    pt.bound = std::exp(-0.5 * static_cast<double>(n) * f_values[k]);
    const auto m = stats::moment(sqrt_vals[k], 1, false);
    pt.mc_sqrt_mean = m.value;
    pt.mc_se = m.se;
    report.worst_margin = std::min(report.worst_margin, pt.bound + 3.0 * pt.mc_se - pt.mc_sqrt_mean);
    report.points.push_back(pt);
  }
  return report;
}

MomentsReport run_moments_experiment(const ExperimentConfig& cfg) {
  const double nu = rate_exponent(cfg.model.sing.p);
  MomentsReport report;
  const LimitDraws draws = draw_zeta_xi(cfg.model.sing, cfg.limit, cfg.limit_m(),
                                        derive_seed({cfg.seed, tag_hash("limit-draws")}),
                                        cfg.threads);
  std::vector<std::string> kinds;
  if (wants_bayes(cfg)) kinds.push_back("bayes");
  if (wants_mle(cfg)) kinds.push_back("mle");
  for (const auto& which : kinds) {
    const auto& limit_sample = which == "mle" ? draws.xis : draws.zetas;
    for (std::size_t n : cfg.n_ladder) {
      const std::vector<double> errors = replicate_errors(cfg, which, n);
      append_records(report.records, errors, n, which, nu);
      const std::vector<double> rescaled = rescale(errors, n, nu);
      for (int k = 1; k <= 2; ++k) {
        report.rows.push_back(
            {n, k, which, stats::moment(rescaled, k), stats::moment(limit_sample, k)});
      }
    }
  }
  return report;
}

nlohmann::json to_json(const RateReport& r) {
  nlohmann::json fits = nlohmann::json::array();
  for (const auto& fit : r.fits) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : fit.rows) {
      rows.push_back({{"n", row.n},
                      {"rmse", row.rmse},
                      {"rmse_se", row.rmse_se},
                      {"median_abs_error", row.median_abs_error}});
    }
    fits.push_back({{"estimator", fit.estimator},
                    {"rows", rows},
                    {"slope", fit.slope},
                    {"slope_se", fit.slope_se},
                    {"target_slope", fit.target_slope}});
  }
  return {{"fits", fits}};
}

nlohmann::json to_json(const DistReport& r) {
  nlohmann::json comparisons = nlohmann::json::array();
  for (const auto& cmp : r.comparisons) {
    nlohmann::json moments = nlohmann::json::array();
    for (const auto& gap : cmp.moments) {
      moments.push_back(
          {{"k", gap.k}, {"empirical", moment_json(gap.empirical)}, {"limit", moment_json(gap.limit)}});
    }
    comparisons.push_back({{"estimator", cmp.estimator},
                           {"ks", cmp.ks},
                           {"sample_size", cmp.sample_size},
                           {"limit_size", cmp.limit_size},
                           {"moments", moments}});
  }
  return {{"n", r.n}, {"comparisons", comparisons}, {"split_half_ks", r.split_half_ks}};
}

nlohmann::json to_json(const EfficiencyReport& r) {
  return {{"n", r.n},
          {"bayes_m2", moment_json(r.bayes_m2)},
          {"mle_m2", moment_json(r.mle_m2)},
          {"zeta_m2", moment_json(r.zeta_m2)},
          {"xi_m2", moment_json(r.xi_m2)},
          {"ordering_margin", r.ordering_margin},
          {"benchmark_gap", r.benchmark_gap},
          {"benchmark_band", r.benchmark_band}};
}

nlohmann::json to_json(const Lemma1Report& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"n", row.n},
                    {"gap", row.gap},
                    {"mc_se", row.mc_se},
                    {"empirical_re", row.empirical.real()},
                    {"empirical_im", row.empirical.imag()}});
  }
  return {{"u", r.u},
          {"lambda", r.lambda},
          {"limit_re", r.limit_value.real()},
          {"limit_im", r.limit_value.imag()},
          {"rows", rows},
          {"gaps_decreasing", r.gaps_decreasing},
          {"final_gap", r.final_gap}};
}

nlohmann::json to_json(const Lemma2Report& r) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& pr : r.pairs) {
    pairs.push_back({{"u1", pr.u1},
                     {"u2", pr.u2},
                     {"majorant", pr.majorant},
                     {"mc_mean", pr.mc_mean},
                     {"mc_se", pr.mc_se}});
  }
  return {{"fit_ns", r.fit_ns},
          {"fitted_C", r.fitted_C},
          {"stability", r.stability},
          {"stochastic_n", r.stochastic_n},
          {"replicates", r.replicates},
          {"pairs", pairs},
          {"worst_margin", r.worst_margin},
          {"wide_pair_mean", r.wide_pair_mean}};
}

nlohmann::json to_json(const Lemma3Report& r) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& pt : r.points) {
    points.push_back({{"u", pt.u},
                      {"ratio", pt.ratio},
                      {"bound", pt.bound},
                      {"mc_sqrt_mean", pt.mc_sqrt_mean},
                      {"mc_se", pt.mc_se}});
  }
  return {{"n", r.n},
          {"replicates", r.replicates},
          {"fitted_c", r.fitted_c},
          {"points", points},
          {"worst_margin", r.worst_margin}};
}

nlohmann::json to_json(const MomentsReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"n", row.n},
                    {"k", row.k},
                    {"estimator", row.estimator},
                    {"empirical", moment_json(row.empirical)},
                    {"limit", moment_json(row.limit)}});
  }
  return {{"rows", rows}};
}

ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
  ExperimentOutput out;
  nlohmann::json results;
  if (cfg.kind == "rate") {
    RateReport r = run_rate_experiment(cfg);
    results = to_json(r);
    out.records = std::move(r.records);
  } else if (cfg.kind == "limit-dist") {
    DistReport r = run_limit_dist_experiment(cfg);
    results = to_json(r);
    out.records = std::move(r.records);
  } else if (cfg.kind == "efficiency") {
    EfficiencyReport r = run_efficiency_experiment(cfg);
    results = to_json(r);
    out.records = std::move(r.records);
  } else if (cfg.kind == "lemma1") {
    Lemma1Report r = run_lemma1_check(cfg);
    results = to_json(r);
    out.table_header = {"n", "gap", "mc_se"};
    for (const auto& row : r.rows) {
      out.table.push_back({std::to_string(row.n), format_double(row.gap), format_double(row.mc_se)});
    }
  } else if (cfg.kind == "lemma2") {
    Lemma2Report r = run_lemma2_check(cfg);
    results = to_json(r);
    out.table_header = {"u1", "u2", "majorant", "mc_mean", "mc_se"};
    for (const auto& pr : r.pairs) {
      out.table.push_back({format_double(pr.u1), format_double(pr.u2), format_double(pr.majorant),
                           format_double(pr.mc_mean), format_double(pr.mc_se)});
    }
  } else if (cfg.kind == "lemma3") {
    Lemma3Report r = run_lemma3_check(cfg);
    results = to_json(r);
    out.table_header = {"u", "ratio", "bound", "mc_sqrt_mean", "mc_se"};
    for (const auto& pt : r.points) {
      out.table.push_back({format_double(pt.u), format_double(pt.ratio), format_double(pt.bound),
                           format_double(pt.mc_sqrt_mean), format_double(pt.mc_se)});
    }
  } else if (cfg.kind == "moments") {
    MomentsReport r = run_moments_experiment(cfg);
    results = to_json(r);
    out.records = std::move(r.records);
  } else {
    raise(errc::bad_config, "unknown experiment kind '" + cfg.kind + "'");
  }

  nlohmann::json echo;
  for (const auto& [key, value] : experiment_config_to_key_value(cfg)) echo[key] = value;
  out.report = {{"experiment", cfg.kind},
                {"config_echo", echo},
                {"seed", cfg.seed},
                {"results", results},
                {"version", kVersion}};
  return out;
}

void write_experiment_output(const ExperimentOutput& out, const std::filesystem::path& out_dir,
                             const std::string& format) {
  std::filesystem::create_directories(out_dir);
  if (format == "csv") {
    std::ofstream file(out_dir / "report.csv");
    if (!file) raise(errc::io_error, "cannot write report.csv");
    file << "key,value\n";
    const nlohmann::json flat = out.report.flatten();
    for (const auto& [key, value] : flat.items()) {
      file << '"' << key << "\"," << value.dump() << "\n";
    }
  } else if (format == "json") {
    std::ofstream file(out_dir / "report.json");
    if (!file) raise(errc::io_error, "cannot write report.json");
    file << out.report.dump(2) << "\n";
  } else {
    raise(errc::bad_config, "format must be json or csv");
  }
  if (!out.records.empty()) {
    std::ofstream file(out_dir / "errors.csv");
    if (!file) raise(errc::io_error, "cannot write errors.csv");
    file << "n,replicate,estimator,error,rescaled_error\n";
    for (const auto& rec : out.records) {
      file << rec.n << "," << rec.replicate << "," << rec.estimator << ","
           << format_double(rec.error) << "," << format_double(rec.rescaled_error) << "\n";
    }
  }
  if (!out.table.empty()) {
    std::ofstream file(out_dir / "table.csv");
    if (!file) raise(errc::io_error, "cannot write table.csv");
    for (std::size_t i = 0; i < out.table_header.size(); ++i) {
      if (i) file << ",";
      file << out.table_header[i];
    }
    file << "\n";
    for (const auto& row : out.table) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) file << ",";
        file << row[i];
      }
      file << "\n";
    }
  }
}

}  // namespace singloc
