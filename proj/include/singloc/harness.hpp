#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "singloc/config.hpp"
#include "singloc/estimators.hpp"
#include "singloc/limit.hpp"
#include "singloc/model.hpp"
#include "singloc/stats.hpp"

namespace singloc {

/// One experiment run: model, estimator and limit blocks plus the ladder,
/// replicate count, seed and kind. Parsed from a flat key-value file with
/// section prefixes model.*, estimator.*, limit.*, experiment.*.
struct ExperimentConfig {
  IntensityModel model;
  EstimatorConfig estimator;
  LimitConfig limit;
  std::vector<std::size_t> n_ladder{16, 64, 256, 1024};
  std::size_t replicates = 500;
  std::size_t limit_replicates = 0;  // 0 -> use `replicates`
  std::uint64_t seed = 1;
  std::string kind = "rate";  // rate | limit-dist | efficiency | lemma1 | lemma2 | lemma3 | moments
  std::string estimator_kind = "bayes";  // bayes | mle | both
  double lemma_u = 1.0;                  // lemma1 evaluation point
  double lemma_lambda = 1.0;
  int threads = 1;

  std::size_t limit_m() const { return limit_replicates ? limit_replicates : replicates; }
};

ExperimentConfig experiment_config_from_key_value(const KeyValue& kv);
KeyValue experiment_config_to_key_value(const ExperimentConfig& cfg);

/// One (n, replicate) estimate error; `rescaled_error` is n^{1/(p+1)} times
/// the raw error.
struct ErrorRecord {
  std::size_t n = 0;
  std::size_t replicate = 0;
  std::string estimator;
  double error = 0.0;
  double rescaled_error = 0.0;
};

struct RateRow {
  std::size_t n = 0;
  double rmse = 0.0;
  double rmse_se = 0.0;
  double median_abs_error = 0.0;
};

struct EstimatorRate {
  std::string estimator;
  std::vector<RateRow> rows;
  double slope = 0.0;
  double slope_se = 0.0;
  double target_slope = 0.0;  // -1/(p+1)
};

struct RateReport {
  std::vector<EstimatorRate> fits;
  std::vector<ErrorRecord> records;
};

RateReport run_rate_experiment(const ExperimentConfig& cfg);

struct MomentGap {
  int k = 1;
  stats::MomentEstimate empirical;
  stats::MomentEstimate limit;
};

struct DistComparison {
  std::string estimator;    // "bayes" (vs zeta) or "mle" (vs xi)
  double ks = 0.0;
  std::size_t sample_size = 0;
  std::size_t limit_size = 0;
  std::vector<MomentGap> moments;
};

struct DistReport {
  std::size_t n = 0;
  std::vector<DistComparison> comparisons;
  double split_half_ks = 0.0;  // zeta draws against themselves
  std::vector<ErrorRecord> records;
};

DistReport run_limit_dist_experiment(const ExperimentConfig& cfg);

struct EfficiencyReport {
  std::size_t n = 0;
  stats::MomentEstimate bayes_m2, mle_m2, zeta_m2, xi_m2;
  double ordering_margin = 0.0;   // mle_m2 + 2 sigma_c - bayes_m2; >= 0 passes
  double benchmark_gap = 0.0;     // |bayes_m2 - zeta_m2|
  double benchmark_band = 0.0;    // 3 sigma combined
  std::vector<ErrorRecord> records;
};

EfficiencyReport run_efficiency_experiment(const ExperimentConfig& cfg);

struct Lemma1Row {
  std::size_t n = 0;
  double gap = 0.0;    // |empirical CF - exp(L)|
  double mc_se = 0.0;
  std::complex<double> empirical;
};

struct Lemma1Report {
  double u = 0.0, lambda = 0.0;
  std::complex<double> limit_value;  // exp(L(lambda))
  std::vector<Lemma1Row> rows;
  bool gaps_decreasing = false;
  double final_gap = 0.0;
};

Lemma1Report run_lemma1_check(const ExperimentConfig& cfg);

struct Lemma2Pair {
  double u1 = 0.0, u2 = 0.0;
  double majorant = 0.0;  // n int [sqrt S - sqrt S]^2 at the stochastic n
  double mc_mean = 0.0;
  double mc_se = 0.0;
};

struct Lemma2Report {
  std::vector<std::size_t> fit_ns;  // deterministic fit sizes
  std::vector<double> fitted_C;     // max ratio per fit n
  double stability = 0.0;           // relative change of C across fit ns
  std::size_t stochastic_n = 0;
  std::size_t replicates = 0;
  std::vector<Lemma2Pair> pairs;
  double worst_margin = 0.0;  // min over pairs of majorant + 3 se - mean
  double wide_pair_mean = 0.0;  // E|sqrtZ - sqrtZ|^2 at |u1-u2| >= 1 (<= 4)
};

Lemma2Report run_lemma2_check(const ExperimentConfig& cfg);

struct Lemma3Point {
  double u = 0.0;
  double ratio = 0.0;        // n F(u n^-nu) / |u|^{p+1}
  double bound = 0.0;        // exp(-n F(u n^-nu)/2)
  double mc_sqrt_mean = 0.0;
  double mc_se = 0.0;
};

struct Lemma3Report {
  std::size_t n = 0;
  std::size_t replicates = 0;
  double fitted_c = 0.0;  // min ratio over the grid
  std::vector<Lemma3Point> points;
  double worst_margin = 0.0;  // min over points of bound + 3 se - mean
};

Lemma3Report run_lemma3_check(const ExperimentConfig& cfg);

struct MomentsRow {
  std::size_t n = 0;
  int k = 1;
  std::string estimator;
  stats::MomentEstimate empirical;
  stats::MomentEstimate limit;
};

struct MomentsReport {
  std::vector<MomentsRow> rows;
  std::vector<ErrorRecord> records;
};

MomentsReport run_moments_experiment(const ExperimentConfig& cfg);

nlohmann::json to_json(const RateReport& r);
nlohmann::json to_json(const DistReport& r);
nlohmann::json to_json(const EfficiencyReport& r);
nlohmann::json to_json(const Lemma1Report& r);
nlohmann::json to_json(const Lemma2Report& r);
nlohmann::json to_json(const Lemma3Report& r);
nlohmann::json to_json(const MomentsReport& r);

/// Dispatches on cfg.kind, wraps the result in the report envelope
/// {experiment, config_echo, seed, results, version} and collects the CSV
/// table rows.
struct ExperimentOutput {
  nlohmann::json report;
  std::vector<ErrorRecord> records;          // per-(n, replicate) errors
  std::vector<std::vector<std::string>> table;  // auxiliary CSV (lemma grids etc.)
  std::vector<std::string> table_header;
};

ExperimentOutput run_experiment(const ExperimentConfig& cfg);

/// Writes report.json (or report.csv when format == "csv"), plus errors.csv
/// and/or the auxiliary table when present. Reports carry no timestamps, so
/// identical runs produce identical bytes.
void write_experiment_output(const ExperimentOutput& out, const std::filesystem::path& out_dir,
                             const std::string& format);

}  // namespace singloc
