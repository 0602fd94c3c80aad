// Command-line front end: simulate batches, estimate from batch files, draw
// limit-process samples, and run the experiment harness from config files.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "singloc/config.hpp"
#include "singloc/errors.hpp"
#include "singloc/estimators.hpp"
#include "singloc/harness.hpp"
#include "singloc/limit.hpp"
#include "singloc/model.hpp"
#include "singloc/sampler.hpp"
#include "singloc/stats.hpp"
#include "singloc/version.hpp"

namespace {

struct GlobalOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 1;
  std::string format = "json";
};

singloc::KeyValue load_config(const GlobalOptions& opts) {
  if (opts.config_path.empty()) {
    singloc::raise(singloc::errc::bad_config, "--config is required");
  }
  return singloc::load_key_value(opts.config_path);
}

nlohmann::json config_echo_json(const singloc::KeyValue& kv) {
  nlohmann::json echo;
  for (const auto& [key, value] : kv) echo[key] = value;
  return echo;
}

void write_json(const nlohmann::json& body, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) singloc::raise(singloc::errc::io_error, "cannot write " + file.string());
  out << body.dump(2) << "\n";
}

int cmd_simulate(const GlobalOptions& opts, std::size_t n) {
  const auto kv = load_config(opts);
  singloc::IntensityModel model = singloc::model_from_key_value(kv, "model.");
  singloc::validate(model);
  const std::uint64_t seed =
      opts.seed_set ? opts.seed : singloc::get_u64_or(kv, "experiment.seed", 1);
  const auto batch = singloc::sample_batch(model, n, seed, opts.threads);
  std::filesystem::create_directories(opts.out_dir);
  singloc::save_batch(batch, std::filesystem::path(opts.out_dir) / "batch.txt");
  std::cout << "wrote " << (std::filesystem::path(opts.out_dir) / "batch.txt").string() << " ("
            << batch.total_events() << " events over " << n << " paths)\n";
  return 0;
}

int cmd_estimate(const GlobalOptions& opts, const std::string& batch_path) {
  const auto kv = load_config(opts);
  singloc::IntensityModel model = singloc::model_from_key_value(kv, "model.");
  singloc::validate(model);
  const auto est_cfg = singloc::estimator_config_from_key_value(kv, "estimator.");
  const auto batch = singloc::load_batch(batch_path, model);

  nlohmann::json results;
  const auto bayes = singloc::bayes_estimate(batch, model, est_cfg.prior, est_cfg);
  results["bayes"] = {{"estimate", bayes.estimate},
                      {"grid_size", bayes.diagnostics.grid_size},
                      {"refine_passes", bayes.diagnostics.refine_passes},
                      {"boundary_mass", bayes.diagnostics.boundary_mass}};
  if (model.sing.p > 0.0) {
    const auto mle = singloc::mle_estimate(batch, model, est_cfg);
    results["mle"] = {{"estimate", mle.estimate},
                      {"grid_size", mle.diagnostics.grid_size},
                      {"tie_detected", mle.diagnostics.tie_detected}};
  }
  const nlohmann::json body = {{"experiment", "estimate"},
                               {"config_echo", config_echo_json(kv)},
                               {"seed", batch.seed},
                               {"results", results},
                               {"version", singloc::kVersion}};
  std::filesystem::create_directories(opts.out_dir);
  write_json(body, std::filesystem::path(opts.out_dir) / "estimate.json");
  std::cout << "bayes estimate " << bayes.estimate << "\n";
  return 0;
}

int cmd_limit(const GlobalOptions& opts, std::size_t replicates_override) {
  const auto kv = load_config(opts);
  auto cfg = singloc::experiment_config_from_key_value(kv);
  if (opts.seed_set) cfg.seed = opts.seed;
  const std::size_t m = replicates_override ? replicates_override : cfg.limit_m();
  const auto draws =
      singloc::draw_zeta_xi(cfg.model.sing, cfg.limit, m, cfg.seed, opts.threads);
  std::filesystem::create_directories(opts.out_dir);
  singloc::save_draws_csv(draws, std::filesystem::path(opts.out_dir) / "draws.csv");
  nlohmann::json results = {{"replicates", m},
                            {"zeta_m1", singloc::stats::moment(draws.zetas, 1).value},
                            {"zeta_m2", singloc::stats::moment(draws.zetas, 2).value}};
  if (!draws.xis.empty()) {
    results["xi_m2"] = singloc::stats::moment(draws.xis, 2).value;
    results["xi_tie_count"] = draws.xi_tie_count;
  }
  const nlohmann::json body = {{"experiment", "limit"},
                               {"config_echo", config_echo_json(kv)},
                               {"seed", cfg.seed},
                               {"results", results},
                               {"version", singloc::kVersion}};
  write_json(body, std::filesystem::path(opts.out_dir) / "limit_summary.json");
  std::cout << "wrote " << m << " draws\n";
  return 0;
}

int cmd_experiment(const GlobalOptions& opts) {
  const auto kv = load_config(opts);
  auto cfg = singloc::experiment_config_from_key_value(kv);
  if (opts.seed_set) cfg.seed = opts.seed;
  cfg.threads = opts.threads;
  const auto output = singloc::run_experiment(cfg);
  singloc::write_experiment_output(output, opts.out_dir, opts.format);
  std::cout << "wrote report to " << opts.out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Poisson singularity-location estimation toolkit"};
  app.set_version_flag("--version", singloc::kVersion);
  app.require_subcommand(1);

  GlobalOptions opts;
  app.add_option("--config", opts.config_path, "flat key-value config file")->expected(1);
  app.add_option("--out", opts.out_dir, "output directory");
  auto* seed_opt = app.add_option("--seed", opts.seed, "seed override");
  app.add_option("--threads", opts.threads, "worker threads (results are thread-invariant)");
  app.add_option("--format", opts.format, "report format: json or csv")
      ->check(CLI::IsMember({"json", "csv"}));

  std::size_t simulate_n = 100;
  auto* simulate = app.add_subcommand("simulate", "sample a batch and write it to a file");
  simulate->add_option("--n", simulate_n, "number of independent paths");

  std::string batch_path;
  auto* estimate = app.add_subcommand("estimate", "estimate the shift from a batch file");
  estimate->add_option("--batch", batch_path, "batch file from `simulate`")->required();

  std::size_t limit_m = 0;
  auto* limit = app.add_subcommand("limit", "draw limit-process functionals to CSV");
  limit->add_option("--replicates", limit_m, "number of draws");

  app.add_subcommand("experiment", "run the experiment named in the config");
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
    opts.seed_set = seed_opt->count() > 0;
    if (app.got_subcommand("simulate")) return cmd_simulate(opts, simulate_n);
    if (app.got_subcommand("estimate")) return cmd_estimate(opts, batch_path);
    if (app.got_subcommand("limit")) return cmd_limit(opts, limit_m);
    return cmd_experiment(opts);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const singloc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return 2;
  }
}
