#include "singloc/sampler.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "singloc/config.hpp"
#include "singloc/errors.hpp"
#include "singloc/parallel.hpp"

namespace singloc {

namespace {

// Inverse of the monotone cumulative intensity by bisection; the returned
// point is strictly inside (0,T) for targets strictly inside (0, Lambda(T)).
double invert_cumulative(const IntensityModel& model, double target, double tol) {
  double lo = 0.0, hi = model.T;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (model.cumulative(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::size_t SampleBatch::total_events() const {
  std::size_t total = 0;
  for (const auto& path : paths) total += path.times.size();
  return total;
}

EventPath sample_path(const IntensityModel& model, RngStream stream) {
  Rng rng(stream);
  const double mass = model.total_mass();
  const double tol = 1e-12 * model.T;
  const std::int64_t count = rng.poisson(mass);
  EventPath path;
  path.times.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) {
    path.times.push_back(invert_cumulative(model, rng.uniform01() * mass, tol));
  }
  std::sort(path.times.begin(), path.times.end());
  // Reject duplicate draws (ties have probability zero).
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const auto dup = std::adjacent_find(path.times.begin(), path.times.end());
    if (dup == path.times.end()) break;
    *dup = invert_cumulative(model, rng.uniform01() * mass, tol);
    std::sort(path.times.begin(), path.times.end());
  }
  return path;
}

SampleBatch sample_batch(const IntensityModel& model, std::size_t n, std::uint64_t seed,
                         int threads) {
  SampleBatch batch;
  batch.paths.resize(n);
  batch.seed = seed;
  batch.model_fingerprint = model_fingerprint(model);
  parallel_for(n, threads,
               [&](std::size_t i) { batch.paths[i] = sample_path(model, RngStream{seed, i}); });
  return batch;
}

void save_batch(const SampleBatch& batch, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) raise(errc::io_error, "cannot write batch file " + file.string());
  out << "n=" << batch.n() << " seed=" << batch.seed << " model=" << batch.model_fingerprint
      << "\n";
  for (const auto& path : batch.paths) {
    for (std::size_t i = 0; i < path.times.size(); ++i) {
      if (i) out << ",";
      out << format_double(path.times[i]);
    }
    out << "\n";
  }
  if (!out) raise(errc::io_error, "write failure on " + file.string());
}

SampleBatch load_batch(const std::filesystem::path& file, const IntensityModel& model) {
  std::ifstream in(file);
  if (!in) raise(errc::io_error, "cannot open batch file " + file.string());
  std::string header;
  if (!std::getline(in, header)) raise(errc::io_error, "empty batch file " + file.string());
  std::size_t n = 0;
  unsigned long long seed = 0;
  char fingerprint[64] = {0};
  if (std::sscanf(header.c_str(), "n=%zu seed=%llu model=%63s", &n, &seed, fingerprint) != 3) {
    raise(errc::bad_config, "malformed batch header: " + header);
  }
  const std::string expected = model_fingerprint(model);
  if (expected != fingerprint) {
    raise(errc::fingerprint_mismatch,
          "batch was generated for model " + std::string(fingerprint) + ", expected " + expected);
  }
  SampleBatch batch;
  batch.seed = seed;
  batch.model_fingerprint = fingerprint;
  batch.paths.reserve(n);
  std::string line;
  while (batch.paths.size() < n && std::getline(in, line)) {
    EventPath path;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) {
      if (!cell.empty()) path.times.push_back(std::strtod(cell.c_str(), nullptr));
    }
    batch.paths.push_back(std::move(path));
  }
  if (batch.paths.size() != n) {
    raise(errc::bad_config, "batch file ended before " + std::to_string(n) + " paths");
  }
  return batch;
}

std::vector<double> pooled_event_times(const SampleBatch& batch) {
  std::vector<double> all;
  all.reserve(batch.total_events());
  for (const auto& path : batch.paths) {
    all.insert(all.end(), path.times.begin(), path.times.end());
  }
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace singloc
