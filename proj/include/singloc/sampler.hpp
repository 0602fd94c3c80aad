#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "singloc/model.hpp"
#include "singloc/rng.hpp"

namespace singloc {

/// One realization of the process on (0,T): strictly increasing event times.
struct EventPath {
  std::vector<double> times;
};

/// n independent realizations plus enough bookkeeping to reproduce them.
struct SampleBatch {
  std::vector<EventPath> paths;
  std::string model_fingerprint;
  std::uint64_t seed = 0;

  std::size_t n() const { return paths.size(); }
  std::size_t total_events() const;
};

/// Exact inversion sampling: N ~ Poisson(Lambda(T)), then N uniforms mapped
/// through the inverse cumulative intensity (bisection on the closed form,
/// absolute tolerance 1e-12 * T). Works uniformly over p, including the
/// unbounded-intensity case where thinning would fail. Duplicate times
/// (probability zero) are redrawn so paths stay strictly increasing.
EventPath sample_path(const IntensityModel& model, RngStream stream);

/// Path i always uses RngStream(seed, i), so the batch is reproducible under
/// any worker count; paths are assembled in index order.
SampleBatch sample_batch(const IntensityModel& model, std::size_t n, std::uint64_t seed,
                         int threads = 1);

/// Batch file: header `n=<n> seed=<seed> model=<fingerprint>`, then one line
/// per path of comma-separated event times (17 significant digits).
void save_batch(const SampleBatch& batch, const std::filesystem::path& file);

/// Loads a batch file and verifies its fingerprint against `model`.
SampleBatch load_batch(const std::filesystem::path& file, const IntensityModel& model);

/// All event times of the batch pooled and sorted (used by the estimator
/// grid policies).
std::vector<double> pooled_event_times(const SampleBatch& batch);

}  // namespace singloc
