#include "mzmesh/tolerance.hpp"

#include <algorithm>
#include <cstdlib>
#include <future>
#include <limits>
#include <stdexcept>
#include <string>

#include "mzmesh/optimizer.hpp"

namespace mzmesh {

DeviceState apply_etch_offset(const DeviceState& device, double offset_nm) {
  if (offset_nm < device.config.coupler.etch_min_nm ||
      offset_nm > device.config.coupler.etch_max_nm) {
    throw std::invalid_argument("etch offset outside the coupler model range");
  }
  DeviceState shifted = device;
  shifted.etch_offset_nm = offset_nm;
  return shifted;
}

ToleranceReport etch_sweep(const DeviceState& device, std::span<const double> offsets_nm,
                           const DesignObjective& objective) {
  if (offsets_nm.empty()) throw std::invalid_argument("offset list must not be empty");
  if (std::none_of(offsets_nm.begin(), offsets_nm.end(), [](double o) { return o == 0.0; })) {
    throw std::invalid_argument("offset list must include 0");
  }

  std::vector<double> lambdas_um(objective.wavelengths_nm.size());
  for (std::size_t i = 0; i < lambdas_um.size(); ++i) {
    lambdas_um[i] = objective.wavelengths_nm[i] * 1e-3;
  }
  const int input = objective.input_port < 0 ? device.default_input_port() : objective.input_port;

  ToleranceReport report;
  report.offsets_nm.assign(offsets_nm.begin(), offsets_nm.end());
  for (double offset : offsets_nm) {
    const DeviceState shifted = apply_etch_offset(device, offset);
    report.objectives.push_back(evaluate_objective(shifted, objective));
    report.spectra.push_back(simulate_spectrum(shifted, lambdas_um, input, nullptr));
    if (offset == 0.0) report.reference_objective = report.objectives.back();
  }
  return report;
}

std::uint64_t study_run_seed(std::uint64_t base_seed, std::size_t position, int seed_index) {
  // splitmix64 finisher over a position/index mix keeps duplicated layer
  // counts on independent streams
  std::uint64_t x = base_seed + 0x9e3779b97f4a7c15ull *
                                    (position * 1000003ull + static_cast<std::uint64_t>(seed_index) + 1ull);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}

namespace {

int worker_count() {
  if (const char* env = std::getenv("MZMESH_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

// A failed run is reported in its row instead of aborting the other runs.
StudyRow run_study_job(const DesignSpec& base, int layers, std::uint64_t seed) {
  StudyRow row;
  row.layers = layers;
  row.seed = seed;
  try {
    DesignSpec spec = base;
    spec.layers = layers;
    spec.seed = seed;

    DeviceState device = initial_device(spec);
    const DesignObjective objective = build_targets(spec);
    OptimizeOptions options;
    options.convergence.max_iterations = spec.max_iterations;

    const OptimizationTrace trace = optimize_device(device, objective, options);
    row.final_objective = trace.best_objective;

    const ToleranceReport sweep = etch_sweep(device, kStudyOffsetsNm, objective);
    std::copy(sweep.objectives.begin(), sweep.objectives.end(), row.offset_objectives.begin());
  } catch (const std::exception& e) {
    row.error = e.what();
    row.final_objective = std::numeric_limits<double>::quiet_NaN();
    row.offset_objectives.fill(std::numeric_limits<double>::quiet_NaN());
  }
  return row;
}

}  // namespace

std::vector<StudyRow> layer_study(const DesignSpec& spec, std::span<const int> layer_counts,
                                  int seeds_per_count) {
  if (layer_counts.empty()) throw std::invalid_argument("layer_counts must not be empty");
  if (seeds_per_count < 1) throw std::invalid_argument("seeds_per_count must be at least 1");
  spec.validate();

  struct Job {
    std::size_t slot;
    int layers;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t pos = 0; pos < layer_counts.size(); ++pos) {
    for (int s = 0; s < seeds_per_count; ++s) {
      jobs.push_back(Job{jobs.size(), layer_counts[pos], study_run_seed(spec.seed, pos, s)});
    }
  }

  std::vector<StudyRow> rows(jobs.size());
  const std::size_t workers = static_cast<std::size_t>(worker_count());
  if (workers <= 1) {
    for (const Job& job : jobs) rows[job.slot] = run_study_job(spec, job.layers, job.seed);
    return rows;
  }

  for (std::size_t begin = 0; begin < jobs.size(); begin += workers) {
    const std::size_t end = std::min(jobs.size(), begin + workers);
    std::vector<std::future<StudyRow>> batch;
    for (std::size_t j = begin; j < end; ++j) {
      batch.push_back(std::async(std::launch::async, run_study_job, std::cref(spec),
                                 jobs[j].layers, jobs[j].seed));
    }
    for (std::size_t j = begin; j < end; ++j) {
      rows[jobs[j].slot] = batch[j - begin].get();
    }
  }
  return rows;
}

}  // namespace mzmesh
