#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mzmesh/design.hpp"
#include "mzmesh/objective.hpp"

namespace mzmesh {

// Re-simulation of one device under uniform width offsets. The regularizer
// depends only on the unchanged trainable widths, so the per-offset objective
// isolates the physical degradation.
struct ToleranceReport {
  std::vector<double> offsets_nm;  // requested order, must include 0
  std::vector<double> objectives;
  std::vector<std::vector<std::vector<double>>> spectra;  // [offset][wavelength][port]
  double reference_objective = 0.0;                       // objective at zero offset
};

// Same trainable parameters, all physical widths shifted by offset_nm and the
// coupler table rebuilt for it.
DeviceState apply_etch_offset(const DeviceState& device, double offset_nm);

ToleranceReport etch_sweep(const DeviceState& device, std::span<const double> offsets_nm,
                           const DesignObjective& objective);

inline constexpr std::array<double, 5> kStudyOffsetsNm = {-20.0, -10.0, 0.0, 10.0, 20.0};

struct StudyRow {
  int layers = 0;
  std::uint64_t seed = 0;  // derived run seed, reproducible via the seed field
  double final_objective = 0.0;
  std::array<double, 5> offset_objectives{};  // at kStudyOffsetsNm
  std::string error;  // empty on success; failed runs carry NaN objectives
};

// Independent optimizations per layer count and seed index, each followed by
// the five-point offset sweep. Runs are seeded deterministically from the
// spec seed, the position in layer_counts and the seed index, so duplicated
// layer counts get distinct runs. MZMESH_WORKERS parallelizes across runs;
// results are assembled in deterministic (position, seed) order either way.
std::vector<StudyRow> layer_study(const DesignSpec& spec, std::span<const int> layer_counts,
                                  int seeds_per_count);

// Derived per-run seed used by layer_study.
std::uint64_t study_run_seed(std::uint64_t base_seed, std::size_t position, int seed_index);

}  // namespace mzmesh
