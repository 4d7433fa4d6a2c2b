#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "mzmesh/detail/evaluate.hpp"
#include "mzmesh/optimizer.hpp"
#include "mzmesh/tolerance.hpp"

using namespace mzmesh;

namespace {

DeviceState random_device(int ports, int layers, std::uint64_t seed) {
  DeviceState dev = make_device(ports, layers);
  InitConfig init;
  init.seed = seed;
  dev.params = initialize_parameters(dev.topology, init);
  return dev;
}

DesignObjective splitter_objective(int points) {
  DesignObjective obj;
  for (int i = 0; i < points; ++i) {
    obj.wavelengths_nm.push_back(1400.0 + 200.0 * i / (points - 1));
    obj.targets.push_back({0.5, 0.5});
  }
  return obj;
}

DesignSpec micro_spec() {
  DesignSpec spec;
  spec.layers = 1;
  spec.grid_count = 4;
  spec.max_iterations = 20;
  spec.seed = 5;
  return spec;
}

}  // namespace

TEST_CASE("zero offset is the identity on simulation results") {
  const DeviceState dev = random_device(2, 2, 50);
  const DeviceState same = apply_etch_offset(dev, 0.0);

  std::vector<double> grid_um;
  for (int i = 0; i < 9; ++i) grid_um.push_back(1.42 + 0.16 * i / 8.0);
  const auto a = simulate_spectrum(dev, grid_um, 1, nullptr);
  const auto b = simulate_spectrum(same, grid_um, 1, nullptr);
  for (std::size_t q = 0; q < grid_um.size(); ++q) {
    CHECK(a[q][0] == b[q][0]);
    CHECK(a[q][1] == b[q][1]);
  }

  CHECK_THROWS_AS(apply_etch_offset(dev, 25.0), std::invalid_argument);
}

TEST_CASE("an offset shifts every control width including the fixed ends") {
  DeviceState dev = make_device(2, 1);  // uniform 450 nm tapers
  const DeviceState shifted = apply_etch_offset(dev, 10.0);

  const detail::ClampedDevice<double> cd =
      detail::clamp_device<double>(shifted, shifted.params, nullptr);
  for (double w : cd.controls) CHECK(w == doctest::Approx(0.46).epsilon(1e-15));

  // a uniform shifted taper accumulates phase at the shifted index
  const TaperQuadrature quad = TaperQuadrature::build(201, 5);
  const double theta = taper_phase_t<double>(
      std::span<const double>(cd.controls.data(), 7), cd.lengths[0], cd.pads[0], 1.55,
      shifted.config.neff, quad, nullptr);
  const double expected = (2.0 * 3.14159265358979323846 / 1.55) *
                          effective_index(0.46, 1.55, shifted.config.neff) * 10.0;
  CHECK(theta == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("opposite offsets produce distinct spectra") {
  const DeviceState dev = random_device(2, 2, 51);
  std::vector<double> grid_um = {1.5, 1.55, 1.6};
  const auto minus = simulate_spectrum(apply_etch_offset(dev, -20.0), grid_um, 1, nullptr);
  const auto plus = simulate_spectrum(apply_etch_offset(dev, 20.0), grid_um, 1, nullptr);
  bool differs = false;
  for (std::size_t q = 0; q < grid_um.size(); ++q) {
    differs |= std::abs(minus[q][0] - plus[q][0]) > 1e-6;
  }
  CHECK(differs);
}

TEST_CASE("etch sweep preserves the requested offsets and the reference objective") {
  const DeviceState dev = random_device(2, 2, 52);
  const DesignObjective obj = splitter_objective(6);

  const std::vector<double> offsets = {10.0, -10.0, 0.0, 20.0};
  const ToleranceReport report = etch_sweep(dev, offsets, obj);
  CHECK(report.offsets_nm == offsets);
  REQUIRE(report.objectives.size() == offsets.size());
  REQUIRE(report.spectra.size() == offsets.size());

  // the zero-offset entry matches a direct evaluation bit for bit
  CHECK(report.reference_objective == evaluate_objective(dev, obj));
  CHECK(report.objectives[2] == report.reference_objective);

  for (const auto& spectrum : report.spectra) {
    CHECK(spectrum.size() == obj.wavelengths_nm.size());
  }

  const std::vector<double> missing_zero = {-10.0, 10.0};
  CHECK_THROWS_AS(etch_sweep(dev, missing_zero, obj), std::invalid_argument);
}

TEST_CASE("the regularizer contribution is identical across sweep offsets") {
  // trainable widths do not move with the etch offset, so the penalty term
  // entering each per-offset objective is the unshifted one
  const DeviceState dev = random_device(2, 2, 53);
  const double p0 = regularization_penalty(dev, 3e-4, 1e-4, 0.45);
  const DeviceState shifted = apply_etch_offset(dev, 20.0);
  CHECK(regularization_penalty(shifted, 3e-4, 1e-4, 0.45) == p0);
}

TEST_CASE("study rows are deterministic and duplicated layer counts get distinct seeds") {
  const DesignSpec spec = micro_spec();
  const int counts[2] = {1, 1};

  const std::vector<StudyRow> rows = layer_study(spec, counts, 1);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].layers == 1);
  CHECK(rows[1].layers == 1);
  CHECK(rows[0].seed != rows[1].seed);
  CHECK(rows[0].final_objective != rows[1].final_objective);
  CHECK(rows[0].error.empty());

  const std::vector<StudyRow> again = layer_study(spec, counts, 1);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].seed == again[i].seed);
    CHECK(rows[i].final_objective == again[i].final_objective);
    for (int k = 0; k < 5; ++k) {
      CHECK(rows[i].offset_objectives[k] == again[i].offset_objectives[k]);
    }
  }
}

TEST_CASE("deeper meshes degrade more under strong etch offsets") {
  // statistical trend over the frozen seed derivation of the benchmark spec
  DesignSpec spec;
  spec.layers = 3;
  spec.grid_count = 32;
  spec.max_iterations = 2000;
  spec.seed = 7;

  setenv("MZMESH_WORKERS", "4", 0);
  const int counts[2] = {2, 6};
  const std::vector<StudyRow> rows = layer_study(spec, counts, 3);
  double mean_ratio_shallow = 0.0;
  double mean_ratio_deep = 0.0;
  for (const StudyRow& row : rows) {
    REQUIRE(row.error.empty());
    const double worst = std::max(row.offset_objectives[0], row.offset_objectives[4]);
    const double ratio = worst / row.offset_objectives[2];
    CHECK(ratio >= 1.0);
    (row.layers == 2 ? mean_ratio_shallow : mean_ratio_deep) += ratio / 3.0;
  }
  CHECK(mean_ratio_deep >= mean_ratio_shallow);
}

TEST_CASE("study respects the worker environment variable") {
  const DesignSpec spec = micro_spec();
  const int counts[2] = {1, 2};

  setenv("MZMESH_WORKERS", "1", 1);
  const std::vector<StudyRow> serial = layer_study(spec, counts, 1);
  setenv("MZMESH_WORKERS", "2", 1);
  const std::vector<StudyRow> parallel = layer_study(spec, counts, 1);
  unsetenv("MZMESH_WORKERS");

  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].seed == parallel[i].seed);
    CHECK(serial[i].final_objective == parallel[i].final_objective);
  }
}
