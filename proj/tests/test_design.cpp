#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "mzmesh/io.hpp"
#include "mzmesh/runner.hpp"
#include "mzmesh/svg.hpp"

using namespace mzmesh;

namespace {

namespace fs = std::filesystem;

const fs::path kDesigns(MZMESH_DESIGNS_DIR);

fs::path write_temp(const char* name, const std::string& content) {
  const fs::path path = fs::temp_directory_path() / name;
  std::ofstream out(path);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("the shipped splitter design parses to the documented setup") {
  const DesignSpec spec = parse_design_spec(kDesigns / "splitter_50_50.ini");
  CHECK(spec.kind == DeviceKind::splitter);
  CHECK(spec.ports == 2);
  CHECK(spec.layers == 3);
  CHECK(spec.widths_per_taper == 5);
  CHECK(spec.grid_count == 32);
  CHECK(spec.grid_start_nm == 1400.0);
  CHECK(spec.grid_stop_nm == 1600.0);
  CHECK(spec.split_ratios == std::vector<double>{0.5, 0.5});
  CHECK(spec.alpha1 == 3e-4);
  CHECK(spec.alpha2 == 1e-4);
  CHECK(spec.input_port == 1);

  const std::vector<double> grid = spec.grid_nm();
  CHECK(grid.size() == 32);
  CHECK(grid.front() == 1400.0);
  CHECK(grid.back() == 1600.0);
}

TEST_CASE("the shipped duplexer design parses to the documented setup") {
  const DesignSpec spec = parse_design_spec(kDesigns / "duplexer.ini");
  CHECK(spec.kind == DeviceKind::duplexer);
  CHECK(spec.layers == 6);
  CHECK(spec.grid_count == 21);
  CHECK(spec.grid_start_nm == 1450.0);
  CHECK(spec.grid_stop_nm == 1630.0);
  CHECK(spec.cutoff_nm == 1550.0);
}

TEST_CASE("ratio sums beyond one are rejected with the sum named") {
  const fs::path path = write_temp("mzmesh_bad_ratios.ini",
                                   "kind = splitter\n[grid]\nstart_nm = 1400\nstop_nm = 1600\n"
                                   "count = 8\n[target]\nratios = 0.6, 0.6\n");
  try {
    parse_design_spec(path);
    FAIL("expected invalid_argument");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("sum") != std::string::npos);
  }
  fs::remove(path);
}

TEST_CASE("unknown keys and malformed lines carry line numbers") {
  const fs::path path = write_temp("mzmesh_unknown_key.ini",
                                   "kind = splitter\nports = 2\ntypo_key = 3\n");
  try {
    parse_design_spec(path);
    FAIL("expected invalid_argument");
  } catch (const std::invalid_argument& e) {
    const std::string what = e.what();
    CHECK(what.find(":3:") != std::string::npos);
    CHECK(what.find("typo_key") != std::string::npos);
  }
  fs::remove(path);

  const fs::path bad = write_temp("mzmesh_bad_line.ini", "kind = splitter\nnonsense\n");
  CHECK_THROWS_AS(parse_design_spec(bad), std::invalid_argument);
  fs::remove(bad);
}

TEST_CASE("serialization round trip is the identity") {
  const DesignSpec spec = parse_design_spec(kDesigns / "duplexer.ini");
  const fs::path path = write_temp("mzmesh_roundtrip.ini", serialize_design_spec(spec));
  const DesignSpec again = parse_design_spec(path);
  CHECK(again == spec);

  // a second round trip changes nothing either
  const fs::path path2 = write_temp("mzmesh_roundtrip2.ini", serialize_design_spec(again));
  CHECK(parse_design_spec(path2) == spec);
  fs::remove(path);
  fs::remove(path2);
}

TEST_CASE("splitter targets are constant rows at the ratios") {
  DesignSpec spec = parse_design_spec(kDesigns / "splitter_75_25.ini");
  const DesignObjective obj = build_targets(spec);
  REQUIRE(obj.targets.size() == 32);
  for (const auto& row : obj.targets) {
    CHECK(row == std::vector<double>{0.75, 0.25});
  }
}

TEST_CASE("duplexer targets step at the cutoff") {
  const DesignSpec spec = parse_design_spec(kDesigns / "duplexer.ini");
  const DesignObjective obj = build_targets(spec);
  for (std::size_t q = 0; q < obj.wavelengths_nm.size(); ++q) {
    const double lambda = obj.wavelengths_nm[q];
    if (lambda <= 1550.0) {
      CHECK(obj.targets[q] == std::vector<double>{1.0, 0.0});
    } else {
      CHECK(obj.targets[q] == std::vector<double>{0.0, 1.0});
    }
  }
  // short wavelengths pass to output 1, long ones to output 2
  CHECK(obj.targets.front() == std::vector<double>{1.0, 0.0});
  CHECK(obj.targets.back() == std::vector<double>{0.0, 1.0});
}

TEST_CASE("custom target tables pass through when they match the grid") {
  DesignSpec spec;
  spec.kind = DeviceKind::custom;
  spec.grid_count = 4;
  spec.grid_start_nm = 1500.0;
  spec.grid_stop_nm = 1560.0;

  std::string csv = "wavelength_nm,out_1,out_2\n";
  char buf[96];
  const std::vector<double> grid = spec.grid_nm();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", grid[i], 0.1 * (i + 1), 0.05);
    csv += buf;
  }
  const fs::path table = write_temp("mzmesh_custom_targets.csv", csv);
  spec.target_table = table.string();

  const DesignObjective obj = build_targets(spec);
  REQUIRE(obj.targets.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(obj.targets[i][0] == doctest::Approx(0.1 * (i + 1)).epsilon(1e-15));
    CHECK(obj.targets[i][1] == 0.05);
  }

  // a mismatched grid is refused
  spec.grid_stop_nm = 1570.0;
  CHECK_THROWS_AS(build_targets(spec), std::invalid_argument);
  fs::remove(table);
}

TEST_CASE("optimization artifacts round trip through geometry and spectrum files") {
  DesignSpec spec = parse_design_spec(kDesigns / "splitter_50_50.ini");
  spec.layers = 1;
  spec.grid_count = 6;
  spec.max_iterations = 15;
  spec.checkpoint_every = 5;

  const RunResult result = run_optimization(spec);
  const fs::path out_dir = fs::temp_directory_path() / "mzmesh_run_artifacts";
  fs::remove_all(out_dir);
  const OptimizeArtifacts artifacts =
      write_optimize_artifacts(out_dir, result, serialize_design_spec(spec));

  CHECK(fs::exists(artifacts.trace));
  CHECK(fs::exists(artifacts.geometry));
  CHECK(fs::exists(artifacts.spectrum));
  CHECK(fs::exists(artifacts.manifest));

  // re-simulating the exported geometry reproduces the exported spectrum
  const DeviceState reloaded = read_geometry_json(artifacts.geometry);
  std::vector<double> grid_um;
  for (double nm : spec.grid_nm()) grid_um.push_back(nm * 1e-3);
  const auto resim = simulate_spectrum(reloaded, grid_um, spec.input_port, nullptr);
  const SpectrumData exported = read_spectrum_csv(artifacts.spectrum);
  REQUIRE(exported.transmission.size() == resim.size());
  for (std::size_t q = 0; q < resim.size(); ++q) {
    for (std::size_t k = 0; k < resim[q].size(); ++k) {
      CHECK(exported.transmission[q][k] == resim[q][k]);
    }
  }

  // trace file parses back to the recorded points
  const std::vector<TracePoint> points = read_trace_jsonl(artifacts.trace);
  REQUIRE(points.size() == result.trace.points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    CHECK(points[i].objective == result.trace.points[i].objective);
    CHECK(points[i].learning_rate == result.trace.points[i].learning_rate);
  }

  // checkpoint geometries exist and are importable
  REQUIRE(!result.trace.checkpoints.empty());
  for (const Checkpoint& cp : result.trace.checkpoints) {
    char name[48];
    std::snprintf(name, sizeof(name), "checkpoint_%06zu.json", cp.iter);
    const fs::path path = out_dir / name;
    REQUIRE(fs::exists(path));
    const DeviceState snapshot = read_geometry_json(path);
    CHECK(snapshot.params == cp.params);
  }
  fs::remove_all(out_dir);
}

TEST_CASE("identical runs produce identical artifact checksums") {
  DesignSpec spec = parse_design_spec(kDesigns / "splitter_50_50.ini");
  spec.layers = 1;
  spec.grid_count = 5;
  spec.max_iterations = 12;

  const RunResult a = run_optimization(spec);
  const RunResult b = run_optimization(spec);
  CHECK(trace_checksum(a.trace) == trace_checksum(b.trace));

  const fs::path dir_a = fs::temp_directory_path() / "mzmesh_checksums_a";
  const fs::path dir_b = fs::temp_directory_path() / "mzmesh_checksums_b";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  const OptimizeArtifacts pa = write_optimize_artifacts(dir_a, a, serialize_design_spec(spec));
  const OptimizeArtifacts pb = write_optimize_artifacts(dir_b, b, serialize_design_spec(spec));
  CHECK(fnv1a64_file(pa.geometry) == fnv1a64_file(pb.geometry));
  CHECK(fnv1a64_file(pa.spectrum) == fnv1a64_file(pb.spectrum));
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST_CASE("offset tags name sweep artifacts") {
  CHECK(offset_tag(-20.0) == "m20");
  CHECK(offset_tag(0.0) == "0");
  CHECK(offset_tag(10.0) == "p10");
  CHECK(offset_tag(12.5) == "p12_5");
}

TEST_CASE("svg charts are structurally sound") {
  std::vector<double> grid = {1400.0, 1500.0, 1600.0};
  std::vector<std::vector<double>> spectrum = {{0.5, 0.4}, {0.55, 0.35}, {0.6, 0.3}};
  const fs::path path = fs::temp_directory_path() / "mzmesh_chart.svg";
  write_spectrum_svg(path, grid, spectrum);

  std::ifstream in(path);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(content.find("<svg") != std::string::npos);
  CHECK(content.find("version=\"1.1\"") != std::string::npos);
  // one polyline per output
  std::size_t count = 0;
  for (std::size_t pos = content.find("<polyline"); pos != std::string::npos;
       pos = content.find("<polyline", pos + 1)) {
    ++count;
  }
  CHECK(count == 2);
  CHECK(content.find("wavelength (nm)") != std::string::npos);
  CHECK(content.find("transmission") != std::string::npos);
  fs::remove(path);
}
