#include "mzmesh/runner.hpp"

#include <cstdio>
#include <vector>

namespace mzmesh {

RunResult run_optimization(const DesignSpec& spec, const std::atomic<bool>* abort) {
  spec.validate();

  RunResult result;
  result.spec = spec;
  result.device = initial_device(spec);
  result.objective = build_targets(spec);

  OptimizeOptions options;
  options.convergence.max_iterations = spec.max_iterations;
  options.checkpoint_every = spec.checkpoint_every;
  options.abort = abort;
  result.trace = optimize_device(result.device, result.objective, options);
  return result;
}

OptimizeArtifacts write_optimize_artifacts(const std::filesystem::path& out_dir,
                                           const RunResult& result,
                                           const std::string& spec_source) {
  std::filesystem::create_directories(out_dir);

  OptimizeArtifacts paths;
  paths.trace = out_dir / "trace.jsonl";
  paths.geometry = out_dir / "geometry.json";
  paths.spectrum = out_dir / "spectrum.csv";
  paths.manifest = out_dir / "manifest.json";

  write_trace_jsonl(paths.trace, result.trace);
  write_geometry_json(paths.geometry, result.device);

  const std::vector<double> grid_nm = result.spec.grid_nm();
  std::vector<double> grid_um(grid_nm.size());
  for (std::size_t i = 0; i < grid_nm.size(); ++i) grid_um[i] = grid_nm[i] * 1e-3;
  const auto spectrum =
      simulate_spectrum(result.device, grid_um, result.objective.input_port, nullptr);
  write_spectrum_csv(paths.spectrum, grid_nm, spectrum);

  Manifest manifest;
  manifest.command = "optimize";
  manifest.spec_checksum = checksum_hex(fnv1a64_text(spec_source));
  manifest.seed = result.spec.seed;
  manifest.total_wall_ms = result.trace.total_wall_ms;
  manifest.artifacts.emplace_back("trace.jsonl", checksum_hex(trace_checksum(result.trace)));
  manifest.artifacts.emplace_back("geometry.json", checksum_hex(fnv1a64_file(paths.geometry)));
  manifest.artifacts.emplace_back("spectrum.csv", checksum_hex(fnv1a64_file(paths.spectrum)));

  for (const Checkpoint& cp : result.trace.checkpoints) {
    DeviceState snapshot = result.device;
    snapshot.params = cp.params;
    char name[48];
    std::snprintf(name, sizeof(name), "checkpoint_%06zu.json", cp.iter);
    const std::filesystem::path path = out_dir / name;
    write_geometry_json(path, snapshot);
    manifest.artifacts.emplace_back(name, checksum_hex(fnv1a64_file(path)));
  }

  write_manifest(paths.manifest, manifest);
  return paths;
}

}  // namespace mzmesh
