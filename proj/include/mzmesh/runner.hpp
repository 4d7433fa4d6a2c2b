#pragma once

#include <atomic>
#include <filesystem>
#include <string>

#include "mzmesh/design.hpp"
#include "mzmesh/io.hpp"
#include "mzmesh/optimizer.hpp"

namespace mzmesh {

struct RunResult {
  DesignSpec spec;
  DeviceState device;  // best-objective parameters after the run
  DesignObjective objective;
  OptimizationTrace trace;
};

// Builds the device and targets from the spec and runs the training loop.
RunResult run_optimization(const DesignSpec& spec, const std::atomic<bool>* abort = nullptr);

struct OptimizeArtifacts {
  std::filesystem::path trace;
  std::filesystem::path geometry;
  std::filesystem::path spectrum;
  std::filesystem::path manifest;
};

// Writes trace.jsonl, geometry.json, spectrum.csv, optional checkpoint
// geometries and manifest.json into out_dir. spec_source is the spec text the
// run was parsed from (used for the manifest checksum).
OptimizeArtifacts write_optimize_artifacts(const std::filesystem::path& out_dir,
                                           const RunResult& result,
                                           const std::string& spec_source);

}  // namespace mzmesh
