// mzmesh: design, simulate and analyze custom interferometer meshes.
//
//   mzmesh optimize        --spec file [--out dir] [--seed N] [--max-iter N]
//   mzmesh simulate        --geometry file --spec file [--out dir]
//   mzmesh sweep           --geometry file --spec file [--out dir]
//   mzmesh study           --spec file [--out dir] [--seed N]
//   mzmesh export-geometry --spec file [--out dir] [--seed N]
//   mzmesh plot            --run dir | --trace file | --spectrum file [--out dir]
//
// MZMESH_WORKERS controls how many study runs execute concurrently.

#include <atomic>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mzmesh/io.hpp"
#include "mzmesh/runner.hpp"
#include "mzmesh/svg.hpp"
#include "mzmesh/tolerance.hpp"

namespace {

namespace fs = std::filesystem;
using namespace mzmesh;

std::atomic<bool> g_abort{false};

void handle_interrupt(int) { g_abort.store(true); }

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

struct CommonArgs {
  std::string spec_path;
  std::string geometry_path;
  std::string out_dir = ".";
  std::int64_t seed = -1;
  std::int64_t max_iter = -1;
};

DesignSpec load_spec(const CommonArgs& args) {
  DesignSpec spec = parse_design_spec(args.spec_path);
  if (args.seed >= 0) spec.seed = static_cast<std::uint64_t>(args.seed);
  if (args.max_iter > 0) spec.max_iterations = static_cast<std::size_t>(args.max_iter);
  return spec;
}

std::vector<double> grid_um_of(const DesignSpec& spec) {
  std::vector<double> um;
  for (double nm : spec.grid_nm()) um.push_back(nm * 1e-3);
  return um;
}

Manifest base_manifest(const std::string& command, const CommonArgs& args,
                       const DesignSpec* spec) {
  Manifest m;
  m.command = command;
  if (!args.spec_path.empty()) {
    m.spec_file = args.spec_path;
    m.spec_checksum = checksum_hex(fnv1a64_text(read_file(args.spec_path)));
  }
  if (spec) m.seed = spec->seed;
  return m;
}

void add_artifact(Manifest& m, const fs::path& dir, const std::string& name) {
  m.artifacts.emplace_back(name, checksum_hex(fnv1a64_file(dir / name)));
}

int cmd_optimize(const CommonArgs& args) {
  const DesignSpec spec = load_spec(args);
  const RunResult result = run_optimization(spec, &g_abort);
  write_optimize_artifacts(args.out_dir, result, read_file(args.spec_path));

  const TracePoint& last = result.trace.points.back();
  std::printf("stop=%s iterations=%zu best_iter=%zu best_J=%.6g last_J=%.6g wall_ms=%.0f\n",
              to_string(result.trace.stop_reason), result.trace.points.size(),
              result.trace.best_iteration, result.trace.best_objective, last.objective,
              result.trace.total_wall_ms);
  return result.trace.stop_reason == StopReason::user_abort ? 130 : 0;
}

int cmd_simulate(const CommonArgs& args) {
  const DesignSpec spec = load_spec(args);
  const DeviceState device = read_geometry_json(args.geometry_path);
  const auto spectrum = simulate_spectrum(device, grid_um_of(spec), spec.input_port, nullptr);

  fs::create_directories(args.out_dir);
  const fs::path out = fs::path(args.out_dir) / "spectrum.csv";
  write_spectrum_csv(out, spec.grid_nm(), spectrum);

  Manifest m = base_manifest("simulate", args, &spec);
  add_artifact(m, args.out_dir, "spectrum.csv");
  write_manifest(fs::path(args.out_dir) / "manifest.json", m);
  std::printf("wrote %s (%d wavelengths x %d outputs)\n", out.string().c_str(), spec.grid_count,
              spec.ports);
  return 0;
}

int cmd_sweep(const CommonArgs& args) {
  const DesignSpec spec = load_spec(args);
  const DeviceState device = read_geometry_json(args.geometry_path);
  const DesignObjective objective = build_targets(spec);
  const ToleranceReport report = etch_sweep(device, spec.offsets_nm, objective);

  fs::create_directories(args.out_dir);
  const fs::path dir(args.out_dir);
  write_tolerance_csv(dir / "sweep.csv", report);
  Manifest m = base_manifest("sweep", args, &spec);
  add_artifact(m, dir, "sweep.csv");
  for (std::size_t i = 0; i < report.offsets_nm.size(); ++i) {
    const std::string name = "spectrum_" + offset_tag(report.offsets_nm[i]) + ".csv";
    write_spectrum_csv(dir / name, spec.grid_nm(), report.spectra[i]);
    add_artifact(m, dir, name);
  }
  write_manifest(dir / "manifest.json", m);

  for (std::size_t i = 0; i < report.offsets_nm.size(); ++i) {
    std::printf("offset %+g nm: J = %.6g\n", report.offsets_nm[i], report.objectives[i]);
  }
  return 0;
}

int cmd_study(const CommonArgs& args) {
  const DesignSpec spec = load_spec(args);
  const std::vector<StudyRow> rows = layer_study(spec, spec.layer_counts, spec.seeds_per_count);

  fs::create_directories(args.out_dir);
  const fs::path dir(args.out_dir);
  write_study_csv(dir / "study.csv", rows);
  Manifest m = base_manifest("study", args, &spec);
  add_artifact(m, dir, "study.csv");
  write_manifest(dir / "manifest.json", m);

  int failures = 0;
  for (const StudyRow& row : rows) {
    if (!row.error.empty()) {
      std::fprintf(stderr, "run M=%d seed=%llu failed: %s\n", row.layers,
                   static_cast<unsigned long long>(row.seed), row.error.c_str());
      ++failures;
    } else {
      std::printf("M=%d seed=%llu J=%.6g\n", row.layers,
                  static_cast<unsigned long long>(row.seed), row.final_objective);
    }
  }
  return failures == 0 ? 0 : 1;
}

int cmd_export_geometry(const CommonArgs& args) {
  const DesignSpec spec = load_spec(args);
  const DeviceState device = initial_device(spec);

  fs::create_directories(args.out_dir);
  const fs::path out = fs::path(args.out_dir) / "geometry.json";
  write_geometry_json(out, device);

  Manifest m = base_manifest("export-geometry", args, &spec);
  add_artifact(m, args.out_dir, "geometry.json");
  write_manifest(fs::path(args.out_dir) / "manifest.json", m);
  std::printf("wrote %s (seeded initial device, %d layers)\n", out.string().c_str(), spec.layers);
  return 0;
}

int cmd_plot(const std::string& run_dir, std::string trace_path, std::string spectrum_path,
             const std::string& out_dir) {
  if (!run_dir.empty()) {
    if (trace_path.empty() && fs::exists(fs::path(run_dir) / "trace.jsonl")) {
      trace_path = (fs::path(run_dir) / "trace.jsonl").string();
    }
    if (spectrum_path.empty() && fs::exists(fs::path(run_dir) / "spectrum.csv")) {
      spectrum_path = (fs::path(run_dir) / "spectrum.csv").string();
    }
  }
  if (trace_path.empty() && spectrum_path.empty()) {
    throw std::invalid_argument("nothing to plot: pass --run, --trace or --spectrum");
  }

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  Manifest m;
  m.command = "plot";
  if (!trace_path.empty()) {
    const std::vector<TracePoint> points = read_trace_jsonl(trace_path);
    write_trace_svg(dir / "trace.svg", points);
    add_artifact(m, dir, "trace.svg");
    std::printf("wrote %s\n", (dir / "trace.svg").string().c_str());
  }
  if (!spectrum_path.empty()) {
    const SpectrumData data = read_spectrum_csv(spectrum_path);
    write_spectrum_svg(dir / "spectrum.svg", data.wavelengths_nm, data.transmission);
    add_artifact(m, dir, "spectrum.svg");
    std::printf("wrote %s\n", (dir / "spectrum.svg").string().c_str());
  }
  write_manifest(dir / "manifest.json", m);
  return 0;
}

// Failures exit non-zero with a one-line JSON error object on stderr.
int report_error(const char* type, const std::exception& e) {
  nlohmann::json err;
  err["error"] = {{"type", type}, {"message", e.what()}};
  std::cerr << err.dump() << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGINT, handle_interrupt);

  CLI::App app{"Gradient-based design of custom interferometer meshes"};
  app.set_version_flag("--version", "mzmesh 0.1.0");
  app.require_subcommand(1);

  CommonArgs args;
  std::string run_dir, trace_path, spectrum_path;

  const auto add_common = [&args](CLI::App* cmd, bool needs_spec, bool needs_geometry) {
    auto* spec = cmd->add_option("--spec", args.spec_path, "Design spec file");
    if (needs_spec) spec->required()->check(CLI::ExistingFile);
    if (needs_geometry) {
      cmd->add_option("--geometry", args.geometry_path, "Geometry JSON")
          ->required()
          ->check(CLI::ExistingFile);
    }
    cmd->add_option("--out", args.out_dir, "Output directory");
    cmd->add_option("--seed", args.seed, "Override the spec seed");
    cmd->add_option("--max-iter", args.max_iter, "Override the iteration cap");
  };

  CLI::App* optimize = app.add_subcommand("optimize", "Run the training loop");
  add_common(optimize, true, false);
  CLI::App* simulate = app.add_subcommand("simulate", "Spectrum of an exported geometry");
  add_common(simulate, true, true);
  CLI::App* sweep = app.add_subcommand("sweep", "Etch-offset tolerance sweep");
  add_common(sweep, true, true);
  CLI::App* study = app.add_subcommand("study", "Layer-count robustness study");
  add_common(study, true, false);
  CLI::App* exportg = app.add_subcommand("export-geometry", "Export the seeded initial device");
  add_common(exportg, true, false);

  CLI::App* plot = app.add_subcommand("plot", "Render SVG charts from run artifacts");
  plot->add_option("--run", run_dir, "Run directory holding trace.jsonl / spectrum.csv");
  plot->add_option("--trace", trace_path, "Trace JSONL file");
  plot->add_option("--spectrum", spectrum_path, "Spectrum CSV file");
  plot->add_option("--out", args.out_dir, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (optimize->parsed()) return cmd_optimize(args);
    if (simulate->parsed()) return cmd_simulate(args);
    if (sweep->parsed()) return cmd_sweep(args);
    if (study->parsed()) return cmd_study(args);
    if (exportg->parsed()) return cmd_export_geometry(args);
    if (plot->parsed()) return cmd_plot(run_dir, trace_path, spectrum_path, args.out_dir);
  } catch (const std::invalid_argument& e) {
    return report_error("invalid_argument", e);
  } catch (const std::out_of_range& e) {
    return report_error("out_of_range", e);
  } catch (const std::exception& e) {
    return report_error("runtime_error", e);
  }
  return 1;
}
