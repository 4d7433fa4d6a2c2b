#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mzmesh/objective.hpp"
#include "mzmesh/optimizer.hpp"

namespace mzmesh {

enum class DeviceKind { splitter, duplexer, custom };

const char* to_string(DeviceKind kind);

// Complete description of one design run, parsed from an INI-style file with
// [sections]. Every field has a concrete value after parsing; re-serializing
// and re-parsing is the identity.
struct DesignSpec {
  DeviceKind kind = DeviceKind::splitter;
  int ports = 2;
  int layers = 3;
  int widths_per_taper = 5;
  int input_port = 1;  // resolved default is ports/2
  std::uint64_t seed = 1;
  std::size_t max_iterations = 5000;
  std::size_t checkpoint_every = 0;

  double grid_start_nm = 1400.0;
  double grid_stop_nm = 1600.0;
  int grid_count = 32;

  std::vector<double> split_ratios = {0.5, 0.5};  // splitter
  double cutoff_nm = 1550.0;                      // duplexer
  int short_pass_output = 0;                      // duplexer
  std::string target_table;                       // custom: CSV path, resolved absolute

  double width_jitter_nm = 10.0;
  double width_offset_nm = 40.0;
  double length_jitter_um = 2.0;

  double default_width_nm = 450.0;
  double width_min_nm = 400.0;
  double width_max_nm = 520.0;
  double length_min_um = 6.0;
  double length_max_um = 10.0;

  double alpha1 = 3e-4;
  double alpha2 = 1e-4;
  double reference_width_nm = 450.0;

  std::vector<double> offsets_nm = {-20.0, -10.0, 0.0, 10.0, 20.0};
  std::vector<int> layer_counts = {2, 3, 4, 6};
  int seeds_per_count = 3;

  bool operator==(const DesignSpec&) const = default;

  std::vector<double> grid_nm() const;
  void validate() const;  // throws std::invalid_argument listing every violation
};

// Parses and validates a design file. Parse errors carry file:line context;
// validation errors list every violated constraint at once.
DesignSpec parse_design_spec(const std::filesystem::path& path);

// Canonical full serialization (every key explicit).
std::string serialize_design_spec(const DesignSpec& spec);

// Derived configuration objects.
InitConfig init_config(const DesignSpec& spec);
MeshConfig mesh_config(const DesignSpec& spec);

// Target transmission table on the spec grid: constant rows for splitters, an
// ideal step at the cutoff for duplexers, file passthrough for custom tables.
DesignObjective build_targets(const DesignSpec& spec);

// Topology plus seeded initial parameters.
DeviceState initial_device(const DesignSpec& spec);

}  // namespace mzmesh
