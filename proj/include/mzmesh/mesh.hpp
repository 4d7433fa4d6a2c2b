#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "mzmesh/waveguide.hpp"

namespace mzmesh {

// Feasibility interval for the trainable taper parameters. The optimizer
// clips onto it and the evaluation pipeline clamps onto it, so every phase is
// computed from feasible geometry even for briefly infeasible iterates.
struct TaperBounds {
  double width_min_um = 0.40;
  double width_max_um = 0.52;
  double length_min_um = 6.0;
  double length_max_um = 10.0;
};

// Geometry and physics configuration shared by every interferometer in a
// mesh. interior_widths is the number of trainable widths per taper.
struct MeshConfig {
  int interior_widths = 5;
  double default_width_um = 0.45;
  TaperBounds bounds{};
  int sample_count = 201;
  EffectiveIndexModel neff{};
  CouplerModel coupler{};

  int slots_per_taper() const { return interior_widths + 1; }
  int params_per_unit() const { return 4 * slots_per_taper(); }
  double mzi_length_um() const {
    return 2.0 * bounds.length_max_um + 2.0 * coupler.section_length_um;
  }
};

// One placed interferometer: 1-based layer and the upper of its two ports.
struct MziPlacement {
  int layer = 0;
  int top_port = 0;
};

// Alternating rectangular mesh. Odd layers pair ports (0,1),(2,3),...; even
// layers pair (1,2),(3,4),...; a two-port network carries one unit per layer.
struct NetworkTopology {
  int ports = 0;
  int layers = 0;
  std::vector<std::vector<int>> layer_tops;  // per layer, ascending top ports
  std::vector<MziPlacement> units;           // layer-major flattening

  int unit_count() const { return static_cast<int>(units.size()); }
};

NetworkTopology build_topology(int ports, int layers);

// 4*(xi+1) per unit summed over the placement rule above.
long trainable_parameter_count(int ports, int layers, int interior_widths);

// Taper positions within one interferometer, in evaluation order: the input
// pair feeds the first coupler, the mid pair sits between the couplers.
enum class TaperPosition { input_top = 0, input_bottom = 1, mid_top = 2, mid_bottom = 3 };

// Slot layout of the flattened parameter vector: unit-major, four tapers per
// unit, xi widths followed by one length per taper.
std::size_t param_index(const MeshConfig& config, int unit, int taper, int slot);
struct ParamCoords {
  int unit = 0;
  int taper = 0;
  int slot = 0;  // slot == interior_widths denotes the length slot
};
ParamCoords param_coords(const MeshConfig& config, std::size_t index);
bool is_length_slot(const MeshConfig& config, std::size_t index);

// A full device: topology, shared configuration, the flattened trainable
// parameter vector (micrometers) and the uniform etch offset the device is
// simulated under.
struct DeviceState {
  MeshConfig config{};
  NetworkTopology topology{};
  std::vector<double> params;
  double etch_offset_nm = 0.0;

  int default_input_port() const { return topology.ports / 2; }
  void validate() const;  // throws std::invalid_argument on layout mismatch
};

// Neutral device: every width at default_width_um, every length at the upper
// length bound (zero pad).
DeviceState make_device(int ports, int layers, const MeshConfig& config = {});

double device_length_um(const DeviceState& device);

// View of one taper of one unit as a standalone profile (etch offset not
// applied; offsets are a simulation-time shift).
TaperProfile device_taper(const DeviceState& device, int unit, TaperPosition position);

// One interferometer as four explicit taper profiles.
struct MziUnit {
  std::array<TaperProfile, 4> tapers;  // indexed by TaperPosition
};

using Matrix2c = std::array<std::complex<double>, 4>;  // row-major 2x2

// Transfer matrix of a single interferometer at one wavelength:
//   T = e^{-j phi} C D(mid) e^{-j phi} C D(input)
// with C = [t, -jq; -jq, t] from the coupler table and D the diagonal taper
// phases. Widths are shifted by the etch offset before phase evaluation.
Matrix2c mzi_transfer(const MziUnit& unit, double wavelength_um, double etch_offset_nm,
                      const MeshConfig& config = {});
Matrix2c mzi_transfer(const MziUnit& unit, double wavelength_um, const CouplerSpectrum& table,
                      const MeshConfig& config = {});

// Row-major N x N complex matrix of the plain double simulation path.
struct ComplexMatrix {
  int n = 0;
  std::vector<std::complex<double>> a;

  explicit ComplexMatrix(int size = 0) : n(size), a(static_cast<std::size_t>(size) * size) {}
  std::complex<double>& at(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
  const std::complex<double>& at(int i, int j) const {
    return a[static_cast<std::size_t>(i) * n + j];
  }
};

// Full network scattering matrix: layer matrices applied input-to-output,
// each multiplying left of the accumulated product.
ComplexMatrix network_scatter(const DeviceState& device, double wavelength_um);

// Explicit layer matrix (identity plus embedded 2x2 blocks); layer is 1-based.
ComplexMatrix layer_matrix(const DeviceState& device, int layer, double wavelength_um);

// Per-output power transmission |S[k, input]|^2 for every grid wavelength.
// Result is indexed [wavelength][output port].
std::vector<std::vector<double>> simulate_spectrum(const DeviceState& device,
                                                   std::span<const double> wavelengths_um,
                                                   int input_port, ClampStats* stats = nullptr);
std::vector<std::vector<double>> simulate_spectrum(const DeviceState& device,
                                                   std::span<const double> wavelengths_um);

}  // namespace mzmesh
