#pragma once

#include <span>
#include <vector>

#include "mzmesh/mesh.hpp"

namespace mzmesh {

// Design target: the wavelength grid, the injection port and the desired
// power transmission of every output at every grid point, plus the
// regularizer weights entering e^{-P}.
struct DesignObjective {
  std::vector<double> wavelengths_nm;
  int input_port = -1;  // -1 selects the device default, ports/2
  std::vector<std::vector<double>> targets;  // [wavelength][output port]
  double alpha1 = 3e-4;
  double alpha2 = 1e-4;
  double reference_width_nm = 450.0;

  bool operator==(const DesignObjective&) const = default;

  // Throws std::invalid_argument listing every violated constraint.
  void validate(int ports) const;
};

// P = alpha1 P1 + alpha2 P2 over every taper of the device, with widths in
// micrometers. P1 penalizes consecutive-width jumps inside a taper, P2 the
// distance to the reference width.
double regularization_penalty(const DeviceState& device, double alpha1, double alpha2,
                              double reference_width_um);

// Wavelength-averaged squared error between simulated transmissions scaled by
// e^{-P} and the targets.
double evaluate_objective(const DeviceState& device, const DesignObjective& objective,
                          ClampStats* stats = nullptr);
double evaluate_objective(const DeviceState& device, const DesignObjective& objective,
                          double* penalty_out, ClampStats* stats = nullptr);

}  // namespace mzmesh
