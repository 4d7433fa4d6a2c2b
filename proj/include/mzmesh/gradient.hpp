#pragma once

#include <filesystem>
#include <vector>

#include "mzmesh/autodiff.hpp"
#include "mzmesh/objective.hpp"

namespace mzmesh {

// Objective value and its exact derivative with respect to every trainable
// parameter (1/um units), computed by one reverse sweep shared across all
// wavelengths.
struct GradientReport {
  double objective = 0.0;
  double penalty = 0.0;
  std::vector<double> gradient;
  ClampStats clamps{};
};

// Reusable tape so an optimization loop allocates once.
struct GradientWorkspace {
  ad::Tape tape;
  std::vector<ad::Rev> leaves;
};

GradientReport gradient(const DeviceState& device, const DesignObjective& objective);
GradientReport gradient(const DeviceState& device, const DesignObjective& objective,
                        GradientWorkspace& workspace);

struct FiniteDifferenceEntry {
  double analytic = 0.0;
  double central = 0.0;
  double relative_error = 0.0;
  bool near_bound = false;       // within 2h of a feasibility bound
  bool noise_dominated = false;  // both magnitudes below the FD roundoff bound
};

struct FiniteDifferenceReport {
  std::vector<FiniteDifferenceEntry> entries;
  double max_relative_error = 0.0;           // over every parameter
  double max_relative_error_interior = 0.0;  // excluding flagged parameters
  std::size_t worst_index = 0;
  std::size_t near_bound_count = 0;
  std::size_t noise_dominated_count = 0;
  double h_width_um = 0.0;
  double h_length_um = 0.0;
};

// Central differences against the reverse-mode gradient, with separate steps
// for width and length slots. Relative errors use an absolute floor of 1e-12
// in the denominator. Parameters that enter the objective only through a
// global phase have true derivative zero while the central difference is pure
// cancellation noise; they are flagged noise_dominated (both magnitudes below
// the roundoff bound eps*|J|/h) and excluded from the interior maximum, as are
// parameters within 2h of a clamp boundary.
FiniteDifferenceReport finite_difference_report(const DeviceState& device,
                                                const DesignObjective& objective,
                                                double h_width_um, double h_length_um);

// Worst-case relative error with a single step for every parameter.
double finite_difference_check(const DeviceState& device, const DesignObjective& objective,
                               double step_um);

// Debug dump: param_index,unit,taper,slot,value,gradient
void write_gradient_csv(const DeviceState& device, const GradientReport& report,
                        const std::filesystem::path& path);

}  // namespace mzmesh
