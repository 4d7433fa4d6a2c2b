#include "mzmesh/objective.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "mzmesh/detail/evaluate.hpp"

namespace mzmesh {

void DesignObjective::validate(int ports) const {
  std::string problems;
  const auto complain = [&problems](const std::string& p) {
    if (!problems.empty()) problems += "; ";
    problems += p;
  };

  if (wavelengths_nm.empty()) complain("wavelength grid needs at least 1 point");
  for (double l : wavelengths_nm) {
    if (!std::isfinite(l) || l <= 0.0) {
      complain("wavelengths must be finite and positive");
      break;
    }
  }
  if (targets.size() != wavelengths_nm.size()) {
    complain("target table has " + std::to_string(targets.size()) + " rows, expected " +
             std::to_string(wavelengths_nm.size()));
  }
  for (const auto& row : targets) {
    if (static_cast<int>(row.size()) != ports) {
      complain("target rows must have one entry per output port");
      break;
    }
  }
  for (const auto& row : targets) {
    double sum = 0.0;
    bool bad = false;
    for (double v : row) {
      if (v < 0.0 || v > 1.0) bad = true;
      sum += v;
    }
    if (bad) {
      complain("targets must lie in [0, 1]");
      break;
    }
    if (sum > 1.0 + 1e-9) {
      complain("targets must sum to at most 1 per wavelength");
      break;
    }
  }
  if (input_port >= ports || input_port < -1) complain("input port out of range");
  if (alpha1 < 0.0 || alpha2 < 0.0) complain("regularizer weights must be non-negative");
  if (!problems.empty()) throw std::invalid_argument(problems);
}

double regularization_penalty(const DeviceState& device, double alpha1, double alpha2,
                              double reference_width_um) {
  device.validate();
  const detail::ClampedDevice<double> cd =
      detail::clamp_device<double>(device, device.params, nullptr);
  return detail::penalty_t<double>(cd, device.config.interior_widths, alpha1, alpha2,
                                   reference_width_um);
}

double evaluate_objective(const DeviceState& device, const DesignObjective& objective,
                          double* penalty_out, ClampStats* stats) {
  device.validate();
  objective.validate(device.topology.ports);

  std::vector<double> lambdas_um(objective.wavelengths_nm.size());
  for (std::size_t i = 0; i < lambdas_um.size(); ++i) {
    lambdas_um[i] = objective.wavelengths_nm[i] * 1e-3;
  }
  const detail::EvalSetup es = detail::EvalSetup::prepare(device, lambdas_um);
  return detail::objective_value<double>(device, objective, es, device.params, stats,
                                         penalty_out);
}

double evaluate_objective(const DeviceState& device, const DesignObjective& objective,
                          ClampStats* stats) {
  return evaluate_objective(device, objective, nullptr, stats);
}

}  // namespace mzmesh
