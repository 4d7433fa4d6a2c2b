// Python bindings for the mzmesh core: surrogate waveguide models, mesh
// simulation, gradients, the training loop and the tolerance analysis.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <complex>
#include <vector>

#include "mzmesh/gradient.hpp"
#include "mzmesh/io.hpp"
#include "mzmesh/runner.hpp"
#include "mzmesh/svg.hpp"
#include "mzmesh/tolerance.hpp"

namespace py = pybind11;
using namespace mzmesh;

namespace {

std::vector<std::vector<std::complex<double>>> matrix_rows(const ComplexMatrix& m) {
  std::vector<std::vector<std::complex<double>>> rows(m.n);
  for (int i = 0; i < m.n; ++i) {
    rows[i].reserve(m.n);
    for (int j = 0; j < m.n; ++j) rows[i].push_back(m.at(i, j));
  }
  return rows;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Differentiable transfer-matrix simulator and gradient-based "
            "optimizer for meshes of custom Mach-Zehnder interferometers";

  py::class_<EffectiveIndexModel>(m, "EffectiveIndexModel",
                                  "Bilinear effective-index surrogate n(w, lambda)")
      .def(py::init<>())
      .def_readwrite("base", &EffectiveIndexModel::base)
      .def_readwrite("width_slope", &EffectiveIndexModel::width_slope)
      .def_readwrite("wavelength_slope", &EffectiveIndexModel::wavelength_slope)
      .def_readwrite("cross_term", &EffectiveIndexModel::cross_term)
      .def_readwrite("anchor_width_um", &EffectiveIndexModel::anchor_width_um)
      .def_readwrite("anchor_wavelength_um", &EffectiveIndexModel::anchor_wavelength_um)
      .def_readwrite("width_min_um", &EffectiveIndexModel::width_min_um)
      .def_readwrite("width_max_um", &EffectiveIndexModel::width_max_um)
      .def_readwrite("wavelength_min_um", &EffectiveIndexModel::wavelength_min_um)
      .def_readwrite("wavelength_max_um", &EffectiveIndexModel::wavelength_max_um);

  m.def("effective_index",
        [](double width_um, double wavelength_um, const EffectiveIndexModel& model) {
          return effective_index(width_um, wavelength_um, model);
        },
        py::arg("width_um"), py::arg("wavelength_um"),
        py::arg("model") = EffectiveIndexModel{},
        "Guided-mode effective index of a strip waveguide");

  py::class_<TaperProfile>(m, "TaperProfile")
      .def(py::init<>())
      .def_readwrite("end_width_um", &TaperProfile::end_width_um)
      .def_readwrite("interior_widths_um", &TaperProfile::interior_widths_um)
      .def_readwrite("length_um", &TaperProfile::length_um)
      .def_readwrite("max_length_um", &TaperProfile::max_length_um)
      .def_readwrite("sample_count", &TaperProfile::sample_count)
      .def_property_readonly("pad_length_um", &TaperProfile::pad_length_um);

  m.def("taper_phase",
        [](const TaperProfile& profile, double wavelength_um, const EffectiveIndexModel& model) {
          return taper_phase(profile, wavelength_um, model);
        },
        py::arg("profile"), py::arg("wavelength_um"), py::arg("model") = EffectiveIndexModel{},
        "Accumulated phase of a taper plus its end-width pad");

  py::class_<CouplerPoint>(m, "CouplerPoint")
      .def_readonly("through", &CouplerPoint::through)
      .def_readonly("cross", &CouplerPoint::cross)
      .def_readonly("phase", &CouplerPoint::phase)
      .def("__repr__", [](const CouplerPoint& p) {
        return "CouplerPoint(t=" + std::to_string(p.through) + ", q=" + std::to_string(p.cross) +
               ", phi=" + std::to_string(p.phase) + ")";
      });

  m.def("coupler_response",
        [](double wavelength_um, double etch_offset_nm) {
          return coupler_response(wavelength_um, etch_offset_nm);
        },
        py::arg("wavelength_um"), py::arg("etch_offset_nm") = 0.0,
        "Directional-coupler response of the default surrogate");

  py::class_<CouplerSpectrum>(m, "CouplerSpectrum")
      .def_readonly("wavelength_um", &CouplerSpectrum::wavelength_um)
      .def_readonly("etch_offset_nm", &CouplerSpectrum::etch_offset_nm)
      .def("__len__", [](const CouplerSpectrum& t) { return t.wavelength_um.size(); });

  m.def("build_coupler_table",
        [](double etch_offset_nm) { return build_coupler_table(etch_offset_nm); },
        py::arg("etch_offset_nm") = 0.0);
  m.def("interpolate_coupler", &interpolate_coupler, py::arg("table"), py::arg("wavelength_um"));
  m.def("write_coupler_csv", &write_coupler_csv, py::arg("table"), py::arg("path"));
  m.def("read_coupler_csv", &read_coupler_csv, py::arg("path"), py::arg("etch_offset_nm") = 0.0);

  m.def("build_topology", &build_topology, py::arg("ports"), py::arg("layers"));
  py::class_<NetworkTopology>(m, "NetworkTopology")
      .def_readonly("ports", &NetworkTopology::ports)
      .def_readonly("layers", &NetworkTopology::layers)
      .def_readonly("layer_tops", &NetworkTopology::layer_tops)
      .def_property_readonly("unit_count", &NetworkTopology::unit_count);

  m.def("trainable_parameter_count", &trainable_parameter_count, py::arg("ports"),
        py::arg("layers"), py::arg("interior_widths"),
        "Number of trainable scalars for a mesh of the given size");

  py::class_<DeviceState>(m, "DeviceState")
      .def_property_readonly("ports",
                             [](const DeviceState& d) { return d.topology.ports; })
      .def_property_readonly("layers",
                             [](const DeviceState& d) { return d.topology.layers; })
      .def_readwrite("params", &DeviceState::params)
      .def_readwrite("etch_offset_nm", &DeviceState::etch_offset_nm)
      .def_property_readonly("default_input_port", &DeviceState::default_input_port)
      .def_property_readonly("length_um", &device_length_um)
      .def("__repr__", [](const DeviceState& d) {
        return "DeviceState(ports=" + std::to_string(d.topology.ports) +
               ", layers=" + std::to_string(d.topology.layers) +
               ", params=" + std::to_string(d.params.size()) + ")";
      });

  m.def("make_device",
        [](int ports, int layers) { return make_device(ports, layers); },
        py::arg("ports"), py::arg("layers"), "Neutral device with default-width tapers");

  m.def("network_scatter",
        [](const DeviceState& device, double wavelength_um) {
          return matrix_rows(network_scatter(device, wavelength_um));
        },
        py::arg("device"), py::arg("wavelength_um"),
        "Full scattering matrix as a nested list of complex amplitudes");

  m.def("simulate_spectrum",
        [](const DeviceState& device, const std::vector<double>& wavelengths_um,
           int input_port) {
          if (input_port < 0) input_port = device.default_input_port();
          return simulate_spectrum(device, wavelengths_um, input_port, nullptr);
        },
        py::arg("device"), py::arg("wavelengths_um"), py::arg("input_port") = -1,
        "Per-output power transmission for every grid wavelength");

  py::class_<DesignObjective>(m, "DesignObjective")
      .def(py::init<>())
      .def_readwrite("wavelengths_nm", &DesignObjective::wavelengths_nm)
      .def_readwrite("input_port", &DesignObjective::input_port)
      .def_readwrite("targets", &DesignObjective::targets)
      .def_readwrite("alpha1", &DesignObjective::alpha1)
      .def_readwrite("alpha2", &DesignObjective::alpha2)
      .def_readwrite("reference_width_nm", &DesignObjective::reference_width_nm);

  m.def("evaluate_objective",
        [](const DeviceState& device, const DesignObjective& objective) {
          return evaluate_objective(device, objective);
        },
        py::arg("device"), py::arg("objective"));
  m.def("regularization_penalty", &regularization_penalty, py::arg("device"), py::arg("alpha1"),
        py::arg("alpha2"), py::arg("reference_width_um"));

  py::class_<GradientReport>(m, "GradientReport")
      .def_readonly("objective", &GradientReport::objective)
      .def_readonly("penalty", &GradientReport::penalty)
      .def_readonly("gradient", &GradientReport::gradient);

  m.def("gradient",
        [](const DeviceState& device, const DesignObjective& objective) {
          return gradient(device, objective);
        },
        py::arg("device"), py::arg("objective"),
        "Objective value and its exact reverse-mode derivative");

  m.def("finite_difference_check", &finite_difference_check, py::arg("device"),
        py::arg("objective"), py::arg("step_um"),
        "Worst-case relative deviation between the gradient and central differences");

  py::class_<InitConfig>(m, "InitConfig")
      .def(py::init<>())
      .def_readwrite("default_width_nm", &InitConfig::default_width_nm)
      .def_readwrite("width_jitter_nm", &InitConfig::width_jitter_nm)
      .def_readwrite("width_offset_nm", &InitConfig::width_offset_nm)
      .def_readwrite("length_jitter_um", &InitConfig::length_jitter_um)
      .def_readwrite("widths_per_taper", &InitConfig::widths_per_taper)
      .def_readwrite("seed", &InitConfig::seed);

  m.def("initialize_parameters", &initialize_parameters, py::arg("topology"), py::arg("config"));
  m.def("learning_rate", &learning_rate, py::arg("iteration"));

  py::enum_<StopReason>(m, "StopReason")
      .value("converged", StopReason::converged)
      .value("max_iterations", StopReason::max_iterations)
      .value("user_abort", StopReason::user_abort);

  py::class_<TracePoint>(m, "TracePoint")
      .def_readonly("iter", &TracePoint::iter)
      .def_readonly("objective", &TracePoint::objective)
      .def_readonly("penalty", &TracePoint::penalty)
      .def_readonly("learning_rate", &TracePoint::learning_rate)
      .def_readonly("wall_ms", &TracePoint::wall_ms);

  py::class_<OptimizationTrace>(m, "OptimizationTrace")
      .def_readonly("points", &OptimizationTrace::points)
      .def_readonly("stop_reason", &OptimizationTrace::stop_reason)
      .def_readonly("best_iteration", &OptimizationTrace::best_iteration)
      .def_readonly("best_objective", &OptimizationTrace::best_objective)
      .def_readonly("total_wall_ms", &OptimizationTrace::total_wall_ms);

  py::enum_<DeviceKind>(m, "DeviceKind")
      .value("splitter", DeviceKind::splitter)
      .value("duplexer", DeviceKind::duplexer)
      .value("custom", DeviceKind::custom);

  py::class_<DesignSpec>(m, "DesignSpec")
      .def(py::init<>())
      .def_readwrite("kind", &DesignSpec::kind)
      .def_readwrite("ports", &DesignSpec::ports)
      .def_readwrite("layers", &DesignSpec::layers)
      .def_readwrite("widths_per_taper", &DesignSpec::widths_per_taper)
      .def_readwrite("input_port", &DesignSpec::input_port)
      .def_readwrite("seed", &DesignSpec::seed)
      .def_readwrite("max_iterations", &DesignSpec::max_iterations)
      .def_readwrite("grid_start_nm", &DesignSpec::grid_start_nm)
      .def_readwrite("grid_stop_nm", &DesignSpec::grid_stop_nm)
      .def_readwrite("grid_count", &DesignSpec::grid_count)
      .def_readwrite("split_ratios", &DesignSpec::split_ratios)
      .def_readwrite("cutoff_nm", &DesignSpec::cutoff_nm)
      .def_readwrite("alpha1", &DesignSpec::alpha1)
      .def_readwrite("alpha2", &DesignSpec::alpha2)
      .def("grid_nm", &DesignSpec::grid_nm)
      .def("validate", &DesignSpec::validate);

  m.def("parse_design_spec", &parse_design_spec, py::arg("path"));
  m.def("serialize_design_spec", &serialize_design_spec, py::arg("spec"));
  m.def("build_targets", &build_targets, py::arg("spec"));
  m.def("initial_device", &initial_device, py::arg("spec"));

  py::class_<RunResult>(m, "RunResult")
      .def_readonly("spec", &RunResult::spec)
      .def_readonly("device", &RunResult::device)
      .def_readonly("objective", &RunResult::objective)
      .def_readonly("trace", &RunResult::trace);

  m.def("run_optimization",
        [](const DesignSpec& spec) { return run_optimization(spec); },
        py::arg("spec"), py::call_guard<py::gil_scoped_release>(),
        "Full training loop: returns the optimized device and its trace");

  m.def("apply_etch_offset", &apply_etch_offset, py::arg("device"), py::arg("offset_nm"));

  py::class_<ToleranceReport>(m, "ToleranceReport")
      .def_readonly("offsets_nm", &ToleranceReport::offsets_nm)
      .def_readonly("objectives", &ToleranceReport::objectives)
      .def_readonly("spectra", &ToleranceReport::spectra)
      .def_readonly("reference_objective", &ToleranceReport::reference_objective);

  m.def("etch_sweep",
        [](const DeviceState& device, const std::vector<double>& offsets_nm,
           const DesignObjective& objective) {
          return etch_sweep(device, offsets_nm, objective);
        },
        py::arg("device"), py::arg("offsets_nm"), py::arg("objective"),
        py::call_guard<py::gil_scoped_release>());

  py::class_<StudyRow>(m, "StudyRow")
      .def_readonly("layers", &StudyRow::layers)
      .def_readonly("seed", &StudyRow::seed)
      .def_readonly("final_objective", &StudyRow::final_objective)
      .def_readonly("offset_objectives", &StudyRow::offset_objectives)
      .def_readonly("error", &StudyRow::error);

  m.def("layer_study",
        [](const DesignSpec& spec, const std::vector<int>& layer_counts, int seeds_per_count) {
          return layer_study(spec, layer_counts, seeds_per_count);
        },
        py::arg("spec"), py::arg("layer_counts"), py::arg("seeds_per_count"),
        py::call_guard<py::gil_scoped_release>());

  m.def("write_geometry_json", &write_geometry_json, py::arg("path"), py::arg("device"));
  m.def("read_geometry_json", &read_geometry_json, py::arg("path"));
  m.def("write_spectrum_csv",
        [](const std::filesystem::path& path, const std::vector<double>& wavelengths_nm,
           const std::vector<std::vector<double>>& transmission) {
          write_spectrum_csv(path, wavelengths_nm, transmission);
        },
        py::arg("path"), py::arg("wavelengths_nm"), py::arg("transmission"));

  m.attr("__version__") = "0.1.0";
}
