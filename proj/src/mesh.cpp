#include "mzmesh/mesh.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "mzmesh/detail/evaluate.hpp"

namespace mzmesh {

NetworkTopology build_topology(int ports, int layers) {
  if (ports < 2) throw std::invalid_argument("port count must be at least 2");
  if (layers < 1) throw std::invalid_argument("layer count must be at least 1");

  NetworkTopology topo;
  topo.ports = ports;
  topo.layers = layers;
  topo.layer_tops.resize(layers);
  for (int layer = 1; layer <= layers; ++layer) {
    std::vector<int>& tops = topo.layer_tops[layer - 1];
    if (ports == 2) {
      tops.push_back(0);
    } else {
      const int first = (layer % 2 == 1) ? 0 : 1;
      for (int top = first; top + 1 < ports; top += 2) tops.push_back(top);
    }
    for (int top : tops) topo.units.push_back(MziPlacement{layer, top});
  }
  return topo;
}

long trainable_parameter_count(int ports, int layers, int interior_widths) {
  if (ports < 2) throw std::invalid_argument("port count must be at least 2");
  if (layers < 1) throw std::invalid_argument("layer count must be at least 1");
  if (interior_widths < 1) throw std::invalid_argument("interior width count must be at least 1");

  const long per_unit = 4L * (interior_widths + 1);
  if (ports == 2) return per_unit * layers;
  const long odd_layers = (layers + 1) / 2;
  const long even_layers = layers / 2;
  return per_unit * (odd_layers * (ports / 2) + even_layers * ((ports - 1) / 2));
}

std::size_t param_index(const MeshConfig& config, int unit, int taper, int slot) {
  return (static_cast<std::size_t>(unit) * 4 + taper) * config.slots_per_taper() + slot;
}

ParamCoords param_coords(const MeshConfig& config, std::size_t index) {
  const int stride = config.slots_per_taper();
  ParamCoords c;
  c.slot = static_cast<int>(index % stride);
  const std::size_t taper_index = index / stride;
  c.taper = static_cast<int>(taper_index % 4);
  c.unit = static_cast<int>(taper_index / 4);
  return c;
}

bool is_length_slot(const MeshConfig& config, std::size_t index) {
  return param_coords(config, index).slot == config.interior_widths;
}

void DeviceState::validate() const {
  const std::size_t expected =
      static_cast<std::size_t>(topology.unit_count()) * config.params_per_unit();
  if (params.size() != expected) {
    throw std::invalid_argument("parameter vector has " + std::to_string(params.size()) +
                                " entries, expected " + std::to_string(expected));
  }
  if (etch_offset_nm < config.coupler.etch_min_nm || etch_offset_nm > config.coupler.etch_max_nm) {
    throw std::invalid_argument("etch offset outside the coupler model range");
  }
}

DeviceState make_device(int ports, int layers, const MeshConfig& config) {
  DeviceState dev;
  dev.config = config;
  dev.topology = build_topology(ports, layers);
  const int xi = config.interior_widths;
  dev.params.reserve(static_cast<std::size_t>(dev.topology.unit_count()) *
                     config.params_per_unit());
  for (int u = 0; u < dev.topology.unit_count(); ++u) {
    for (int t = 0; t < 4; ++t) {
      for (int i = 0; i < xi; ++i) dev.params.push_back(config.default_width_um);
      dev.params.push_back(config.bounds.length_max_um);
    }
  }
  return dev;
}

double device_length_um(const DeviceState& device) {
  return device.topology.layers * device.config.mzi_length_um();
}

TaperProfile device_taper(const DeviceState& device, int unit, TaperPosition position) {
  const MeshConfig& cfg = device.config;
  if (unit < 0 || unit >= device.topology.unit_count()) {
    throw std::invalid_argument("unit index out of range");
  }
  TaperProfile p;
  p.end_width_um = cfg.default_width_um;
  p.max_length_um = cfg.bounds.length_max_um;
  p.sample_count = cfg.sample_count;
  const int t = static_cast<int>(position);
  for (int i = 0; i < cfg.interior_widths; ++i) {
    p.interior_widths_um.push_back(device.params[param_index(cfg, unit, t, i)]);
  }
  p.length_um = device.params[param_index(cfg, unit, t, cfg.interior_widths)];
  return p;
}

namespace {

Matrix2c transfer_from_profiles(const MziUnit& unit, double wavelength_um,
                                const CouplerPoint& cp, const MeshConfig& config,
                                double etch_offset_nm) {
  using C = std::complex<double>;
  const double shift = etch_offset_nm * 1e-3;

  C d[4];
  for (int t = 0; t < 4; ++t) {
    TaperProfile shifted = unit.tapers[t];
    shifted.end_width_um += shift;
    for (double& w : shifted.interior_widths_um) w += shift;
    const double theta = taper_phase(shifted, wavelength_um, config.neff);
    d[t] = C(std::cos(theta), -std::sin(theta));
  }

  const C t_amp(cp.through, 0.0);
  const C mjq(0.0, -cp.cross);
  const auto coupler_stage = [&](C top, C bot) {
    return std::array<C, 4>{t_amp * top, mjq * bot, mjq * top, t_amp * bot};
  };
  const std::array<C, 4> a = coupler_stage(d[0], d[1]);
  const std::array<C, 4> b = coupler_stage(d[2], d[3]);
  const C f2 = std::polar(1.0, -2.0 * cp.phase);
  return Matrix2c{f2 * (b[0] * a[0] + b[1] * a[2]), f2 * (b[0] * a[1] + b[1] * a[3]),
                  f2 * (b[2] * a[0] + b[3] * a[2]), f2 * (b[2] * a[1] + b[3] * a[3])};
}

}  // namespace

Matrix2c mzi_transfer(const MziUnit& unit, double wavelength_um, double etch_offset_nm,
                      const MeshConfig& config) {
  const CouplerSpectrum table = build_coupler_table(etch_offset_nm, config.coupler, config.neff);
  return mzi_transfer(unit, wavelength_um, table, config);
}

Matrix2c mzi_transfer(const MziUnit& unit, double wavelength_um, const CouplerSpectrum& table,
                      const MeshConfig& config) {
  const CouplerPoint cp = interpolate_coupler(table, wavelength_um);
  return transfer_from_profiles(unit, wavelength_um, cp, config, table.etch_offset_nm);
}

namespace detail {

EvalSetup EvalSetup::prepare(const DeviceState& device, std::span<const double> lambdas_um) {
  device.validate();
  EvalSetup es;
  es.quad = TaperQuadrature::build(device.config.sample_count, device.config.interior_widths);
  es.table = build_coupler_table(device.etch_offset_nm, device.config.coupler, device.config.neff);
  es.lambdas_um.assign(lambdas_um.begin(), lambdas_um.end());
  es.coupler.reserve(es.lambdas_um.size());
  for (double l : es.lambdas_um) es.coupler.push_back(interpolate_coupler(es.table, l));
  return es;
}

}  // namespace detail

ComplexMatrix network_scatter(const DeviceState& device, double wavelength_um) {
  const double lambda[1] = {wavelength_um};
  const detail::EvalSetup es = detail::EvalSetup::prepare(device, lambda);
  const detail::ClampedDevice<double> cd =
      detail::clamp_device<double>(device, device.params, nullptr);
  const ad::CxMatrix<double> s = detail::scatter_t<double>(device, es, cd, 0, nullptr);

  ComplexMatrix out(device.topology.ports);
  for (int i = 0; i < out.n; ++i) {
    for (int j = 0; j < out.n; ++j) out.at(i, j) = {s(i, j).re, s(i, j).im};
  }
  return out;
}

ComplexMatrix layer_matrix(const DeviceState& device, int layer, double wavelength_um) {
  device.validate();
  if (layer < 1 || layer > device.topology.layers) {
    throw std::invalid_argument("layer index out of range");
  }
  const double lambda[1] = {wavelength_um};
  const detail::EvalSetup es = detail::EvalSetup::prepare(device, lambda);
  const detail::ClampedDevice<double> cd =
      detail::clamp_device<double>(device, device.params, nullptr);

  ComplexMatrix out(device.topology.ports);
  for (int i = 0; i < out.n; ++i) out.at(i, i) = 1.0;
  for (int u = 0; u < device.topology.unit_count(); ++u) {
    if (device.topology.units[u].layer != layer) continue;
    const ad::Block2<double> block =
        detail::unit_block<double>(device.config, cd, u, wavelength_um, es.coupler[0], es.quad,
                                   nullptr);
    const int p = device.topology.units[u].top_port;
    out.at(p, p) = {block[0].re, block[0].im};
    out.at(p, p + 1) = {block[1].re, block[1].im};
    out.at(p + 1, p) = {block[2].re, block[2].im};
    out.at(p + 1, p + 1) = {block[3].re, block[3].im};
  }
  return out;
}

std::vector<std::vector<double>> simulate_spectrum(const DeviceState& device,
                                                   std::span<const double> wavelengths_um,
                                                   int input_port, ClampStats* stats) {
  device.validate();
  if (input_port < 0 || input_port >= device.topology.ports) {
    throw std::invalid_argument("input port out of range");
  }
  const detail::EvalSetup es = detail::EvalSetup::prepare(device, wavelengths_um);
  const detail::ClampedDevice<double> cd =
      detail::clamp_device<double>(device, device.params, stats);

  std::vector<std::vector<double>> result(wavelengths_um.size());
  for (std::size_t q = 0; q < wavelengths_um.size(); ++q) {
    const ad::CxMatrix<double> s = detail::scatter_t<double>(device, es, cd, q, stats);
    result[q].resize(device.topology.ports);
    for (int k = 0; k < device.topology.ports; ++k) {
      result[q][k] = ad::norm2(s(k, input_port));
    }
  }
  return result;
}

std::vector<std::vector<double>> simulate_spectrum(const DeviceState& device,
                                                   std::span<const double> wavelengths_um) {
  return simulate_spectrum(device, wavelengths_um, device.default_input_port(), nullptr);
}

}  // namespace mzmesh
