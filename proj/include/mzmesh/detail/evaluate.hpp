#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "mzmesh/complexmat.hpp"
#include "mzmesh/mesh.hpp"
#include "mzmesh/objective.hpp"

// Generic evaluation pipeline shared by the plain simulation path
// (T = double) and the gradient engine (T = ad::Rev). Both paths execute the
// same arithmetic in the same order, so simulated spectra and taped objective
// values agree bit for bit.
namespace mzmesh::detail {

// Immutable per-evaluation context: the coupler table for the device's etch
// offset, its interpolation at every grid wavelength, and the taper
// quadrature grid.
struct EvalSetup {
  TaperQuadrature quad;
  CouplerSpectrum table;
  std::vector<double> lambdas_um;
  std::vector<CouplerPoint> coupler;

  static EvalSetup prepare(const DeviceState& device, std::span<const double> lambdas_um);
};

// Feasibility clamp with pass-through at the exact boundary; values strictly
// outside become constants, so no derivative flows through the clamp.
template <class T>
T clamp_to(const T& x, double lo, double hi, ClampStats* stats) {
  const double v = ad::value_of(x);
  if (v < lo) {
    if (stats) ++stats->bound_events;
    return T(lo);
  }
  if (v > hi) {
    if (stats) ++stats->bound_events;
    return T(hi);
  }
  return x;
}

// Clamped parameters arranged for evaluation. Control widths carry the etch
// shift; `widths` keeps the unshifted clamped trainables for the regularizer.
template <class T>
struct ClampedDevice {
  int control_stride = 0;
  std::vector<T> controls;  // (units*4) tapers x (xi+2) control widths, shifted
  std::vector<T> lengths;   // (units*4)
  std::vector<T> pads;      // (units*4)
  std::vector<T> widths;    // (units*4*xi) clamped trainable widths, unshifted
};

template <class T>
ClampedDevice<T> clamp_device(const DeviceState& dev, std::span<const T> raw, ClampStats* stats) {
  const MeshConfig& cfg = dev.config;
  const int xi = cfg.interior_widths;
  const int tapers = dev.topology.unit_count() * 4;
  const double shift_um = dev.etch_offset_nm * 1e-3;
  const T end_width = T(cfg.default_width_um + shift_um);

  ClampedDevice<T> cd;
  cd.control_stride = xi + 2;
  cd.controls.reserve(static_cast<std::size_t>(tapers) * (xi + 2));
  cd.lengths.reserve(tapers);
  cd.pads.reserve(tapers);
  cd.widths.reserve(static_cast<std::size_t>(tapers) * xi);

  std::size_t p = 0;
  for (int t = 0; t < tapers; ++t) {
    cd.controls.push_back(end_width);
    for (int i = 0; i < xi; ++i) {
      const T w = clamp_to(raw[p++], cfg.bounds.width_min_um, cfg.bounds.width_max_um, stats);
      cd.widths.push_back(w);
      cd.controls.push_back(shift_um == 0.0 ? w : w + T(shift_um));
    }
    cd.controls.push_back(end_width);
    const T len = clamp_to(raw[p++], cfg.bounds.length_min_um, cfg.bounds.length_max_um, stats);
    cd.lengths.push_back(len);
    cd.pads.push_back(T(cfg.bounds.length_max_um) - len);
  }
  return cd;
}

// Transfer block of one interferometer at one wavelength. Coupler values are
// plain data; only the four taper phases depend on trainable parameters.
template <class T>
ad::Block2<T> unit_block(const MeshConfig& cfg, const ClampedDevice<T>& cd, int unit,
                         double lambda_um, const CouplerPoint& cp, const TaperQuadrature& quad,
                         ClampStats* stats) {
  using ad::Cx;
  const int stride = cd.control_stride;
  std::array<Cx<T>, 4> d;
  for (int t = 0; t < 4; ++t) {
    const int g = unit * 4 + t;
    const std::span<const T> controls(cd.controls.data() + static_cast<std::size_t>(g) * stride,
                                      static_cast<std::size_t>(stride));
    const T theta = taper_phase_t<T>(controls, cd.lengths[g], cd.pads[g], lambda_um, cfg.neff,
                                     quad, stats);
    d[t] = ad::expmj(theta);
  }

  const auto scale_t = [&cp](const Cx<T>& z) { return Cx<T>{T(cp.through) * z.re, T(cp.through) * z.im}; };
  const auto scale_mjq = [&cp](const Cx<T>& z) { return Cx<T>{T(cp.cross) * z.im, T(-cp.cross) * z.re}; };

  // A = C D(input), B = C D(mid) with C = [t, -jq; -jq, t]
  const ad::Block2<T> a{scale_t(d[0]), scale_mjq(d[1]), scale_mjq(d[0]), scale_t(d[1])};
  const ad::Block2<T> b{scale_t(d[2]), scale_mjq(d[3]), scale_mjq(d[2]), scale_t(d[3])};

  // the input pair acts first: T = B A up to the common coupler phase
  const ad::Block2<T> prod{b[0] * a[0] + b[1] * a[2], b[0] * a[1] + b[1] * a[3],
                           b[2] * a[0] + b[3] * a[2], b[2] * a[1] + b[3] * a[3]};

  // both coupler passes contribute the common phase factor e^{-j 2 phi}
  const double c2 = std::cos(2.0 * cp.phase);
  const double s2 = -std::sin(2.0 * cp.phase);
  ad::Block2<T> out;
  for (int i = 0; i < 4; ++i) {
    out[i] = Cx<T>{T(c2) * prod[i].re - T(s2) * prod[i].im,
                   T(c2) * prod[i].im + T(s2) * prod[i].re};
  }
  return out;
}

// Scattering matrix at grid index q: layers applied input-to-output, each
// block left-multiplying the accumulated product.
template <class T>
ad::CxMatrix<T> scatter_t(const DeviceState& dev, const EvalSetup& es, const ClampedDevice<T>& cd,
                          std::size_t lambda_index, ClampStats* stats) {
  const double lambda_um = es.lambdas_um[lambda_index];
  const CouplerPoint& cp = es.coupler[lambda_index];
  ad::CxMatrix<T> s = ad::CxMatrix<T>::identity(dev.topology.ports);
  for (int u = 0; u < dev.topology.unit_count(); ++u) {
    const ad::Block2<T> block = unit_block(dev.config, cd, u, lambda_um, cp, es.quad, stats);
    ad::apply_block_left(s, dev.topology.units[u].top_port, block);
  }
  return s;
}

// P = alpha1 sum (w_i - w_{i+1})^2 + alpha2 sum (w_i - w_ref)^2 over the
// clamped, unshifted trainable widths of every taper (micrometer units).
template <class T>
T penalty_t(const ClampedDevice<T>& cd, int xi, double alpha1, double alpha2, double w_ref_um) {
  T p1 = T(0.0);
  T p2 = T(0.0);
  const int tapers = static_cast<int>(cd.lengths.size());
  for (int t = 0; t < tapers; ++t) {
    const T* w = cd.widths.data() + static_cast<std::size_t>(t) * xi;
    for (int i = 0; i + 1 < xi; ++i) {
      const T d = w[i] - w[i + 1];
      p1 += d * d;
    }
    for (int i = 0; i < xi; ++i) {
      const T d = w[i] - T(w_ref_um);
      p2 += d * d;
    }
  }
  return T(alpha1) * p1 + T(alpha2) * p2;
}

// Error contribution of one grid wavelength: sum_outputs of the squared
// deviation between the decayed transmission and its target.
template <class T>
T wavelength_error(const DeviceState& dev, const DesignObjective& obj, const EvalSetup& es,
                   const ClampedDevice<T>& cd, const T& decay, std::size_t lambda_index,
                   ClampStats* stats) {
  const int ports = dev.topology.ports;
  const int input = obj.input_port < 0 ? dev.default_input_port() : obj.input_port;
  const ad::CxMatrix<T> s = scatter_t(dev, es, cd, lambda_index, stats);
  T contrib = T(0.0);
  for (int k = 0; k < ports; ++k) {
    const T trans = ad::norm2(s(k, input));
    const T diff = trans * decay - T(obj.targets[lambda_index][k]);
    contrib += diff * diff;
  }
  return contrib;
}

// J = (1/Q) sum_lambda sum_outputs |T_k(lambda) e^{-P} - target_k(lambda)|^2,
// accumulated per wavelength in grid order.
template <class T>
T objective_value(const DeviceState& dev, const DesignObjective& obj, const EvalSetup& es,
                  std::span<const T> raw_params, ClampStats* stats, T* penalty_out) {
  using std::exp;
  const ClampedDevice<T> cd = clamp_device(dev, raw_params, stats);
  const T penalty = penalty_t(cd, dev.config.interior_widths, obj.alpha1, obj.alpha2,
                              obj.reference_width_nm * 1e-3);
  if (penalty_out) *penalty_out = penalty;
  const T decay = exp(-penalty);

  const std::size_t q_count = es.lambdas_um.size();
  T acc = T(0.0);
  for (std::size_t q = 0; q < q_count; ++q) {
    acc += wavelength_error(dev, obj, es, cd, decay, q, stats);
  }
  return acc / T(static_cast<double>(q_count));
}

}  // namespace mzmesh::detail
