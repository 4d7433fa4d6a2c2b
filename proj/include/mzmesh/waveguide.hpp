#pragma once

#include <cmath>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "mzmesh/autodiff.hpp"

namespace mzmesh {

// Counts of how often evaluations had to clamp a value back into a valid
// range. domain_events: width/wavelength pushed onto the effective-index
// model domain; bound_events: trainable parameters pushed onto their
// feasibility interval.
struct ClampStats {
  long long domain_events = 0;
  long long bound_events = 0;
};

// Bilinear surrogate for the guided-mode effective index of a strip
// waveguide, n(w, lambda) = base + sw*(w-w0) + sl*(l-l0) + cx*(w-w0)*(l-l0).
// Coefficients are data: swapping in a different fit keeps every consumer
// unchanged. The defaults increase with width, decrease with wavelength and
// stay strictly between the cladding and core bulk indices on the domain.
struct EffectiveIndexModel {
  double base = 2.45;
  double width_slope = 1.20;        // per um
  double wavelength_slope = -1.80;  // per um
  double cross_term = -0.60;        // per um^2
  double anchor_width_um = 0.45;
  double anchor_wavelength_um = 1.55;
  double width_min_um = 0.30;
  double width_max_um = 0.70;
  double wavelength_min_um = 1.20;
  double wavelength_max_um = 1.70;
};

template <class T>
T effective_index_t(T width_um, double wavelength_um, const EffectiveIndexModel& m,
                    ClampStats* stats = nullptr) {
  double l = wavelength_um;
  if (l < m.wavelength_min_um) {
    l = m.wavelength_min_um;
    if (stats) ++stats->domain_events;
  } else if (l > m.wavelength_max_um) {
    l = m.wavelength_max_um;
    if (stats) ++stats->domain_events;
  }
  const double w = ad::value_of(width_um);
  if (w < m.width_min_um) {
    width_um = T(m.width_min_um);
    if (stats) ++stats->domain_events;
  } else if (w > m.width_max_um) {
    width_um = T(m.width_max_um);
    if (stats) ++stats->domain_events;
  }
  const double dl = l - m.anchor_wavelength_um;
  const T dw = width_um - T(m.anchor_width_um);
  return T(m.base + m.wavelength_slope * dl) + T(m.width_slope + m.cross_term * dl) * dw;
}

// Throws std::invalid_argument on non-finite input; out-of-domain values are
// clamped and counted instead, because optimizer iterates may briefly leave
// the domain before clipping.
double effective_index(double width_um, double wavelength_um,
                       const EffectiveIndexModel& model = {}, ClampStats* stats = nullptr);

// One custom waveguide taper: fixed end widths, trainable interior widths
// sampled at equally spaced axial positions, trainable length, and a derived
// straight pad that tops the taper up to max_length_um.
struct TaperProfile {
  double end_width_um = 0.45;
  std::vector<double> interior_widths_um;
  double length_um = 10.0;
  double max_length_um = 10.0;
  int sample_count = 201;

  double pad_length_um() const { return max_length_um - length_um; }
};

// Trapezoid rule over the normalized taper coordinate u in [0, 1]. The grid
// is the uniform sample_count grid merged with the profile breakpoints, which
// makes the rule exact whenever the integrand is affine within each width
// segment (the default index model is affine in width at fixed wavelength).
struct TaperQuadrature {
  std::vector<double> weight;    // sums to 1
  std::vector<int> segment;      // control segment of each node
  std::vector<double> fraction;  // position of each node within its segment

  static TaperQuadrature build(int sample_count, int interior_count);
};

// Accumulated phase of a piecewise-linear width profile followed by a
// straight pad at the end width:
//   theta = (2 pi / lambda) * (L * sum_k weight_k n(w(u_k)) + pad * n(w_end))
template <class T>
T taper_phase_t(std::span<const T> control_widths_um, T length_um, T pad_length_um,
                double wavelength_um, const EffectiveIndexModel& m, const TaperQuadrature& quad,
                ClampStats* stats = nullptr) {
  const int segments = static_cast<int>(control_widths_um.size()) - 1;
  std::vector<T> delta(segments);
  for (int s = 0; s < segments; ++s) delta[s] = control_widths_um[s + 1] - control_widths_um[s];

  T acc = T(0.0);
  const std::size_t nodes = quad.weight.size();
  for (std::size_t k = 0; k < nodes; ++k) {
    const int seg = quad.segment[k];
    const T w = control_widths_um[seg] + T(quad.fraction[k]) * delta[seg];
    acc += T(quad.weight[k]) * effective_index_t(w, wavelength_um, m, stats);
  }
  const T optical_path =
      length_um * acc + pad_length_um * effective_index_t(control_widths_um[0], wavelength_um, m, stats);
  constexpr double two_pi = 6.283185307179586476925286766559;
  return T(two_pi / wavelength_um) * optical_path;
}

double taper_phase(const TaperProfile& profile, double wavelength_um,
                   const EffectiveIndexModel& model = {}, ClampStats* stats = nullptr);

// Directional coupler response at one wavelength: through amplitude t, cross
// amplitude q and the common phase accumulated across the coupler.
struct CouplerPoint {
  double through = 0.0;
  double cross = 0.0;
  double phase = 0.0;
};

// Coupled-mode surrogate for the fixed directional coupler. The coupling
// angle is (pi/4) * (1 + s*(lambda - l0) + g*dw), which crosses an exact 50%
// split at the anchor wavelength for zero etch offset; a flat insertion loss
// scales both amplitudes.
struct CouplerModel {
  double wavelength_slope_per_um = 2.0;
  double etch_slope_per_nm = -0.004;
  double insertion_loss_db = 0.02;
  double section_length_um = 30.0;
  double waveguide_width_um = 0.45;
  double anchor_wavelength_um = 1.55;
  double wavelength_min_um = 1.20;
  double wavelength_max_um = 1.70;
  int table_points = 1000;
  double etch_min_nm = -20.0;
  double etch_max_nm = 20.0;

  double amplitude() const { return std::pow(10.0, -insertion_loss_db / 20.0); }
};

CouplerPoint coupler_response(double wavelength_um, double etch_offset_nm,
                              const CouplerModel& coupler = {},
                              const EffectiveIndexModel& neff = {});

// Tabulated coupler response on a uniform wavelength grid, linearly
// interpolated between nodes. The table is plain data for the gradient
// engine: nothing trainable feeds it.
struct CouplerSpectrum {
  std::vector<double> wavelength_um;
  std::vector<CouplerPoint> points;
  double etch_offset_nm = 0.0;
};

CouplerSpectrum build_coupler_table(double etch_offset_nm, const CouplerModel& coupler = {},
                                    const EffectiveIndexModel& neff = {});

// Componentwise linear interpolation; exact at grid nodes. Throws
// std::out_of_range for wavelengths outside the table.
CouplerPoint interpolate_coupler(const CouplerSpectrum& table, double wavelength_um);

// CSV interchange: header "wavelength_um,t,q,phi_rad", one row per node,
// 17 significant digits so values survive a round trip.
void write_coupler_csv(const CouplerSpectrum& table, const std::filesystem::path& path);
CouplerSpectrum read_coupler_csv(const std::filesystem::path& path, double etch_offset_nm = 0.0);

}  // namespace mzmesh
