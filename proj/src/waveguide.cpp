#include "mzmesh/waveguide.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace mzmesh {

namespace {

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) {
    throw std::invalid_argument(std::string(what) + " must be finite");
  }
}

}  // namespace

double effective_index(double width_um, double wavelength_um, const EffectiveIndexModel& model,
                       ClampStats* stats) {
  require_finite(width_um, "width");
  require_finite(wavelength_um, "wavelength");
  return effective_index_t<double>(width_um, wavelength_um, model, stats);
}

TaperQuadrature TaperQuadrature::build(int sample_count, int interior_count) {
  if (sample_count < 2) throw std::invalid_argument("sample_count must be at least 2");
  if (interior_count < 0) throw std::invalid_argument("interior_count must be non-negative");

  const int segments = interior_count + 1;
  std::vector<double> u;
  u.reserve(static_cast<std::size_t>(sample_count) + interior_count);
  for (int k = 0; k < sample_count; ++k) {
    u.push_back(static_cast<double>(k) / (sample_count - 1));
  }
  for (int i = 1; i < segments; ++i) {
    u.push_back(static_cast<double>(i) / segments);
  }
  std::sort(u.begin(), u.end());
  u.erase(std::unique(u.begin(), u.end()), u.end());

  TaperQuadrature q;
  const std::size_t n = u.size();
  q.weight.resize(n);
  q.segment.resize(n);
  q.fraction.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double left = (k == 0) ? u[0] : u[k - 1];
    const double right = (k + 1 == n) ? u[n - 1] : u[k + 1];
    q.weight[k] = 0.5 * (right - left);
    const double scaled = u[k] * segments;
    int seg = std::min(static_cast<int>(scaled), segments - 1);
    q.segment[k] = seg;
    q.fraction[k] = scaled - seg;
  }
  return q;
}

double taper_phase(const TaperProfile& profile, double wavelength_um,
                   const EffectiveIndexModel& model, ClampStats* stats) {
  require_finite(wavelength_um, "wavelength");
  require_finite(profile.length_um, "taper length");
  require_finite(profile.end_width_um, "end width");
  for (double w : profile.interior_widths_um) require_finite(w, "interior width");
  if (profile.length_um <= 0.0) throw std::invalid_argument("taper length must be positive");
  if (profile.pad_length_um() < 0.0) {
    throw std::invalid_argument("taper length exceeds max_length_um");
  }

  std::vector<double> control;
  control.reserve(profile.interior_widths_um.size() + 2);
  control.push_back(profile.end_width_um);
  control.insert(control.end(), profile.interior_widths_um.begin(),
                 profile.interior_widths_um.end());
  control.push_back(profile.end_width_um);

  const TaperQuadrature quad = TaperQuadrature::build(
      profile.sample_count, static_cast<int>(profile.interior_widths_um.size()));
  return taper_phase_t<double>(control, profile.length_um, profile.pad_length_um(), wavelength_um,
                               model, quad, stats);
}

CouplerPoint coupler_response(double wavelength_um, double etch_offset_nm,
                              const CouplerModel& coupler, const EffectiveIndexModel& neff) {
  require_finite(wavelength_um, "wavelength");
  require_finite(etch_offset_nm, "etch offset");
  if (wavelength_um < coupler.wavelength_min_um || wavelength_um > coupler.wavelength_max_um) {
    throw std::invalid_argument("wavelength outside the coupler model range");
  }
  if (etch_offset_nm < coupler.etch_min_nm || etch_offset_nm > coupler.etch_max_nm) {
    throw std::invalid_argument("etch offset outside the coupler model range");
  }

  constexpr double pi = 3.14159265358979323846;
  const double angle = (pi / 4.0) *
                       (1.0 + coupler.wavelength_slope_per_um *
                                  (wavelength_um - coupler.anchor_wavelength_um) +
                        coupler.etch_slope_per_nm * etch_offset_nm);
  const double a = coupler.amplitude();

  CouplerPoint p;
  p.through = a * std::cos(angle);
  p.cross = a * std::sin(angle);
  const double width = coupler.waveguide_width_um + etch_offset_nm * 1e-3;
  p.phase = (2.0 * pi / wavelength_um) * effective_index(width, wavelength_um, neff) *
            coupler.section_length_um;
  return p;
}

CouplerSpectrum build_coupler_table(double etch_offset_nm, const CouplerModel& coupler,
                                    const EffectiveIndexModel& neff) {
  CouplerSpectrum table;
  table.etch_offset_nm = etch_offset_nm;
  const int n = coupler.table_points;
  table.wavelength_um.resize(n);
  table.points.resize(n);
  for (int i = 0; i < n; ++i) {
    const double l = coupler.wavelength_min_um +
                     (coupler.wavelength_max_um - coupler.wavelength_min_um) * i / (n - 1);
    table.wavelength_um[i] = l;
    table.points[i] = coupler_response(l, etch_offset_nm, coupler, neff);
  }
  return table;
}

CouplerPoint interpolate_coupler(const CouplerSpectrum& table, double wavelength_um) {
  const auto& grid = table.wavelength_um;
  if (grid.size() < 2) throw std::invalid_argument("coupler table needs at least two nodes");
  if (wavelength_um < grid.front() || wavelength_um > grid.back()) {
    throw std::out_of_range("wavelength outside the coupler table");
  }
  auto hi = std::upper_bound(grid.begin(), grid.end(), wavelength_um);
  std::size_t i1 = std::min<std::size_t>(hi - grid.begin(), grid.size() - 1);
  if (i1 == 0) i1 = 1;
  const std::size_t i0 = i1 - 1;
  const double span = grid[i1] - grid[i0];
  const double t = (wavelength_um - grid[i0]) / span;
  const CouplerPoint& a = table.points[i0];
  const CouplerPoint& b = table.points[i1];
  CouplerPoint out;
  out.through = a.through + t * (b.through - a.through);
  out.cross = a.cross + t * (b.cross - a.cross);
  out.phase = a.phase + t * (b.phase - a.phase);
  return out;
}

void write_coupler_csv(const CouplerSpectrum& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "wavelength_um,t,q,phi_rad\n";
  char buf[160];
  for (std::size_t i = 0; i < table.wavelength_um.size(); ++i) {
    const CouplerPoint& p = table.points[i];
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", table.wavelength_um[i], p.through,
                  p.cross, p.phase);
    out << buf;
  }
}

CouplerSpectrum read_coupler_csv(const std::filesystem::path& path, double etch_offset_nm) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty coupler csv: " + path.string());
  if (line != "wavelength_um,t,q,phi_rad") {
    throw std::runtime_error("unexpected coupler csv header in " + path.string());
  }
  CouplerSpectrum table;
  table.etch_offset_nm = etch_offset_nm;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    double values[4];
    for (int f = 0; f < 4; ++f) {
      if (!std::getline(row, field, ',')) {
        throw std::runtime_error("short row in coupler csv: " + line);
      }
      values[f] = std::stod(field);
    }
    table.wavelength_um.push_back(values[0]);
    table.points.push_back(CouplerPoint{values[1], values[2], values[3]});
  }
  if (table.wavelength_um.size() < 2) {
    throw std::runtime_error("coupler csv has fewer than two rows: " + path.string());
  }
  return table;
}

}  // namespace mzmesh
