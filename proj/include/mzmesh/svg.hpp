#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mzmesh/optimizer.hpp"

namespace mzmesh {

// Static SVG 1.1 line charts, one polyline per series.

struct SvgSeries {
  std::string label;
  std::vector<double> y;
};

struct SvgChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<double> x;
  std::vector<SvgSeries> series;
  bool log_y = false;
};

void write_svg_chart(const std::filesystem::path& path, const SvgChart& chart);

// Transmission of every output over wavelength.
void write_spectrum_svg(const std::filesystem::path& path, std::span<const double> wavelengths_nm,
                        const std::vector<std::vector<double>>& transmission);

// Objective versus iteration, log scale.
void write_trace_svg(const std::filesystem::path& path, std::span<const TracePoint> points);

}  // namespace mzmesh
