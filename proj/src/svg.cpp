#include "mzmesh/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace mzmesh {

namespace {

constexpr double kWidth = 960.0;
constexpr double kHeight = 600.0;
constexpr double kLeft = 90.0;
constexpr double kRight = 40.0;
constexpr double kTop = 60.0;
constexpr double kBottom = 70.0;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  double span() const { return hi - lo; }
};

// Round the range outward to tick-friendly limits.
Axis nice_axis(double lo, double hi) {
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double raw_step = (hi - lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw_step)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw_step <= m * mag) {
      step = m * mag;
      break;
    }
  }
  Axis a;
  a.lo = std::floor(lo / step) * step;
  a.hi = std::ceil(hi / step) * step;
  return a;
}

std::vector<double> linear_ticks(const Axis& a) {
  std::vector<double> ticks;
  const double step = a.span() / 5.0;
  for (int i = 0; i <= 5; ++i) ticks.push_back(a.lo + step * i);
  return ticks;
}

}  // namespace

void write_svg_chart(const std::filesystem::path& path, const SvgChart& chart) {
  if (chart.x.empty() || chart.series.empty()) {
    throw std::invalid_argument("chart needs x values and at least one series");
  }
  for (const SvgSeries& s : chart.series) {
    if (s.y.size() != chart.x.size()) {
      throw std::invalid_argument("series '" + s.label + "' length does not match x");
    }
  }

  const auto [xmin_it, xmax_it] = std::minmax_element(chart.x.begin(), chart.x.end());
  Axis xa = nice_axis(*xmin_it, *xmax_it);

  double ylo = std::numeric_limits<double>::infinity();
  double yhi = -std::numeric_limits<double>::infinity();
  const auto y_value = [&chart](double y) {
    return chart.log_y ? std::log10(std::max(y, 1e-30)) : y;
  };
  for (const SvgSeries& s : chart.series) {
    for (double y : s.y) {
      const double v = y_value(y);
      ylo = std::min(ylo, v);
      yhi = std::max(yhi, v);
    }
  }
  Axis ya;
  std::vector<double> yticks;
  if (chart.log_y) {
    ya.lo = std::floor(ylo);
    ya.hi = std::ceil(yhi);
    if (ya.lo == ya.hi) ya.hi += 1.0;
    for (double d = ya.lo; d <= ya.hi + 0.5; d += std::max(1.0, std::round(ya.span() / 6.0))) {
      yticks.push_back(d);
    }
  } else {
    ya = nice_axis(ylo, yhi);
    yticks = linear_ticks(ya);
  }

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const auto px = [&](double x) { return kLeft + (x - xa.lo) / xa.span() * plot_w; };
  const auto py = [&](double y) { return kTop + plot_h - (y_value(y) - ya.lo) / ya.span() * plot_h; };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n"
      << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"30\" text-anchor=\"middle\" font-size=\"20\" "
      << "font-family=\"sans-serif\">" << chart.title << "</text>\n";

  // frame and grid
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\""
      << plot_h << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : linear_ticks(xa)) {
    const double x = px(t);
    out << "<line x1=\"" << x << "\" y1=\"" << kTop << "\" x2=\"" << x << "\" y2=\""
        << kTop + plot_h << "\" stroke=\"#dddddd\"/>\n"
        << "<text x=\"" << x << "\" y=\"" << kTop + plot_h + 22
        << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">" << num(t)
        << "</text>\n";
  }
  for (double t : yticks) {
    const double y = kTop + plot_h - (t - ya.lo) / ya.span() * plot_h;
    const std::string label = chart.log_y ? ("1e" + num(t)) : num(t);
    out << "<line x1=\"" << kLeft << "\" y1=\"" << y << "\" x2=\"" << kLeft + plot_w << "\" y2=\""
        << y << "\" stroke=\"#dddddd\"/>\n"
        << "<text x=\"" << kLeft - 8 << "\" y=\"" << y + 4
        << "\" text-anchor=\"end\" font-size=\"13\" font-family=\"sans-serif\">" << label
        << "</text>\n";
  }

  out << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 18
      << "\" text-anchor=\"middle\" font-size=\"15\" font-family=\"sans-serif\">" << chart.x_label
      << "</text>\n"
      << "<text x=\"24\" y=\"" << kTop + plot_h / 2
      << "\" text-anchor=\"middle\" font-size=\"15\" font-family=\"sans-serif\" transform=\"rotate(-90 24 "
      << kTop + plot_h / 2 << ")\">" << chart.y_label << "</text>\n";

  for (std::size_t s = 0; s < chart.series.size(); ++s) {
    const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < chart.x.size(); ++i) {
      out << num(px(chart.x[i])) << "," << num(py(chart.series[s].y[i])) << " ";
    }
    out << "\"/>\n";
    const double ly = kTop + 16 + 20.0 * s;
    out << "<line x1=\"" << kLeft + plot_w - 150 << "\" y1=\"" << ly << "\" x2=\""
        << kLeft + plot_w - 120 << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << kLeft + plot_w - 112 << "\" y=\"" << ly + 4
        << "\" font-size=\"13\" font-family=\"sans-serif\">" << chart.series[s].label
        << "</text>\n";
  }
  out << "</svg>\n";
}

void write_spectrum_svg(const std::filesystem::path& path, std::span<const double> wavelengths_nm,
                        const std::vector<std::vector<double>>& transmission) {
  if (transmission.empty()) throw std::invalid_argument("empty spectrum");
  SvgChart chart;
  chart.title = "Transmission spectrum";
  chart.x_label = "wavelength (nm)";
  chart.y_label = "transmission";
  chart.x.assign(wavelengths_nm.begin(), wavelengths_nm.end());
  const std::size_t ports = transmission.front().size();
  for (std::size_t k = 0; k < ports; ++k) {
    SvgSeries series;
    series.label = "out_" + std::to_string(k + 1);
    series.y.reserve(transmission.size());
    for (const auto& row : transmission) series.y.push_back(row[k]);
    chart.series.push_back(std::move(series));
  }
  write_svg_chart(path, chart);
}

void write_trace_svg(const std::filesystem::path& path, std::span<const TracePoint> points) {
  if (points.empty()) throw std::invalid_argument("empty trace");
  SvgChart chart;
  chart.title = "Objective versus iteration";
  chart.x_label = "iteration";
  chart.y_label = "J";
  chart.log_y = true;
  SvgSeries series;
  series.label = "J";
  for (const TracePoint& p : points) {
    chart.x.push_back(static_cast<double>(p.iter));
    series.y.push_back(p.objective);
  }
  chart.series.push_back(std::move(series));
  write_svg_chart(path, chart);
}

}  // namespace mzmesh
