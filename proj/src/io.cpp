#include "mzmesh/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace mzmesh {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream stream(line);
  std::string item;
  while (std::getline(stream, item, ',')) fields.push_back(item);
  return fields;
}

}  // namespace

void write_spectrum_csv(const std::filesystem::path& path, std::span<const double> wavelengths_nm,
                        const std::vector<std::vector<double>>& transmission) {
  if (wavelengths_nm.size() != transmission.size()) {
    throw std::invalid_argument("wavelength and transmission row counts differ");
  }
  std::ofstream out = open_out(path);
  const std::size_t ports = transmission.empty() ? 0 : transmission.front().size();
  out << "wavelength_nm";
  for (std::size_t k = 0; k < ports; ++k) out << ",out_" << (k + 1);
  out << "\n";
  for (std::size_t q = 0; q < wavelengths_nm.size(); ++q) {
    out << num(wavelengths_nm[q]);
    for (double t : transmission[q]) out << "," << num(t);
    out << "\n";
  }
}

SpectrumData read_spectrum_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty spectrum csv: " + path.string());
  const std::size_t ports = split_csv_row(line).size() - 1;

  SpectrumData data;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_row(line);
    if (fields.size() != ports + 1) {
      throw std::runtime_error("inconsistent column count in " + path.string());
    }
    data.wavelengths_nm.push_back(std::stod(fields[0]));
    std::vector<double> row(ports);
    for (std::size_t k = 0; k < ports; ++k) row[k] = std::stod(fields[k + 1]);
    data.transmission.push_back(std::move(row));
  }
  return data;
}

namespace {

std::string trace_line(const TracePoint& p, bool with_wall) {
  std::string line = "{\"iter\":" + std::to_string(p.iter) + ",\"J\":" + num(p.objective) +
                     ",\"P\":" + num(p.penalty) + ",\"lr\":" + num(p.learning_rate);
  if (with_wall) line += ",\"wall_ms\":" + num(p.wall_ms);
  line += "}";
  return line;
}

}  // namespace

void write_trace_jsonl(const std::filesystem::path& path, const OptimizationTrace& trace) {
  std::ofstream out = open_out(path);
  for (const TracePoint& p : trace.points) out << trace_line(p, true) << "\n";
}

std::vector<TracePoint> read_trace_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<TracePoint> points;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    TracePoint p;
    p.iter = j.at("iter").get<std::size_t>();
    p.objective = j.at("J").get<double>();
    p.penalty = j.at("P").get<double>();
    p.learning_rate = j.at("lr").get<double>();
    p.wall_ms = j.value("wall_ms", 0.0);
    points.push_back(p);
  }
  return points;
}

namespace {

json neff_json(const EffectiveIndexModel& m) {
  return json{{"base", m.base},
              {"width_slope", m.width_slope},
              {"wavelength_slope", m.wavelength_slope},
              {"cross_term", m.cross_term},
              {"anchor_width_um", m.anchor_width_um},
              {"anchor_wavelength_um", m.anchor_wavelength_um},
              {"width_min_um", m.width_min_um},
              {"width_max_um", m.width_max_um},
              {"wavelength_min_um", m.wavelength_min_um},
              {"wavelength_max_um", m.wavelength_max_um}};
}

void neff_from_json(const json& j, EffectiveIndexModel& m) {
  m.base = j.at("base");
  m.width_slope = j.at("width_slope");
  m.wavelength_slope = j.at("wavelength_slope");
  m.cross_term = j.at("cross_term");
  m.anchor_width_um = j.at("anchor_width_um");
  m.anchor_wavelength_um = j.at("anchor_wavelength_um");
  m.width_min_um = j.at("width_min_um");
  m.width_max_um = j.at("width_max_um");
  m.wavelength_min_um = j.at("wavelength_min_um");
  m.wavelength_max_um = j.at("wavelength_max_um");
}

json coupler_json(const CouplerModel& c) {
  return json{{"wavelength_slope_per_um", c.wavelength_slope_per_um},
              {"etch_slope_per_nm", c.etch_slope_per_nm},
              {"insertion_loss_db", c.insertion_loss_db},
              {"section_length_um", c.section_length_um},
              {"waveguide_width_um", c.waveguide_width_um},
              {"anchor_wavelength_um", c.anchor_wavelength_um},
              {"wavelength_min_um", c.wavelength_min_um},
              {"wavelength_max_um", c.wavelength_max_um},
              {"table_points", c.table_points},
              {"etch_min_nm", c.etch_min_nm},
              {"etch_max_nm", c.etch_max_nm}};
}

void coupler_from_json(const json& j, CouplerModel& c) {
  c.wavelength_slope_per_um = j.at("wavelength_slope_per_um");
  c.etch_slope_per_nm = j.at("etch_slope_per_nm");
  c.insertion_loss_db = j.at("insertion_loss_db");
  c.section_length_um = j.at("section_length_um");
  c.waveguide_width_um = j.at("waveguide_width_um");
  c.anchor_wavelength_um = j.at("anchor_wavelength_um");
  c.wavelength_min_um = j.at("wavelength_min_um");
  c.wavelength_max_um = j.at("wavelength_max_um");
  c.table_points = j.at("table_points");
  c.etch_min_nm = j.at("etch_min_nm");
  c.etch_max_nm = j.at("etch_max_nm");
}

constexpr const char* kTaperNames[4] = {"input_top", "input_bottom", "mid_top", "mid_bottom"};

}  // namespace

void write_geometry_json(const std::filesystem::path& path, const DeviceState& device) {
  device.validate();
  const MeshConfig& cfg = device.config;

  json doc;
  doc["format"] = "mzmesh-geometry";
  doc["version"] = 1;
  doc["ports"] = device.topology.ports;
  doc["layers"] = device.topology.layers;
  doc["interior_widths"] = cfg.interior_widths;
  doc["etch_offset_nm"] = device.etch_offset_nm;
  doc["parameters_um"] = device.params;
  doc["config"] = json{{"default_width_um", cfg.default_width_um},
                       {"sample_count", cfg.sample_count},
                       {"bounds", json{{"width_min_um", cfg.bounds.width_min_um},
                                       {"width_max_um", cfg.bounds.width_max_um},
                                       {"length_min_um", cfg.bounds.length_min_um},
                                       {"length_max_um", cfg.bounds.length_max_um}}},
                       {"neff", neff_json(cfg.neff)},
                       {"coupler", coupler_json(cfg.coupler)}};

  json mzis = json::array();
  const double mzi_len = cfg.mzi_length_um();
  const double l_max = cfg.bounds.length_max_um;
  const double l_dc = cfg.coupler.section_length_um;
  for (int u = 0; u < device.topology.unit_count(); ++u) {
    const MziPlacement& place = device.topology.units[u];
    const double x0 = (place.layer - 1) * mzi_len;
    json unit;
    unit["layer"] = place.layer;
    unit["top_port"] = place.top_port;
    unit["x_offset_um"] = x0;
    unit["couplers"] = json::array({json{{"x_offset_um", x0 + l_max}},
                                    json{{"x_offset_um", x0 + 2.0 * l_max + l_dc}}});
    json tapers = json::array();
    for (int t = 0; t < 4; ++t) {
      const TaperProfile profile = device_taper(device, u, static_cast<TaperPosition>(t));
      std::vector<double> widths_nm(profile.interior_widths_um.size());
      for (std::size_t i = 0; i < widths_nm.size(); ++i) {
        widths_nm[i] = profile.interior_widths_um[i] * 1e3;
      }
      const bool input_pair = t < 2;
      tapers.push_back(json{{"position", kTaperNames[t]},
                            {"widths_nm", widths_nm},
                            {"length_um", profile.length_um},
                            {"pad_length_um", profile.pad_length_um()},
                            {"x_offset_um", input_pair ? x0 : x0 + l_max + l_dc}});
    }
    unit["tapers"] = std::move(tapers);
    mzis.push_back(std::move(unit));
  }
  doc["mzis"] = std::move(mzis);

  std::ofstream out = open_out(path);
  out << doc.dump(2) << "\n";
}

DeviceState read_geometry_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  json doc;
  in >> doc;
  if (doc.value("format", "") != "mzmesh-geometry") {
    throw std::runtime_error(path.string() + " is not a geometry document");
  }

  DeviceState dev;
  MeshConfig& cfg = dev.config;
  cfg.interior_widths = doc.at("interior_widths");
  const json& jc = doc.at("config");
  cfg.default_width_um = jc.at("default_width_um");
  cfg.sample_count = jc.at("sample_count");
  const json& jb = jc.at("bounds");
  cfg.bounds.width_min_um = jb.at("width_min_um");
  cfg.bounds.width_max_um = jb.at("width_max_um");
  cfg.bounds.length_min_um = jb.at("length_min_um");
  cfg.bounds.length_max_um = jb.at("length_max_um");
  neff_from_json(jc.at("neff"), cfg.neff);
  coupler_from_json(jc.at("coupler"), cfg.coupler);

  dev.topology = build_topology(doc.at("ports"), doc.at("layers"));
  dev.params = doc.at("parameters_um").get<std::vector<double>>();
  dev.etch_offset_nm = doc.at("etch_offset_nm");
  dev.validate();

  // the per-unit listing is the human-facing view; reject documents whose
  // views disagree with the canonical parameter vector
  if (doc.contains("mzis")) {
    const json& mzis = doc.at("mzis");
    if (static_cast<int>(mzis.size()) != dev.topology.unit_count()) {
      throw std::runtime_error(path.string() + ": unit listing does not match the topology");
    }
    for (int u = 0; u < dev.topology.unit_count(); ++u) {
      const json& tapers = mzis[u].at("tapers");
      for (int t = 0; t < 4; ++t) {
        const std::vector<double> widths_nm = tapers[t].at("widths_nm");
        const double length_um = tapers[t].at("length_um");
        for (int i = 0; i < cfg.interior_widths; ++i) {
          const double canonical = dev.params[param_index(cfg, u, t, i)];
          if (std::abs(widths_nm[i] * 1e-3 - canonical) > 1e-9 * std::max(1.0, canonical)) {
            throw std::runtime_error(path.string() + ": taper widths disagree with parameters_um");
          }
        }
        const double canonical_length =
            dev.params[param_index(cfg, u, t, cfg.interior_widths)];
        if (std::abs(length_um - canonical_length) > 1e-9 * canonical_length) {
          throw std::runtime_error(path.string() + ": taper lengths disagree with parameters_um");
        }
      }
    }
  }
  return dev;
}

void write_tolerance_csv(const std::filesystem::path& path, const ToleranceReport& report) {
  std::ofstream out = open_out(path);
  out << "offset_nm,J\n";
  for (std::size_t i = 0; i < report.offsets_nm.size(); ++i) {
    out << num(report.offsets_nm[i]) << "," << num(report.objectives[i]) << "\n";
  }
}

void write_study_csv(const std::filesystem::path& path, std::span<const StudyRow> rows) {
  std::ofstream out = open_out(path);
  out << "M,seed,J_final,J_m20,J_m10,J_0,J_p10,J_p20\n";
  for (const StudyRow& row : rows) {
    out << row.layers << "," << row.seed << "," << num(row.final_objective);
    for (double j : row.offset_objectives) out << "," << num(j);
    out << "\n";
  }
}

std::string offset_tag(double offset_nm) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", std::abs(offset_nm));
  std::string tag(buf);
  for (char& c : tag) {
    if (c == '.') c = '_';
  }
  if (offset_nm < 0.0) return "m" + tag;
  if (offset_nm > 0.0) return "p" + tag;
  return tag;
}

std::uint64_t fnv1a64(std::span<const unsigned char> bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char b : bytes) {
    hash ^= b;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

std::uint64_t fnv1a64_text(const std::string& text) {
  return fnv1a64({reinterpret_cast<const unsigned char*>(text.data()), text.size()});
}

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return fnv1a64_text(buffer.str());
}

std::string checksum_hex(std::uint64_t checksum) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx", static_cast<unsigned long long>(checksum));
  return buf;
}

std::uint64_t trace_checksum(const OptimizationTrace& trace) {
  std::string text;
  for (const TracePoint& p : trace.points) {
    text += trace_line(p, false);
    text += "\n";
  }
  return fnv1a64_text(text);
}

void write_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  json doc;
  doc["command"] = manifest.command;
  doc["spec_file"] = manifest.spec_file;
  doc["spec_checksum"] = manifest.spec_checksum;
  doc["seed"] = manifest.seed;
  doc["total_wall_ms"] = manifest.total_wall_ms;
  json artifacts = json::object();
  for (const auto& [name, checksum] : manifest.artifacts) artifacts[name] = checksum;
  doc["artifacts"] = std::move(artifacts);
  std::ofstream out = open_out(path);
  out << doc.dump(2) << "\n";
}

}  // namespace mzmesh
