#include "mzmesh/design.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace mzmesh {

const char* to_string(DeviceKind kind) {
  switch (kind) {
    case DeviceKind::splitter: return "splitter";
    case DeviceKind::duplexer: return "duplexer";
    case DeviceKind::custom: return "custom";
  }
  return "unknown";
}

std::vector<double> DesignSpec::grid_nm() const {
  std::vector<double> grid(grid_count);
  for (int i = 0; i < grid_count; ++i) {
    grid[i] = grid_start_nm + (grid_stop_nm - grid_start_nm) * i / (grid_count - 1);
  }
  return grid;
}

void DesignSpec::validate() const {
  std::vector<std::string> problems;

  if (ports < 2) problems.push_back("ports must be at least 2");
  if (layers < 1) problems.push_back("layers must be at least 1");
  if (widths_per_taper < 1) problems.push_back("widths_per_taper must be at least 1");
  if (grid_count < 2) problems.push_back("grid count must be at least 2");
  if (grid_start_nm >= grid_stop_nm) problems.push_back("grid start must be below grid stop");
  if (grid_start_nm < 1200.0 || grid_stop_nm > 1700.0) {
    problems.push_back("grid must lie within the coupler table range 1200-1700 nm");
  }
  if (input_port < 0 || input_port >= ports) problems.push_back("input_port out of range");
  if (max_iterations < 1) problems.push_back("max_iterations must be at least 1");
  if (alpha1 < 0.0 || alpha2 < 0.0) problems.push_back("regularizer weights must be non-negative");

  if (kind == DeviceKind::splitter) {
    if (static_cast<int>(split_ratios.size()) != ports) {
      problems.push_back("ratios must list one value per output port");
    }
    double sum = 0.0;
    bool in_range = true;
    for (double r : split_ratios) {
      if (r < 0.0 || r > 1.0) in_range = false;
      sum += r;
    }
    if (!in_range) problems.push_back("ratios must lie in [0, 1]");
    if (sum > 1.0 + 1e-9) {
      problems.push_back("ratios sum to " + std::to_string(sum) + ", must be at most 1");
    }
  } else if (kind == DeviceKind::duplexer) {
    if (ports != 2) problems.push_back("duplexer designs require ports = 2");
    if (cutoff_nm <= grid_start_nm || cutoff_nm >= grid_stop_nm) {
      problems.push_back("cutoff_nm must lie strictly inside the wavelength grid");
    }
    if (short_pass_output < 0 || short_pass_output >= ports) {
      problems.push_back("short_pass_output out of range");
    }
  } else if (kind == DeviceKind::custom) {
    if (target_table.empty()) problems.push_back("custom designs need a target table path");
  }

  if (offsets_nm.empty() ||
      std::none_of(offsets_nm.begin(), offsets_nm.end(), [](double o) { return o == 0.0; })) {
    problems.push_back("tolerance offsets must include 0");
  }
  for (double o : offsets_nm) {
    if (o < -20.0 || o > 20.0) {
      problems.push_back("tolerance offsets must lie within [-20, 20] nm");
      break;
    }
  }
  if (layer_counts.empty()) problems.push_back("study layer_counts must not be empty");
  for (int m : layer_counts) {
    if (m < 1) {
      problems.push_back("study layer_counts must be positive");
      break;
    }
  }
  if (seeds_per_count < 1) problems.push_back("seeds_per_count must be at least 1");

  try {
    init_config(*this).validate();
  } catch (const std::invalid_argument& e) {
    problems.push_back(e.what());
  }

  if (!problems.empty()) {
    std::string message = "invalid design spec:";
    for (const auto& p : problems) message += "\n  - " + p;
    throw std::invalid_argument(message);
  }
}

namespace {

struct IniValue {
  std::string text;
  int line = 0;
  mutable bool used = false;
};

struct IniDoc {
  std::filesystem::path path;
  std::map<std::string, std::map<std::string, IniValue>> sections;

  [[noreturn]] void fail(int line, const std::string& message) const {
    throw std::invalid_argument(path.string() + ":" + std::to_string(line) + ": " + message);
  }

  const IniValue* find(const std::string& section, const std::string& key) const {
    auto s = sections.find(section);
    if (s == sections.end()) return nullptr;
    auto k = s->second.find(key);
    if (k == s->second.end()) return nullptr;
    k->second.used = true;
    return &k->second;
  }
};

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

IniDoc parse_ini(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open design spec: " + path.string());

  IniDoc doc;
  doc.path = path;
  std::string section;  // top-level keys live in the "" section
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#' || text[0] == ';') continue;
    if (text.front() == '[') {
      if (text.back() != ']') doc.fail(number, "unterminated section header");
      section = trim(text.substr(1, text.size() - 2));
      if (section.empty()) doc.fail(number, "empty section name");
      doc.sections[section];
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) doc.fail(number, "expected 'key = value'");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty()) doc.fail(number, "empty key");
    auto [it, inserted] = doc.sections[section].emplace(key, IniValue{value, number});
    if (!inserted) {
      doc.fail(number, "duplicate key '" + key + "' (first defined on line " +
                           std::to_string(it->second.line) + ")");
    }
  }
  return doc;
}

double parse_double(const IniDoc& doc, const IniValue& v, const std::string& key) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v.text, &used);
    if (used != v.text.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    doc.fail(v.line, "cannot parse '" + v.text + "' as a number for " + key);
  }
}

long long parse_int(const IniDoc& doc, const IniValue& v, const std::string& key) {
  try {
    std::size_t used = 0;
    const long long x = std::stoll(v.text, &used);
    if (used != v.text.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    doc.fail(v.line, "cannot parse '" + v.text + "' as an integer for " + key);
  }
}

std::vector<double> parse_double_list(const IniDoc& doc, const IniValue& v,
                                      const std::string& key) {
  std::vector<double> out;
  std::istringstream stream(v.text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    const std::string t = trim(item);
    if (t.empty()) doc.fail(v.line, "empty list entry for " + key);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(t, &used));
      if (used != t.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      doc.fail(v.line, "cannot parse '" + t + "' in list for " + key);
    }
  }
  if (out.empty()) doc.fail(v.line, "empty list for " + key);
  return out;
}

struct Reader {
  const IniDoc& doc;

  void number(const std::string& section, const std::string& key, double& target) const {
    if (const IniValue* v = doc.find(section, key)) target = parse_double(doc, *v, key);
  }
  template <class Int>
  void integer(const std::string& section, const std::string& key, Int& target) const {
    if (const IniValue* v = doc.find(section, key)) {
      target = static_cast<Int>(parse_int(doc, *v, key));
    }
  }
  void list(const std::string& section, const std::string& key,
            std::vector<double>& target) const {
    if (const IniValue* v = doc.find(section, key)) target = parse_double_list(doc, *v, key);
  }
  void text(const std::string& section, const std::string& key, std::string& target) const {
    if (const IniValue* v = doc.find(section, key)) target = v->text;
  }
};

}  // namespace

DesignSpec parse_design_spec(const std::filesystem::path& path) {
  const IniDoc doc = parse_ini(path);
  const Reader read{doc};
  DesignSpec spec;

  std::string kind_text = "splitter";
  read.text("", "kind", kind_text);
  if (kind_text == "splitter") {
    spec.kind = DeviceKind::splitter;
  } else if (kind_text == "duplexer") {
    spec.kind = DeviceKind::duplexer;
  } else if (kind_text == "custom") {
    spec.kind = DeviceKind::custom;
  } else {
    const IniValue* v = doc.find("", "kind");
    doc.fail(v ? v->line : 0, "kind must be splitter, duplexer or custom");
  }

  read.integer("", "ports", spec.ports);
  read.integer("", "layers", spec.layers);
  read.integer("", "widths_per_taper", spec.widths_per_taper);
  spec.input_port = spec.ports / 2;
  read.integer("", "input_port", spec.input_port);
  read.integer("", "seed", spec.seed);
  read.integer("", "max_iterations", spec.max_iterations);
  read.integer("", "checkpoint_every", spec.checkpoint_every);

  read.number("grid", "start_nm", spec.grid_start_nm);
  read.number("grid", "stop_nm", spec.grid_stop_nm);
  read.integer("grid", "count", spec.grid_count);

  if (spec.kind == DeviceKind::splitter) {
    if (const IniValue* v = doc.find("target", "ratios")) {
      spec.split_ratios = parse_double_list(doc, *v, "ratios");
    } else {
      spec.split_ratios.assign(spec.ports, 1.0 / spec.ports);
    }
  }
  read.number("target", "cutoff_nm", spec.cutoff_nm);
  read.integer("target", "short_pass_output", spec.short_pass_output);
  std::string table;
  read.text("target", "table", table);
  if (!table.empty()) {
    std::filesystem::path p(table);
    if (p.is_relative()) p = path.parent_path() / p;
    spec.target_table = p.string();
  }

  read.number("init", "width_jitter_nm", spec.width_jitter_nm);
  read.number("init", "width_offset_nm", spec.width_offset_nm);
  read.number("init", "length_jitter_um", spec.length_jitter_um);

  read.number("bounds", "default_width_nm", spec.default_width_nm);
  read.number("bounds", "width_min_nm", spec.width_min_nm);
  read.number("bounds", "width_max_nm", spec.width_max_nm);
  read.number("bounds", "length_min_um", spec.length_min_um);
  read.number("bounds", "length_max_um", spec.length_max_um);

  read.number("regularization", "alpha1", spec.alpha1);
  read.number("regularization", "alpha2", spec.alpha2);
  read.number("regularization", "reference_width_nm", spec.reference_width_nm);

  read.list("tolerance", "offsets_nm", spec.offsets_nm);
  if (const IniValue* v = doc.find("study", "layer_counts")) {
    spec.layer_counts.clear();
    for (double m : parse_double_list(doc, *v, "layer_counts")) {
      spec.layer_counts.push_back(static_cast<int>(m));
    }
  }
  read.integer("study", "seeds_per_count", spec.seeds_per_count);

  // Reject unknown keys so typos cannot silently fall back to defaults.
  static const std::map<std::string, std::vector<std::string>> known = {
      {"", {"kind", "ports", "layers", "widths_per_taper", "input_port", "seed",
            "max_iterations", "checkpoint_every"}},
      {"grid", {"start_nm", "stop_nm", "count"}},
      {"target", {"ratios", "cutoff_nm", "short_pass_output", "table"}},
      {"init", {"width_jitter_nm", "width_offset_nm", "length_jitter_um"}},
      {"bounds", {"default_width_nm", "width_min_nm", "width_max_nm", "length_min_um",
                  "length_max_um"}},
      {"regularization", {"alpha1", "alpha2", "reference_width_nm"}},
      {"tolerance", {"offsets_nm"}},
      {"study", {"layer_counts", "seeds_per_count"}},
  };
  for (const auto& [section, keys] : doc.sections) {
    const auto allowed = known.find(section);
    if (allowed == known.end()) {
      doc.fail(keys.empty() ? 0 : keys.begin()->second.line, "unknown section [" + section + "]");
    }
    for (const auto& [key, value] : keys) {
      if (std::find(allowed->second.begin(), allowed->second.end(), key) ==
          allowed->second.end()) {
        const std::string where = section.empty() ? "top level" : "[" + section + "]";
        doc.fail(value.line, "unknown key '" + key + "' in " + where);
      }
    }
  }

  spec.validate();
  return spec;
}

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string fmt_list(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += fmt(xs[i]);
  }
  return out;
}

}  // namespace

std::string serialize_design_spec(const DesignSpec& spec) {
  std::ostringstream out;
  out << "kind = " << to_string(spec.kind) << "\n";
  out << "ports = " << spec.ports << "\n";
  out << "layers = " << spec.layers << "\n";
  out << "widths_per_taper = " << spec.widths_per_taper << "\n";
  out << "input_port = " << spec.input_port << "\n";
  out << "seed = " << spec.seed << "\n";
  out << "max_iterations = " << spec.max_iterations << "\n";
  out << "checkpoint_every = " << spec.checkpoint_every << "\n";
  out << "\n[grid]\n";
  out << "start_nm = " << fmt(spec.grid_start_nm) << "\n";
  out << "stop_nm = " << fmt(spec.grid_stop_nm) << "\n";
  out << "count = " << spec.grid_count << "\n";
  out << "\n[target]\n";
  if (spec.kind == DeviceKind::splitter) {
    out << "ratios = " << fmt_list(spec.split_ratios) << "\n";
  } else if (spec.kind == DeviceKind::duplexer) {
    out << "cutoff_nm = " << fmt(spec.cutoff_nm) << "\n";
    out << "short_pass_output = " << spec.short_pass_output << "\n";
  } else {
    out << "table = " << spec.target_table << "\n";
  }
  out << "\n[init]\n";
  out << "width_jitter_nm = " << fmt(spec.width_jitter_nm) << "\n";
  out << "width_offset_nm = " << fmt(spec.width_offset_nm) << "\n";
  out << "length_jitter_um = " << fmt(spec.length_jitter_um) << "\n";
  out << "\n[bounds]\n";
  out << "default_width_nm = " << fmt(spec.default_width_nm) << "\n";
  out << "width_min_nm = " << fmt(spec.width_min_nm) << "\n";
  out << "width_max_nm = " << fmt(spec.width_max_nm) << "\n";
  out << "length_min_um = " << fmt(spec.length_min_um) << "\n";
  out << "length_max_um = " << fmt(spec.length_max_um) << "\n";
  out << "\n[regularization]\n";
  out << "alpha1 = " << fmt(spec.alpha1) << "\n";
  out << "alpha2 = " << fmt(spec.alpha2) << "\n";
  out << "reference_width_nm = " << fmt(spec.reference_width_nm) << "\n";
  out << "\n[tolerance]\n";
  out << "offsets_nm = " << fmt_list(spec.offsets_nm) << "\n";
  out << "\n[study]\n";
  out << "layer_counts = ";
  for (std::size_t i = 0; i < spec.layer_counts.size(); ++i) {
    if (i) out << ", ";
    out << spec.layer_counts[i];
  }
  out << "\n";
  out << "seeds_per_count = " << spec.seeds_per_count << "\n";
  return out.str();
}

InitConfig init_config(const DesignSpec& spec) {
  InitConfig cfg;
  cfg.default_width_nm = spec.default_width_nm;
  cfg.width_jitter_nm = spec.width_jitter_nm;
  cfg.width_offset_nm = spec.width_offset_nm;
  cfg.width_min_nm = spec.width_min_nm;
  cfg.width_max_nm = spec.width_max_nm;
  cfg.length_min_um = spec.length_min_um;
  cfg.length_max_um = spec.length_max_um;
  cfg.length_jitter_um = spec.length_jitter_um;
  cfg.widths_per_taper = spec.widths_per_taper;
  cfg.seed = spec.seed;
  return cfg;
}

MeshConfig mesh_config(const DesignSpec& spec) {
  MeshConfig cfg;
  cfg.interior_widths = spec.widths_per_taper;
  cfg.default_width_um = spec.default_width_nm * 1e-3;
  cfg.bounds.width_min_um = spec.width_min_nm * 1e-3;
  cfg.bounds.width_max_um = spec.width_max_nm * 1e-3;
  cfg.bounds.length_min_um = spec.length_min_um;
  cfg.bounds.length_max_um = spec.length_max_um;
  return cfg;
}

namespace {

DesignObjective targets_from_table(const DesignSpec& spec, const std::vector<double>& grid) {
  std::ifstream in(spec.target_table);
  if (!in) {
    throw std::invalid_argument("cannot open target table: " + spec.target_table);
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument("empty target table: " + spec.target_table);
  }

  std::vector<double> wavelengths;
  std::vector<std::vector<double>> rows;
  int number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    std::istringstream stream(line);
    std::string item;
    std::vector<double> fields;
    while (std::getline(stream, item, ',')) fields.push_back(std::stod(item));
    if (static_cast<int>(fields.size()) != spec.ports + 1) {
      throw std::invalid_argument(spec.target_table + ":" + std::to_string(number) +
                                  ": expected wavelength plus one target per port");
    }
    wavelengths.push_back(fields[0]);
    rows.emplace_back(fields.begin() + 1, fields.end());
  }

  if (wavelengths.size() != grid.size()) {
    throw std::invalid_argument("target table has " + std::to_string(wavelengths.size()) +
                                " rows but the grid has " + std::to_string(grid.size()));
  }
  DesignObjective obj;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (std::abs(wavelengths[i] - grid[i]) > 1e-6) {
      throw std::invalid_argument("target table wavelengths do not match the grid at row " +
                                  std::to_string(i + 1));
    }
  }
  obj.wavelengths_nm = grid;
  obj.targets = std::move(rows);
  return obj;
}

}  // namespace

DesignObjective build_targets(const DesignSpec& spec) {
  spec.validate();
  const std::vector<double> grid = spec.grid_nm();

  DesignObjective obj;
  if (spec.kind == DeviceKind::custom) {
    obj = targets_from_table(spec, grid);
  } else {
    obj.wavelengths_nm = grid;
    obj.targets.reserve(grid.size());
    for (double lambda : grid) {
      if (spec.kind == DeviceKind::splitter) {
        obj.targets.push_back(spec.split_ratios);
      } else {
        std::vector<double> row(spec.ports, 0.0);
        const bool pass = lambda <= spec.cutoff_nm;
        row[spec.short_pass_output] = pass ? 1.0 : 0.0;
        row[1 - spec.short_pass_output] = pass ? 0.0 : 1.0;
        obj.targets.push_back(std::move(row));
      }
    }
  }
  obj.input_port = spec.input_port;
  obj.alpha1 = spec.alpha1;
  obj.alpha2 = spec.alpha2;
  obj.reference_width_nm = spec.reference_width_nm;
  obj.validate(spec.ports);
  return obj;
}

DeviceState initial_device(const DesignSpec& spec) {
  spec.validate();
  DeviceState dev;
  dev.config = mesh_config(spec);
  dev.topology = build_topology(spec.ports, spec.layers);
  dev.params = initialize_parameters(dev.topology, init_config(spec));
  return dev;
}

}  // namespace mzmesh
