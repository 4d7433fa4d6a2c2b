#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mzmesh/mesh.hpp"
#include "mzmesh/optimizer.hpp"
#include "mzmesh/tolerance.hpp"

namespace mzmesh {

// All CSV output uses 17 significant digits so doubles survive a round trip
// through the files.

struct SpectrumData {
  std::vector<double> wavelengths_nm;
  std::vector<std::vector<double>> transmission;  // [wavelength][output port]
};

// Header: wavelength_nm,out_1,...,out_N
void write_spectrum_csv(const std::filesystem::path& path, std::span<const double> wavelengths_nm,
                        const std::vector<std::vector<double>>& transmission);
SpectrumData read_spectrum_csv(const std::filesystem::path& path);

// One JSON object per iteration: {"iter":..,"J":..,"P":..,"lr":..,"wall_ms":..}
void write_trace_jsonl(const std::filesystem::path& path, const OptimizationTrace& trace);
std::vector<TracePoint> read_trace_jsonl(const std::filesystem::path& path);

// Geometry interchange. The document lists each interferometer with taper
// control widths in nm, lengths and pads in um, and absolute x offsets of
// tapers and couplers; a flat parameters_um array carries the canonical
// parameter vector so import reproduces simulations bit for bit (the nm
// round trip alone would lose the last ulp).
void write_geometry_json(const std::filesystem::path& path, const DeviceState& device);
DeviceState read_geometry_json(const std::filesystem::path& path);

// Header: offset_nm,J
void write_tolerance_csv(const std::filesystem::path& path, const ToleranceReport& report);

// Header: M,seed,J_final,J_m20,J_m10,J_0,J_p10,J_p20
void write_study_csv(const std::filesystem::path& path, std::span<const StudyRow> rows);

// File name tag for an offset value: -20 -> "m20", 0 -> "0", +10 -> "p10".
std::string offset_tag(double offset_nm);

// FNV-1a 64-bit checksums; fast fingerprints for the run manifest, not
// cryptographic hashes.
std::uint64_t fnv1a64(std::span<const unsigned char> bytes);
std::uint64_t fnv1a64_text(const std::string& text);
std::uint64_t fnv1a64_file(const std::filesystem::path& path);
std::string checksum_hex(std::uint64_t checksum);

// Checksum of the deterministic trace projection (iter, J, P, lr per line);
// wall-clock fields vary between runs and are excluded.
std::uint64_t trace_checksum(const OptimizationTrace& trace);

struct Manifest {
  std::string command;
  std::string spec_file;
  std::string spec_checksum;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> artifacts;  // name, checksum
  double total_wall_ms = 0.0;
};

void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

}  // namespace mzmesh
