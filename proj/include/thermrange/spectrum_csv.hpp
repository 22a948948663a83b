#pragma once

// Spectrum CSV: header `wavelength_um,value`, then one `λ,v` row per channel,
// LF line endings. The unit of `value` depends on what is being stored.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "thermrange/error.hpp"
#include "thermrange/spectral.hpp"
#include "thermrange/text.hpp"

namespace thermrange {

inline constexpr const char* spectrum_csv_header = "wavelength_um,value";

/// Raw rows of a Spectrum CSV, before any grid or range validation.
struct SpectrumTable {
  std::vector<double> wavelengths_um;
  std::vector<double> values;
};

inline SpectrumTable read_spectrum_table(const std::filesystem::path& path) {
  using Reason = SpectrumFileError::Reason;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SpectrumFileError(Reason::missing_file, 0, "cannot open spectrum file " + path.string());

  SpectrumTable table;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (row == 1) {
      if (text::trim(line) != spectrum_csv_header) {
        throw SpectrumFileError(Reason::malformed_row, row,
                                path.string() + ": line 1: expected header '" + spectrum_csv_header + "'");
      }
      continue;
    }
    if (text::trim(line).empty()) continue;
    const auto fields = text::split(line, ',');
    const auto w = fields.size() == 2 ? text::parse_double(fields[0]) : std::nullopt;
    const auto v = fields.size() == 2 ? text::parse_double(fields[1]) : std::nullopt;
    if (!w || !v || !std::isfinite(*w) || !std::isfinite(*v)) {
      throw SpectrumFileError(Reason::malformed_row, row,
                              path.string() + ": line " + std::to_string(row) + ": malformed row '" + line + "'");
    }
    if (!table.wavelengths_um.empty() && !(*w > table.wavelengths_um.back())) {
      throw SpectrumFileError(Reason::malformed_row, row,
                              path.string() + ": line " + std::to_string(row) +
                                  ": wavelengths must be strictly increasing");
    }
    table.wavelengths_um.push_back(*w);
    table.values.push_back(*v);
  }
  if (row == 0) throw SpectrumFileError(Reason::malformed_row, 0, path.string() + ": empty file");
  if (table.values.empty()) throw SpectrumFileError(Reason::malformed_row, row, path.string() + ": no data rows");
  return table;
}

/// Reads a spectrum stored on its own grid (the file's wavelengths become the grid).
template <class Tag>
Spectrum<Tag> read_spectrum_csv(const std::filesystem::path& path) {
  auto table = read_spectrum_table(path);
  return Spectrum<Tag>(SpectralGrid(std::move(table.wavelengths_um)), std::move(table.values));
}

inline void write_spectrum_csv(const std::filesystem::path& path, std::span<const double> wavelengths_um,
                               std::span<const double> values) {
  if (wavelengths_um.size() != values.size())
    throw PreconditionError("spectrum CSV: wavelength and value counts differ");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write spectrum file " + path.string());
  out << spectrum_csv_header << '\n';
  for (std::size_t k = 0; k < values.size(); ++k)
    out << text::format_double(wavelengths_um[k]) << ',' << text::format_double(values[k]) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

template <class Tag>
void write_spectrum_csv(const std::filesystem::path& path, const Spectrum<Tag>& spectrum) {
  write_spectrum_csv(path, spectrum.grid().wavelengths(), spectrum.values());
}

}  // namespace thermrange
