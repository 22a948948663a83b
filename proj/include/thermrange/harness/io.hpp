#pragma once

// Result artifacts: CSV grids, 16-bit PGM images with a scaling sidecar,
// PBM masks, and the per-pixel tables written by the command-line tool.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "thermrange/error.hpp"
#include "thermrange/text.hpp"

namespace thermrange::harness {

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

inline void finish_output(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

inline void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

/// Row-major grid as CSV, one line per image row. Non-finite values are
/// written as `nan`.
inline void write_grid_csv(const std::filesystem::path& path, std::size_t height, std::size_t width,
                           std::span<const double> values) {
  if (values.size() != height * width) throw PreconditionError("grid value count does not match H·W");
  auto out = open_output(path);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      if (c) out << ',';
      const double v = values[r * width + c];
      out << (std::isfinite(v) ? text::format_double(v) : std::string("nan"));
    }
    out << '\n';
  }
  finish_output(out, path);
}

struct Grid {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> values;
};

inline Grid read_grid_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  Grid g;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    const auto fields = text::split(line, ',');
    if (g.height == 0) g.width = fields.size();
    if (fields.size() != g.width)
      throw ParseError(path.string() + ": row " + std::to_string(g.height + 1) + " has a different width", 0);
    for (const auto f : fields) {
      const auto t = text::trim(f);
      if (t == "nan") {
        g.values.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      const auto v = text::parse_double(t);
      if (!v) throw ParseError(path.string() + ": malformed value '" + std::string(f) + "'", 0);
      g.values.push_back(*v);
    }
    ++g.height;
  }
  return g;
}

/// Linear mapping used for a PGM image: value = offset + scale · pixel.
struct PgmScaling {
  double offset = 0.0;
  double scale = 1.0;
};

/// 16-bit binary PGM of the finite values, linearly mapped onto 0..65535;
/// non-finite values become 0. The mapping goes to `<path>.txt`.
inline PgmScaling write_pgm16(const std::filesystem::path& path, std::size_t height, std::size_t width,
                              std::span<const double> values) {
  if (values.size() != height * width) throw PreconditionError("image value count does not match H·W");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const double v : values)
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  PgmScaling s;
  if (std::isfinite(lo)) {
    s.offset = lo;
    s.scale = hi > lo ? (hi - lo) / 65535.0 : 1.0;
  }
  auto out = open_output(path);
  out << "P5\n" << width << ' ' << height << "\n65535\n";
  for (const double v : values) {
    std::uint16_t p = 0;
    if (std::isfinite(v)) p = static_cast<std::uint16_t>(std::clamp(std::lround((v - s.offset) / s.scale), 0L, 65535L));
    const char bytes[2] = {static_cast<char>(p >> 8), static_cast<char>(p & 0xff)};
    out.write(bytes, 2);
  }
  finish_output(out, path);

  const auto sidecar = std::filesystem::path(path.string() + ".txt");
  auto meta = open_output(sidecar);
  meta << "# value = offset + scale * pixel; pixel 0 also marks missing values\n"
       << "offset = " << text::format_double(s.offset) << '\n'
       << "scale = " << text::format_double(s.scale) << '\n';
  finish_output(meta, sidecar);
  return s;
}

/// Plain PBM; 1 (black) marks a flagged pixel.
inline void write_pbm(const std::filesystem::path& path, std::size_t height, std::size_t width,
                      std::span<const char> flagged) {
  if (flagged.size() != height * width) throw PreconditionError("mask size does not match H·W");
  auto out = open_output(path);
  out << "P1\n" << width << ' ' << height << '\n';
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      if (c) out << ' ';
      out << (flagged[r * width + c] ? '1' : '0');
    }
    out << '\n';
  }
  finish_output(out, path);
}

inline std::vector<char> read_pbm(const std::filesystem::path& path, std::size_t& height, std::size_t& width) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string magic;
  in >> magic >> width >> height;
  if (magic != "P1" || !in) throw ParseError(path.string() + ": not a plain PBM file", 0);
  std::vector<char> bits(height * width);
  for (auto& b : bits) {
    int v = 0;
    if (!(in >> v) || (v != 0 && v != 1)) throw ParseError(path.string() + ": truncated PBM data", 0);
    b = static_cast<char>(v);
  }
  return bits;
}

inline void write_label_csv(const std::filesystem::path& path, std::size_t height, std::size_t width,
                            std::span<const std::size_t> labels) {
  if (labels.size() != height * width) throw PreconditionError("label count does not match H·W");
  auto out = open_output(path);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      if (c) out << ',';
      out << labels[r * width + c];
    }
    out << '\n';
  }
  finish_output(out, path);
}

/// Table of profiles: header `<key columns>,<λ_0>,...`, one row per profile.
struct ProfileTable {
  std::vector<double> wavelengths_um;
  std::vector<std::vector<double>> keys;
  std::vector<std::vector<double>> profiles;
};

inline void write_profile_table(const std::filesystem::path& path, std::span<const std::string> key_names,
                                const ProfileTable& table) {
  auto out = open_output(path);
  for (std::size_t i = 0; i < key_names.size(); ++i) out << (i ? "," : "") << key_names[i];
  for (const double w : table.wavelengths_um) out << ',' << text::format_double(w);
  out << '\n';
  for (std::size_t r = 0; r < table.profiles.size(); ++r) {
    for (std::size_t i = 0; i < table.keys[r].size(); ++i) out << (i ? "," : "") << text::format_double(table.keys[r][i]);
    for (const double v : table.profiles[r]) out << ',' << text::format_double(v);
    out << '\n';
  }
  finish_output(out, path);
}

inline ProfileTable read_profile_table(const std::filesystem::path& path, std::size_t key_count) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  ProfileTable t;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    const auto fields = text::split(line, ',');
    if (fields.size() <= key_count) throw ParseError(path.string() + ": line " + std::to_string(row) + " too short", 0);
    std::vector<double> nums;
    for (std::size_t i = row == 1 ? key_count : 0; i < fields.size(); ++i) {
      const auto v = text::parse_double(text::trim(fields[i]));
      if (!v) throw ParseError(path.string() + ": line " + std::to_string(row) + ": malformed number", 0);
      nums.push_back(*v);
    }
    if (row == 1) {
      t.wavelengths_um = std::move(nums);
      continue;
    }
    if (nums.size() != key_count + t.wavelengths_um.size())
      throw ParseError(path.string() + ": line " + std::to_string(row) + " has the wrong number of columns", 0);
    t.keys.emplace_back(nums.begin(), nums.begin() + static_cast<std::ptrdiff_t>(key_count));
    t.profiles.emplace_back(nums.begin() + static_cast<std::ptrdiff_t>(key_count), nums.end());
  }
  if (t.wavelengths_um.empty()) throw ParseError(path.string() + ": missing header", 0);
  return t;
}

}  // namespace thermrange::harness
