#pragma once

// HSRC v1 cube files:
//
//   HSRC 1\n
//   <H> <W> <K> <t_air>\n
//   <λ_0> <λ_1> ... <λ_{K-1}>\n        (µm)
//   H·W·K little-endian float32, band-sequential:
//   all of band 0 in row-major pixel order, then band 1, ...
//
// Numbers in the text header use the shortest round-trip decimal form, so a
// write → read → write cycle reproduces the file byte for byte.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <vector>

#include "thermrange/error.hpp"
#include "thermrange/forward_model.hpp"
#include "thermrange/text.hpp"

namespace thermrange {

namespace detail {

inline std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
  }
}

}  // namespace detail

inline std::string encode_hsrc(const HyperCube& cube) {
  std::string out = "HSRC 1\n";
  out += std::to_string(cube.height()) + ' ' + std::to_string(cube.width()) + ' ' +
         std::to_string(cube.channels()) + ' ' + text::format_double(cube.t_air()) + '\n';
  const auto w = cube.grid().wavelengths();
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (k) out += ' ';
    out += text::format_double(w[k]);
  }
  out += '\n';

  const std::size_t header_size = out.size();
  const std::size_t n_pix = cube.pixel_count();
  const std::size_t n_ch = cube.channels();
  out.resize(header_size + n_pix * n_ch * 4);
  char* dst = out.data() + header_size;
  for (std::size_t k = 0; k < n_ch; ++k)
    for (std::size_t p = 0; p < n_pix; ++p) {
      const auto le = detail::to_little_endian(std::bit_cast<std::uint32_t>(cube.pixel(p)[k]));
      std::memcpy(dst, &le, 4);
      dst += 4;
    }
  return out;
}

inline HyperCube decode_hsrc(std::string_view bytes) {
  std::size_t pos = 0;
  auto next_line = [&](const char* what) {
    const auto nl = bytes.find('\n', pos);
    if (nl == std::string_view::npos) throw ParseError(std::string("HSRC: missing newline after ") + what, pos);
    const auto line = bytes.substr(pos, nl - pos);
    const auto start = pos;
    pos = nl + 1;
    return std::pair{line, start};
  };

  const auto [magic, magic_at] = next_line("magic");
  if (magic != "HSRC 1") throw ParseError("HSRC: bad magic line", magic_at);

  const auto [dims, dims_at] = next_line("dimension line");
  const auto fields = text::split(dims, ' ');
  if (fields.size() != 4) throw ParseError("HSRC: dimension line must hold 'H W K t_air'", dims_at);
  const auto h = text::parse_int(fields[0]);
  const auto w = text::parse_int(fields[1]);
  const auto k = text::parse_int(fields[2]);
  const auto t_air = text::parse_double(fields[3]);
  if (!h || !w || !k || !t_air || *h <= 0 || *w <= 0 || *k <= 0)
    throw ParseError("HSRC: invalid dimension line", dims_at);

  const auto [waves, waves_at] = next_line("wavelength line");
  const auto wave_fields = text::split(waves, ' ');
  if (wave_fields.size() != static_cast<std::size_t>(*k))
    throw ParseError("HSRC: wavelength line has " + std::to_string(wave_fields.size()) + " entries, expected " +
                         std::to_string(*k),
                     waves_at);
  std::vector<double> wavelengths;
  wavelengths.reserve(wave_fields.size());
  for (const auto f : wave_fields) {
    const auto v = text::parse_double(f);
    if (!v) throw ParseError("HSRC: malformed wavelength '" + std::string(f) + "'", waves_at);
    wavelengths.push_back(*v);
  }

  const auto n_pix = static_cast<std::size_t>(*h) * static_cast<std::size_t>(*w);
  const auto n_ch = static_cast<std::size_t>(*k);
  const std::size_t expected = n_pix * n_ch * 4;
  const std::size_t available = bytes.size() - pos;
  if (available != expected) {
    throw ParseError("HSRC: payload is " + std::to_string(available) + " bytes, expected " + std::to_string(expected),
                     available < expected ? bytes.size() : pos + expected);
  }

  SpectralGrid grid;
  try {
    grid = SpectralGrid(std::move(wavelengths));
  } catch (const PreconditionError& e) {
    throw ParseError(std::string("HSRC: ") + e.what(), waves_at);
  }
  std::vector<float> values(n_pix * n_ch);
  const char* src = bytes.data() + pos;
  for (std::size_t band = 0; band < n_ch; ++band)
    for (std::size_t p = 0; p < n_pix; ++p) {
      std::uint32_t le;
      std::memcpy(&le, src, 4);
      const float v = std::bit_cast<float>(detail::to_little_endian(le));
      if (!std::isfinite(v)) throw ParseError("HSRC: non-finite sample", static_cast<std::uint64_t>(src - bytes.data()));
      values[p * n_ch + band] = v;
      src += 4;
    }
  return HyperCube(static_cast<std::size_t>(*h), static_cast<std::size_t>(*w), std::move(grid), std::move(values),
                   *t_air);
}

inline void write_hsrc(const std::filesystem::path& path, const HyperCube& cube) {
  const auto bytes = encode_hsrc(cube);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write cube file " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

inline HyperCube read_hsrc(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open cube file " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_hsrc(bytes);
}

}  // namespace thermrange
