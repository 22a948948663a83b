#pragma once

// Flags pixels whose spectrum carries reflected sky radiance. Downwelling
// radiance has a strong ozone signature near 9.6 µm that is absent from the
// short horizontal path, so a large difference between two channels on the
// edge of that feature indicates reflection.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "thermrange/error.hpp"
#include "thermrange/forward_model.hpp"

namespace thermrange {

struct OzoneMaskConfig {
  double lambda_a_um = 9.50;
  double lambda_b_um = 9.58;
  double threshold = 4.0;  // microflicks

  void validate(const SpectralGrid& grid) const {
    for (const double w : {lambda_a_um, lambda_b_um})
      if (!(w >= grid.front() && w <= grid.back()))
        throw PreconditionError("ozone probe wavelength " + std::to_string(w) + " µm outside grid span");
    if (!(threshold > 0.0)) throw PreconditionError("ozone mask threshold must be positive");
  }

  static OzoneMaskConfig unbounded() {
    OzoneMaskConfig c;
    c.threshold = std::numeric_limits<double>::infinity();
    return c;
  }
};

struct OzoneMask {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channel_a = 0;
  std::size_t channel_b = 0;
  std::vector<double> difference;  // |L_a − L_b|, row-major
  std::vector<char> reliable;      // 1 where difference ≤ threshold

  std::size_t flagged_count() const {
    std::size_t n = 0;
    for (const char r : reliable) n += r ? 0 : 1;
    return n;
  }
};

inline OzoneMask ozone_mask(const HyperCube& cube, const OzoneMaskConfig& cfg = {}) {
  cfg.validate(cube.grid());
  OzoneMask out;
  out.height = cube.height();
  out.width = cube.width();
  out.channel_a = cube.grid().nearest(cfg.lambda_a_um);
  out.channel_b = cube.grid().nearest(cfg.lambda_b_um);
  out.difference.resize(cube.pixel_count());
  out.reliable.resize(cube.pixel_count());
  for (std::size_t p = 0; p < cube.pixel_count(); ++p) {
    const auto px = cube.pixel(p);
    const double diff = std::abs(static_cast<double>(px[out.channel_a]) - static_cast<double>(px[out.channel_b]));
    out.difference[p] = diff;
    out.reliable[p] = diff <= cfg.threshold;
  }
  return out;
}

}  // namespace thermrange
