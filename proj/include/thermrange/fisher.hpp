#pragma once

// Fisher information about range under additive white Gaussian noise.

#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "thermrange/error.hpp"
#include "thermrange/forward_model.hpp"

namespace thermrange {

/// ∂µ_k/∂d of the emission-plus-air model, per channel (microflicks per m).
inline std::vector<double> range_sensitivity(const ScenePixel& pixel, const AtmosphereState& atmo) {
  pixel.validate();
  require_same_grid(pixel.emissivity.grid(), atmo.grid(), "range_sensitivity");
  const auto& grid = atmo.grid();
  const auto tau = transmittance(atmo.attenuation, pixel.range_m);
  std::vector<double> out(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double contrast =
        pixel.emissivity[k] * planck_radiance(grid[k], pixel.temperature_k) - planck_radiance(grid[k], atmo.t_air);
    out[k] = -(std::numbers::ln10 / 10.0) * atmo.attenuation[k] * tau[k] * contrast;
  }
  return out;
}

struct FisherProfile {
  SpectralGrid grid;
  std::vector<double> per_channel;          // I_k(d), m⁻²
  std::vector<double> normalized;           // I_k/I; empty when degenerate
  double total = 0.0;                       // I(d)
  std::optional<double> crlb_std;           // I(d)^(-1/2) in m; unset when degenerate

  bool degenerate() const noexcept { return !(total > 0.0); }
};

inline FisherProfile fisher_profile(const ScenePixel& pixel, const AtmosphereState& atmo, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw DomainError("noise sigma must be positive for Fisher information, got " + std::to_string(sigma));
  const auto slope = range_sensitivity(pixel, atmo);
  FisherProfile out;
  out.grid = atmo.grid();
  out.per_channel.resize(slope.size());
  const double inv_var = 1.0 / (sigma * sigma);
  for (std::size_t k = 0; k < slope.size(); ++k) {
    out.per_channel[k] = slope[k] * slope[k] * inv_var;
    out.total += out.per_channel[k];
  }
  if (out.total > 0.0) {
    out.normalized.resize(slope.size());
    for (std::size_t k = 0; k < slope.size(); ++k) out.normalized[k] = out.per_channel[k] / out.total;
    out.crlb_std = 1.0 / std::sqrt(out.total);
  }
  return out;
}

/// Attenuation (dB/m) that maximizes single-channel information at range d:
/// α*(d) = 10 / (ln 10 · d), i.e. α*·d ≈ 4.34 dB (one neper of amplitude).
inline double optimal_attenuation(double range_m) {
  if (!(range_m > 0.0) || !std::isfinite(range_m))
    throw DomainError("optimal attenuation needs a positive range, got " + std::to_string(range_m));
  return 10.0 / (std::numbers::ln10 * range_m);
}

}  // namespace thermrange
