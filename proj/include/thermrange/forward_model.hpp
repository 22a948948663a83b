#pragma once

// Observed radiance of an opaque object seen through a uniform absorbing and
// emitting air path, and batch simulation of hyperspectral cubes.
//
//   L_k = τ_k (ε_k B(λ_k; T) − B(λ_k; T_air)) + B(λ_k; T_air),  τ_k = 10^(−α_k d/10)
//
// optionally plus the diffusely reflected environment
//   τ_k (1 − ε_k) Σ_i (Ω_i/π) L_{e,i}(λ_k).

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "thermrange/atmosphere.hpp"
#include "thermrange/error.hpp"
#include "thermrange/parallel.hpp"
#include "thermrange/random.hpp"
#include "thermrange/spectral.hpp"

namespace thermrange {

struct ScenePixel {
  double range_m = 0.0;
  double temperature_k = 0.0;
  EmissivitySpectrum emissivity;

  void validate() const {
    if (!(range_m >= 0.0) || !std::isfinite(range_m))
      throw DomainError("pixel range must be finite and non-negative, got " + std::to_string(range_m));
    if (!(temperature_k >= 150.0 && temperature_k <= 400.0))
      throw DomainError("pixel temperature " + std::to_string(temperature_k) + " K outside [150, 400] K");
  }
};

/// One diffuse environmental emitter seen by the object.
struct EnvironmentalSource {
  RadianceSpectrum radiance;
  double solid_angle_sr = 0.0;
};

inline void validate_sources(std::span<const EnvironmentalSource> sources) {
  double total = 0.0;
  for (const auto& s : sources) {
    if (!(s.solid_angle_sr > 0.0 && s.solid_angle_sr <= 2.0 * std::numbers::pi))
      throw DomainError("source solid angle must lie in (0, 2π] sr, got " + std::to_string(s.solid_angle_sr));
    total += s.solid_angle_sr / std::numbers::pi;
  }
  if (total > 2.0 + 1e-12) throw DomainError("sum of source solid angles exceeds 2π sr");
}

struct NoiseModel {
  double sigma = 0.0;  // microflicks
  std::uint64_t seed = 0;

  void validate() const {
    if (!(sigma >= 0.0) || !std::isfinite(sigma))
      throw DomainError("noise sigma must be non-negative, got " + std::to_string(sigma));
  }
};

namespace detail {

inline std::vector<double> observe_values(const ScenePixel& pixel, const AtmosphereState& atmo) {
  pixel.validate();
  require_same_grid(pixel.emissivity.grid(), atmo.grid(), "observe");
  const auto& grid = atmo.grid();
  const auto tau = transmittance(atmo.attenuation, pixel.range_m);
  std::vector<double> out(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double b_air = planck_radiance(grid[k], atmo.t_air);
    const double emission = pixel.emissivity[k] * planck_radiance(grid[k], pixel.temperature_k);
    out[k] = tau[k] * (emission - b_air) + b_air;
  }
  return out;
}

}  // namespace detail

/// Emission plus air-path model (no reflection).
inline RadianceSpectrum observe(const ScenePixel& pixel, const AtmosphereState& atmo) {
  return RadianceSpectrum(atmo.grid(), detail::observe_values(pixel, atmo));
}

/// `observe` plus the reflected radiance of the given environmental sources.
inline RadianceSpectrum observe_with_reflection(const ScenePixel& pixel, const AtmosphereState& atmo,
                                                std::span<const EnvironmentalSource> sources) {
  auto out = detail::observe_values(pixel, atmo);
  if (sources.empty()) return RadianceSpectrum(atmo.grid(), std::move(out));
  validate_sources(sources);
  for (const auto& s : sources) require_same_grid(s.radiance.grid(), atmo.grid(), "observe_with_reflection");
  const auto tau = transmittance(atmo.attenuation, pixel.range_m);
  for (std::size_t k = 0; k < out.size(); ++k) {
    double incident = 0.0;
    for (const auto& s : sources) incident += s.solid_angle_sr / std::numbers::pi * s.radiance[k];
    out[k] += tau[k] * (1.0 - pixel.emissivity[k]) * incident;
  }
  return RadianceSpectrum(atmo.grid(), std::move(out));
}

/// Adds independent N(0, σ²) noise. Element k draws from (seed, stream, k),
/// so the same stream reproduces the same noise.
inline RadianceSpectrum add_noise(const RadianceSpectrum& spectrum, const NoiseModel& noise,
                                  std::uint64_t stream = 0) {
  noise.validate();
  if (noise.sigma == 0.0) return spectrum;
  const CounterRng rng(noise.seed);
  std::vector<double> v(spectrum.values().begin(), spectrum.values().end());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] += noise.sigma * rng.normal(stream, k);
  return RadianceSpectrum(spectrum.grid(), std::move(v));
}

/// H×W×K radiance cube in microflicks. Values are stored pixel-interleaved
/// (all channels of pixel (0,0), then pixel (0,1), ...) as 32-bit floats.
class HyperCube {
 public:
  HyperCube() = default;

  HyperCube(std::size_t height, std::size_t width, SpectralGrid grid, std::vector<float> values, double t_air,
            std::string provenance = {})
      : height_(height),
        width_(width),
        grid_(std::move(grid)),
        values_(std::move(values)),
        t_air_(t_air),
        provenance_(std::move(provenance)) {
    if (height_ == 0 || width_ == 0) throw PreconditionError("cube dimensions must be positive");
    if (values_.size() != height_ * width_ * grid_.size())
      throw PreconditionError("cube value count does not match H·W·K");
    for (std::size_t i = 0; i < values_.size(); ++i)
      if (!std::isfinite(values_[i])) throw DomainError("cube value " + std::to_string(i) + " is not finite");
  }

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t channels() const noexcept { return grid_.size(); }
  std::size_t pixel_count() const noexcept { return height_ * width_; }
  const SpectralGrid& grid() const noexcept { return grid_; }
  double t_air() const noexcept { return t_air_; }
  const std::string& provenance() const noexcept { return provenance_; }
  std::span<const float> values() const noexcept { return values_; }

  std::span<const float> pixel(std::size_t index) const {
    return std::span<const float>(values_).subspan(index * channels(), channels());
  }
  std::span<const float> pixel(std::size_t row, std::size_t col) const { return pixel(row * width_ + col); }
  float at(std::size_t row, std::size_t col, std::size_t channel) const {
    return values_[(row * width_ + col) * channels() + channel];
  }

  RadianceSpectrum spectrum(std::size_t index) const {
    const auto p = pixel(index);
    return RadianceSpectrum(grid_, std::vector<double>(p.begin(), p.end()));
  }
  RadianceSpectrum spectrum(std::size_t row, std::size_t col) const { return spectrum(row * width_ + col); }

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  SpectralGrid grid_;
  std::vector<float> values_;
  double t_air_ = 0.0;
  std::string provenance_;
};

/// Adds noise to every element of a cube; element (pixel p, channel k) draws
/// from (seed, p, k), matching `simulate_cube`.
inline HyperCube add_noise(const HyperCube& cube, const NoiseModel& noise) {
  noise.validate();
  if (noise.sigma == 0.0) return cube;
  const CounterRng rng(noise.seed);
  const std::size_t k_count = cube.channels();
  std::vector<float> v(cube.values().begin(), cube.values().end());
  for (std::size_t p = 0; p < cube.pixel_count(); ++p)
    for (std::size_t k = 0; k < k_count; ++k) {
      auto& x = v[p * k_count + k];
      x = static_cast<float>(static_cast<double>(x) + noise.sigma * rng.normal(p, k));
    }
  return HyperCube(cube.height(), cube.width(), cube.grid(), std::move(v), cube.t_air(), cube.provenance());
}

/// Ground truth for a synthetic scene. Pixels are row-major. A pixel whose
/// `reflection` entry is set also reflects the sources of that set.
struct SceneTruth {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<ScenePixel> pixels;
  std::vector<std::optional<std::size_t>> reflection;  // empty ⇒ no reflection anywhere
  std::vector<std::vector<EnvironmentalSource>> reflection_sets;
  AtmosphereState atmosphere;

  const ScenePixel& at(std::size_t row, std::size_t col) const { return pixels[row * width + col]; }

  void validate() const {
    if (height == 0 || width == 0) throw PreconditionError("scene dimensions must be positive");
    if (pixels.size() != height * width)
      throw PreconditionError("scene has " + std::to_string(pixels.size()) + " pixels, expected H·W = " +
                              std::to_string(height * width));
    if (!reflection.empty() && reflection.size() != pixels.size())
      throw PreconditionError("reflection map size does not match pixel count");
    for (const auto& r : reflection)
      if (r && *r >= reflection_sets.size()) throw PreconditionError("reflection set index out of range");
    atmosphere.validate();
  }
};

/// Per-pixel forward model followed by additive noise. The output does not
/// depend on `workers`.
inline HyperCube simulate_cube(const SceneTruth& truth, const NoiseModel& noise, unsigned workers = 1) {
  truth.validate();
  noise.validate();
  const auto& atmo = truth.atmosphere;
  const std::size_t k_count = atmo.grid().size();
  std::vector<float> values(truth.pixels.size() * k_count);
  const CounterRng rng(noise.seed);

  parallel_for(truth.pixels.size(), workers, [&](std::size_t p) {
    const auto& px = truth.pixels[p];
    const bool reflects = !truth.reflection.empty() && truth.reflection[p].has_value();
    const RadianceSpectrum clean = reflects
                                       ? observe_with_reflection(px, atmo, truth.reflection_sets[*truth.reflection[p]])
                                       : observe(px, atmo);
    for (std::size_t k = 0; k < k_count; ++k) {
      double v = clean[k];
      if (noise.sigma > 0.0) v += noise.sigma * rng.normal(p, k);
      values[p * k_count + k] = static_cast<float>(v);
    }
  });
  return HyperCube(truth.height, truth.width, atmo.grid(), std::move(values), atmo.t_air, atmo.provenance);
}

}  // namespace thermrange
