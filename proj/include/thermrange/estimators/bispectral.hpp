#pragma once

// Closed-form range from one absorptive and one clear channel, assuming the
// object-minus-air emission factor ε B(λ;T) − B(λ;T_air) is equal at both.

#include <array>
#include <cmath>
#include <variant>

#include "thermrange/atmosphere.hpp"
#include "thermrange/error.hpp"
#include "thermrange/spectral.hpp"

namespace thermrange {

/// Air temperature from the brightness temperature of a channel whose path
/// transmittance is close to zero. On a transparent channel this returns
/// (roughly) the object's brightness temperature instead.
inline double estimate_air_temperature(const RadianceSpectrum& spectrum, std::size_t saturated_channel) {
  if (saturated_channel >= spectrum.size())
    throw PreconditionError("saturated channel " + std::to_string(saturated_channel) + " outside spectrum");
  return brightness_temperature(spectrum.grid()[saturated_channel], spectrum[saturated_channel]);
}

struct FixedAirTemperature {
  double kelvin = 0.0;
};
struct SaturatedChannel {
  std::size_t index = 0;
};

enum class AirEmission {
  modeled,    // invert the emission-plus-air model
  neglected,  // invert the attenuated-object term only (classic two-colour ranging)
};

struct BispectralConfig {
  std::size_t band1 = 0;  // absorptive
  std::size_t band2 = 0;  // clear
  std::variant<FixedAirTemperature, SaturatedChannel> t_air_source = FixedAirTemperature{};
  AirEmission air = AirEmission::modeled;

  void validate(const AtmosphereState& atmo) const {
    const auto k = atmo.grid().size();
    if (band1 >= k || band2 >= k) throw PreconditionError("bispectral band index outside grid");
    if (band1 == band2) throw PreconditionError("bispectral bands must differ");
    if (atmo.attenuation[band1] == atmo.attenuation[band2])
      throw PreconditionError("bispectral bands have identical attenuation");
    if (const auto* s = std::get_if<SaturatedChannel>(&t_air_source); s && s->index >= k)
      throw PreconditionError("saturated channel index outside grid");
  }
};

inline double resolve_air_temperature(const RadianceSpectrum& spectrum, const BispectralConfig& cfg) {
  if (const auto* fixed = std::get_if<FixedAirTemperature>(&cfg.t_air_source)) return fixed->kelvin;
  return estimate_air_temperature(spectrum, std::get<SaturatedChannel>(cfg.t_air_source).index);
}

/// Range estimate in m. Negative values are returned as computed.
/// Throws UndefinedEstimateError when the log-ratio argument is not positive.
inline double bispectral_range(const RadianceSpectrum& spectrum, const AtmosphereState& atmo,
                               const BispectralConfig& cfg) {
  require_same_grid(spectrum.grid(), atmo.grid(), "bispectral_range");
  cfg.validate(atmo);
  const auto& grid = atmo.grid();
  const double a1 = atmo.attenuation[cfg.band1];
  const double a2 = atmo.attenuation[cfg.band2];

  double num = spectrum[cfg.band1];
  double den = spectrum[cfg.band2];
  if (cfg.air == AirEmission::modeled) {
    const double t_air = resolve_air_temperature(spectrum, cfg);
    num -= planck_radiance(grid[cfg.band1], t_air);
    den -= planck_radiance(grid[cfg.band2], t_air);
  }
  if (den == 0.0) throw UndefinedEstimateError("bispectral ratio has a zero denominator");
  const double ratio = num / den;
  if (!(ratio > 0.0) || !std::isfinite(ratio))
    throw UndefinedEstimateError("bispectral ratio " + std::to_string(ratio) + " is not positive");
  return -10.0 / (a1 - a2) * std::log10(ratio);
}

/// Object radiance ε_i B(λ_i; T) at the two bands, recovered by undoing the
/// path at range `range_hat`.
inline std::array<double, 2> bispectral_object_radiance(const RadianceSpectrum& spectrum,
                                                        const AtmosphereState& atmo, double range_hat,
                                                        const BispectralConfig& cfg) {
  if (!std::isfinite(range_hat)) throw DomainError("range estimate must be finite");
  require_same_grid(spectrum.grid(), atmo.grid(), "bispectral_object_radiance");
  cfg.validate(atmo);
  const double t_air = resolve_air_temperature(spectrum, cfg);
  std::array<double, 2> out{};
  const std::array<std::size_t, 2> bands{cfg.band1, cfg.band2};
  for (std::size_t i = 0; i < 2; ++i) {
    const std::size_t k = bands[i];
    const double b_air = planck_radiance(atmo.grid()[k], t_air);
    const double tau = std::pow(10.0, -atmo.attenuation[k] * range_hat / 10.0);
    out[i] = (spectrum[k] - b_air) / tau + b_air;
  }
  return out;
}

}  // namespace thermrange
