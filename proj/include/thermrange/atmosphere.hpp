#pragma once

// Atmospheric state used for simulation and inversion: air temperature,
// attenuation spectrum, and synthetic stand-ins for line-database spectra
// and downwelling sky radiance.

#include <cmath>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "thermrange/error.hpp"
#include "thermrange/spectral.hpp"
#include "thermrange/spectrum_csv.hpp"

namespace thermrange {

struct AtmosphereState {
  double t_air = 0.0;  // K
  AttenuationSpectrum attenuation;
  std::string provenance;

  AtmosphereState() = default;
  AtmosphereState(double air_temperature, AttenuationSpectrum alpha, std::string label = {})
      : t_air(air_temperature), attenuation(std::move(alpha)), provenance(std::move(label)) {
    validate();
  }

  const SpectralGrid& grid() const noexcept { return attenuation.grid(); }

  void validate() const {
    if (!(t_air >= 150.0 && t_air <= 400.0))
      throw DomainError("air temperature " + std::to_string(t_air) + " K outside [150, 400] K");
  }
};

/// Interpolates a Spectrum CSV of attenuation (dB/m) onto `grid`.
/// Negative values are rejected; the file must cover the whole grid.
inline AttenuationSpectrum load_attenuation(const std::filesystem::path& path, const SpectralGrid& grid) {
  using Reason = SpectrumFileError::Reason;
  const auto table = read_spectrum_table(path);
  const auto& w = table.wavelengths_um;
  const auto& a = table.values;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < 0.0) {
      throw SpectrumFileError(Reason::negative_value, i + 2,
                              path.string() + ": line " + std::to_string(i + 2) + ": negative attenuation " +
                                  std::to_string(a[i]) + " dB/m");
    }
  }
  if (grid.front() < w.front()) {
    throw SpectrumFileError(Reason::coverage_gap, 0,
                            path.string() + ": file starts at " + std::to_string(w.front()) +
                                " µm, after grid start " + std::to_string(grid.front()) + " µm");
  }
  if (grid.back() > w.back()) {
    throw SpectrumFileError(Reason::coverage_gap, 0,
                            path.string() + ": file ends at " + std::to_string(w.back()) +
                                " µm, before grid end " + std::to_string(grid.back()) + " µm");
  }

  std::vector<double> out(grid.size());
  std::size_t seg = 0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double x = grid[k];
    while (seg + 1 < w.size() && w[seg + 1] < x) ++seg;
    if (w[seg] == x || seg + 1 == w.size()) {
      out[k] = a[seg];
    } else if (w[seg + 1] == x) {
      out[k] = a[seg + 1];
    } else {
      const double t = (x - w[seg]) / (w[seg + 1] - w[seg]);
      out[k] = a[seg] + t * (a[seg + 1] - a[seg]);
    }
  }
  return AttenuationSpectrum(grid, std::move(out));
}

struct AbsorptionLine {
  double center_um = 0.0;
  double peak_db_per_m = 0.0;
  double half_width_um = 0.0;
};

/// Sum of Lorentzian lines over a flat continuum.
struct SyntheticLineModel {
  std::vector<AbsorptionLine> lines;
  double continuum_db_per_m = 0.0;

  void validate(const SpectralGrid& grid) const {
    if (!(continuum_db_per_m >= 0.0) || !std::isfinite(continuum_db_per_m))
      throw PreconditionError("line model continuum must be non-negative");
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const auto& l = lines[i];
      const std::string where = "line " + std::to_string(i) + " at " + std::to_string(l.center_um) + " µm";
      if (!(l.peak_db_per_m >= 0.0) || !std::isfinite(l.peak_db_per_m))
        throw PreconditionError(where + ": peak must be non-negative");
      if (!(l.half_width_um > 0.0) || !std::isfinite(l.half_width_um))
        throw PreconditionError(where + ": half-width must be positive");
      if (l.center_um < grid.front() || l.center_um > grid.back())
        throw PreconditionError(where + ": centre outside grid span");
    }
  }

  double evaluate(double wavelength_um) const {
    double a = continuum_db_per_m;
    for (const auto& l : lines) {
      const double dx = wavelength_um - l.center_um;
      const double w2 = l.half_width_um * l.half_width_um;
      a += l.peak_db_per_m * w2 / (dx * dx + w2);
    }
    return a;
  }
};

/// Samples the line model directly on `grid`.
inline AttenuationSpectrum synthesize_attenuation(const SyntheticLineModel& model, const SpectralGrid& grid) {
  model.validate(grid);
  std::vector<double> a(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) a[k] = model.evaluate(grid[k]);
  return AttenuationSpectrum(grid, std::move(a));
}

/// Samples the line model on a dense grid and integrates it against the
/// instrument response of each channel of `grid`.
inline AttenuationSpectrum synthesize_attenuation(const SyntheticLineModel& model, const SpectralGrid& grid,
                                                  const InstrumentResponse& response) {
  model.validate(grid);
  const SpectralGrid dense = dense_grid_for(grid, response);
  std::vector<double> a(dense.size());
  for (std::size_t j = 0; j < dense.size(); ++j) a[j] = model.evaluate(dense[j]);
  return isrf_convolve(AttenuationSpectrum(dense, std::move(a)), response, grid);
}

struct OzoneFeature {
  double center_um = 9.6;
  double amplitude = 0.0;  // microflicks
  double width_um = 0.05;  // Gaussian standard deviation
};

/// Sky radiance reaching the scene from above, with the stratospheric ozone
/// signature near 9.6 µm.
struct DownwellingModel {
  RadianceSpectrum base;
  OzoneFeature ozone;

  void validate() const {
    for (std::size_t k = 0; k < base.size(); ++k)
      if (base[k] < 0.0) throw PreconditionError("downwelling base radiance negative at channel " + std::to_string(k));
    if (!(ozone.amplitude >= 0.0)) throw PreconditionError("ozone amplitude must be non-negative");
    if (!(ozone.width_um > 0.0)) throw PreconditionError("ozone feature width must be positive");
  }

  /// Feature profile added to the base at `wavelength_um`.
  double feature(double wavelength_um) const {
    const double u = (wavelength_um - ozone.center_um) / ozone.width_um;
    return ozone.amplitude * std::exp(-0.5 * u * u);
  }
};

/// Base sky spectrum plus a Gaussian ozone emission feature, on `grid`.
inline RadianceSpectrum synthesize_downwelling(const DownwellingModel& model, const SpectralGrid& grid) {
  model.validate();
  require_same_grid(model.base.grid(), grid, "synthesize_downwelling");
  std::vector<double> v(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) v[k] = model.base[k] + model.feature(grid[k]);
  return RadianceSpectrum(grid, std::move(v));
}

}  // namespace thermrange
