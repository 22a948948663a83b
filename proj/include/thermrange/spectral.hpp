#pragma once

// Spectral vocabulary shared by every other module: wavelength grids,
// typed spectra, Planck radiometry, Beer–Lambert transmittance and the
// Gaussian instrument response.
//
// Units: wavelengths in µm, temperatures in K, radiance in microflicks
// (µW·sr⁻¹·cm⁻²·µm⁻¹), attenuation in dB/m, ranges in m.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "thermrange/error.hpp"

namespace thermrange {

/// CODATA 2018 exact SI values.
struct PhysicalConstants {
  static constexpr double planck = 6.62607015e-34;        // J·s
  static constexpr double light_speed = 299792458.0;      // m/s
  static constexpr double boltzmann = 1.380649e-23;       // J/K
  /// W·m⁻²·sr⁻¹·m⁻¹ → µW·cm⁻²·sr⁻¹·µm⁻¹ (1e6 · 1e-4 · 1e-6).
  static constexpr double microflick_per_si = 1e-4;

  /// First radiation constant for spectral radiance, already in microflicks·m⁵.
  static constexpr double c1 = 2.0 * microflick_per_si * planck * light_speed * light_speed;
  /// Second radiation constant hc/k_B in m·K.
  static constexpr double c2 = planck * light_speed / boltzmann;
};

/// Ordered wavelength samples (µm) shared by all spectra of one dataset.
/// Copies share storage; the samples are immutable.
class SpectralGrid {
 public:
  SpectralGrid() = default;

  explicit SpectralGrid(std::vector<double> wavelengths_um) {
    if (wavelengths_um.empty()) throw PreconditionError("spectral grid needs at least one channel");
    for (std::size_t k = 0; k < wavelengths_um.size(); ++k) {
      const double w = wavelengths_um[k];
      if (!std::isfinite(w) || w <= 0.0)
        throw PreconditionError("spectral grid wavelength " + std::to_string(k) + " is not positive");
      if (k > 0 && !(w > wavelengths_um[k - 1]))
        throw PreconditionError("spectral grid is not strictly increasing at channel " + std::to_string(k));
    }
    samples_ = std::make_shared<const std::vector<double>>(std::move(wavelengths_um));
  }

  /// `count` channels evenly spanning [first_um, last_um].
  static SpectralGrid uniform(double first_um, double last_um, std::size_t count) {
    if (count == 0) throw PreconditionError("spectral grid needs at least one channel");
    std::vector<double> w(count);
    if (count == 1) {
      w[0] = first_um;
    } else {
      const double span = last_um - first_um;
      for (std::size_t k = 0; k < count; ++k)
        w[k] = first_um + span * static_cast<double>(k) / static_cast<double>(count - 1);
    }
    return SpectralGrid(std::move(w));
  }

  std::size_t size() const noexcept { return samples_ ? samples_->size() : 0; }
  bool empty() const noexcept { return size() == 0; }
  double operator[](std::size_t k) const { return (*samples_)[k]; }
  double front() const { return samples_->front(); }
  double back() const { return samples_->back(); }
  std::span<const double> wavelengths() const noexcept {
    return samples_ ? std::span<const double>(*samples_) : std::span<const double>();
  }

  /// Index of the channel closest to `wavelength_um`; ties go to the lower index.
  std::size_t nearest(double wavelength_um) const {
    const auto w = wavelengths();
    const auto it = std::lower_bound(w.begin(), w.end(), wavelength_um);
    if (it == w.begin()) return 0;
    if (it == w.end()) return w.size() - 1;
    const auto hi = static_cast<std::size_t>(it - w.begin());
    return (w[hi] - wavelength_um < wavelength_um - w[hi - 1]) ? hi : hi - 1;
  }

  /// Exact element-wise equality; no tolerance.
  friend bool operator==(const SpectralGrid& a, const SpectralGrid& b) {
    if (a.samples_ == b.samples_) return true;
    if (!a.samples_ || !b.samples_) return false;
    return *a.samples_ == *b.samples_;
  }

 private:
  std::shared_ptr<const std::vector<double>> samples_;
};

inline void require_same_grid(const SpectralGrid& a, const SpectralGrid& b, const char* context) {
  if (!(a == b)) {
    std::ostringstream os;
    os << context << ": spectral grids differ (" << a.size() << " vs " << b.size() << " channels)";
    throw GridMismatchError(os.str());
  }
}

// Value constraints for the typed spectra below.
struct RadianceTag {
  static constexpr const char* name = "radiance";
  static bool valid(double v) { return std::isfinite(v); }
};
struct EmissivityTag {
  static constexpr const char* name = "emissivity";
  static bool valid(double v) { return v >= 0.0 && v <= 1.0; }
};
struct AttenuationTag {
  static constexpr const char* name = "attenuation";
  static bool valid(double v) { return std::isfinite(v) && v >= 0.0; }
};

/// A per-channel quantity on a grid. `Tag` fixes the admissible value range.
template <class Tag>
class Spectrum {
 public:
  using tag_type = Tag;

  Spectrum() = default;

  Spectrum(SpectralGrid grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
      throw PreconditionError(std::string(Tag::name) + " spectrum has " + std::to_string(values_.size()) +
                              " values for a " + std::to_string(grid_.size()) + "-channel grid");
    }
    for (std::size_t k = 0; k < values_.size(); ++k) {
      if (!Tag::valid(values_[k]))
        throw DomainError(std::string(Tag::name) + " value out of range at channel " + std::to_string(k));
    }
  }

  /// Same value at every channel.
  static Spectrum constant(const SpectralGrid& grid, double value) {
    return Spectrum(grid, std::vector<double>(grid.size(), value));
  }

  const SpectralGrid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t k) const { return values_[k]; }

 private:
  SpectralGrid grid_;
  std::vector<double> values_;
};

using RadianceSpectrum = Spectrum<RadianceTag>;
using EmissivitySpectrum = Spectrum<EmissivityTag>;
using AttenuationSpectrum = Spectrum<AttenuationTag>;

namespace detail {

inline void require_planck_domain(double wavelength_um, double temperature_k) {
  if (!(wavelength_um > 0.0) || !std::isfinite(wavelength_um))
    throw DomainError("wavelength must be positive, got " + std::to_string(wavelength_um));
  if (!(temperature_k > 0.0) || !std::isfinite(temperature_k))
    throw DomainError("temperature must be positive, got " + std::to_string(temperature_k));
}

}  // namespace detail

/// Black-body spectral radiance B(λ; T) in microflicks.
inline double planck_radiance(double wavelength_um, double temperature_k) {
  detail::require_planck_domain(wavelength_um, temperature_k);
  const double lambda = wavelength_um * 1e-6;
  const double l5 = lambda * lambda * lambda * lambda * lambda;
  return PhysicalConstants::c1 / (l5 * std::expm1(PhysicalConstants::c2 / (lambda * temperature_k)));
}

/// ∂B/∂T in microflicks per K.
inline double planck_temperature_derivative(double wavelength_um, double temperature_k) {
  detail::require_planck_domain(wavelength_um, temperature_k);
  const double lambda = wavelength_um * 1e-6;
  const double x = PhysicalConstants::c2 / (lambda * temperature_k);
  const double l5 = lambda * lambda * lambda * lambda * lambda;
  const double em1 = std::expm1(x);
  // B · x/T · eˣ/(eˣ − 1)
  return PhysicalConstants::c1 / (l5 * em1) * (x / temperature_k) / (-std::expm1(-x));
}

/// Inverse Planck function: the temperature whose black-body radiance at
/// `wavelength_um` equals `radiance` (microflicks).
inline double brightness_temperature(double wavelength_um, double radiance) {
  if (!(wavelength_um > 0.0) || !std::isfinite(wavelength_um))
    throw DomainError("wavelength must be positive, got " + std::to_string(wavelength_um));
  if (!(radiance > 0.0) || !std::isfinite(radiance))
    throw DomainError("radiance must be positive for brightness temperature, got " + std::to_string(radiance));
  const double lambda = wavelength_um * 1e-6;
  const double l5 = lambda * lambda * lambda * lambda * lambda;
  return PhysicalConstants::c2 / (lambda * std::log1p(PhysicalConstants::c1 / (l5 * radiance)));
}

/// B(λ_k; T) at every channel of `grid`.
inline RadianceSpectrum blackbody(const SpectralGrid& grid, double temperature_k) {
  std::vector<double> v(grid.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = planck_radiance(grid[k], temperature_k);
  return RadianceSpectrum(grid, std::move(v));
}

/// Beer–Lambert transmittance τ_k = 10^(−α_k·d/10) for a uniform path of `range_m`.
inline std::vector<double> transmittance(const AttenuationSpectrum& alpha, double range_m) {
  if (!(range_m >= 0.0) || std::isnan(range_m))
    throw DomainError("range must be non-negative, got " + std::to_string(range_m));
  std::vector<double> tau(alpha.size());
  for (std::size_t k = 0; k < tau.size(); ++k) tau[k] = std::pow(10.0, -alpha[k] * range_m / 10.0);
  return tau;
}

/// Gaussian instrumental spectral response.
struct InstrumentResponse {
  double fwhm_nm = 40.0;

  double fwhm_um() const { return fwhm_nm * 1e-3; }
  double sigma_um() const { return fwhm_um() / (2.0 * std::sqrt(2.0 * std::numbers::ln2)); }
  void validate() const {
    if (!(fwhm_nm > 0.0) || !std::isfinite(fwhm_nm))
      throw PreconditionError("ISRF FWHM must be positive, got " + std::to_string(fwhm_nm) + " nm");
  }
};

/// Dense sampling that satisfies `isrf_convolve`'s preconditions for `target`:
/// spacing FWHM/10 and a ±4 FWHM margin.
inline SpectralGrid dense_grid_for(const SpectralGrid& target, const InstrumentResponse& response) {
  response.validate();
  const double fwhm = response.fwhm_um();
  const double step = fwhm / 10.0;
  const double first = target.front() - 4.0 * fwhm;
  const auto count = static_cast<std::size_t>(std::ceil((target.back() + 4.0 * fwhm - first) / step)) + 1;
  std::vector<double> w(count);
  for (std::size_t j = 0; j < count; ++j) w[j] = first + step * static_cast<double>(j);
  return SpectralGrid(std::move(w));
}

/// Channel measurements y_k = Σ f(λ−λ_k)·L(λ)·Δλ of a densely sampled spectrum,
/// with f a Gaussian of the given FWHM. Trapezoidal weights, kernel truncated
/// at ±4 FWHM and renormalized per output channel.
template <class Tag>
Spectrum<Tag> isrf_convolve(const Spectrum<Tag>& fine, const InstrumentResponse& response,
                            const SpectralGrid& target) {
  response.validate();
  const auto dense = fine.grid().wavelengths();
  const double fwhm = response.fwhm_um();
  const double sigma = response.sigma_um();

  const double low_margin = target.front() - dense.front();
  const double high_margin = dense.back() - target.back();
  if (low_margin < 3.0 * fwhm) {
    throw PreconditionError("ISRF convolution: dense grid short-wave margin " + std::to_string(low_margin) +
                            " µm is below 3·FWHM = " + std::to_string(3.0 * fwhm) + " µm");
  }
  if (high_margin < 3.0 * fwhm) {
    throw PreconditionError("ISRF convolution: dense grid long-wave margin " + std::to_string(high_margin) +
                            " µm is below 3·FWHM = " + std::to_string(3.0 * fwhm) + " µm");
  }
  double max_step = 0.0;
  for (std::size_t j = 1; j < dense.size(); ++j) max_step = std::max(max_step, dense[j] - dense[j - 1]);
  // A relative slack absorbs the rounding of grids built as first + j·(FWHM/8).
  if (max_step > fwhm / 8.0 * (1.0 + 1e-9)) {
    throw PreconditionError("ISRF convolution: dense grid spacing " + std::to_string(max_step) +
                            " µm exceeds FWHM/8 = " + std::to_string(fwhm / 8.0) + " µm");
  }

  std::vector<double> trapezoid(dense.size(), 0.0);
  for (std::size_t j = 0; j + 1 < dense.size(); ++j) {
    const double h = 0.5 * (dense[j + 1] - dense[j]);
    trapezoid[j] += h;
    trapezoid[j + 1] += h;
  }

  const auto values = fine.values();
  std::vector<double> out(target.size());
  for (std::size_t k = 0; k < target.size(); ++k) {
    const double centre = target[k];
    const auto lo = std::lower_bound(dense.begin(), dense.end(), centre - 4.0 * fwhm) - dense.begin();
    const auto hi = std::upper_bound(dense.begin(), dense.end(), centre + 4.0 * fwhm) - dense.begin();
    double weight_sum = 0.0;
    double acc = 0.0;
    for (auto j = lo; j < hi; ++j) {
      const double u = (dense[j] - centre) / sigma;
      const double w = trapezoid[j] * std::exp(-0.5 * u * u);
      weight_sum += w;
      acc += w * values[j];
    }
    out[k] = acc / weight_sum;
  }
  return Spectrum<Tag>(target, std::move(out));
}

}  // namespace thermrange
