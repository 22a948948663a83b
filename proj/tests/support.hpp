#pragma once

#include <filesystem>
#include <string>

#include "thermrange/harness/config.hpp"
#include "thermrange/harness/setup.hpp"

namespace thermrange::testing {

inline harness::Config preset(const std::string& name) {
  return harness::Config::load(std::filesystem::path(THERMRANGE_PRESET_DIR) / (name + ".cfg"));
}

/// The synthetic line atmosphere shared by the scene presets.
inline const AtmosphereState& reference_atmosphere() {
  static const AtmosphereState atmo = harness::load_atmosphere(preset("ramp-scene"));
  return atmo;
}

/// Smooth rock-like emissivity used throughout the ramp scene.
inline EmissivitySpectrum rock_emissivity(const SpectralGrid& grid) {
  return harness::parse_material("dip:0.95:0.005:9.3:0.6", grid);
}

/// Fresh, empty scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("thermrange_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline double relative_error(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace thermrange::testing
