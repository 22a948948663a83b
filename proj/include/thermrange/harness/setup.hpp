#pragma once

// Builds library objects (grid, atmosphere, scene truth, estimator settings)
// from a flat experiment configuration.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "thermrange/atmosphere.hpp"
#include "thermrange/error.hpp"
#include "thermrange/estimators/bispectral.hpp"
#include "thermrange/estimators/hyperspectral.hpp"
#include "thermrange/estimators/ozone_mask.hpp"
#include "thermrange/forward_model.hpp"
#include "thermrange/harness/config.hpp"
#include "thermrange/text.hpp"

namespace thermrange::harness {

inline SpectralGrid load_grid(const Config& cfg) {
  const double first = cfg.get_double("grid.first_um", 8.0);
  const double last = cfg.get_double("grid.last_um", 13.2);
  const auto count = cfg.get_int("grid.channels", 256);
  if (count < 1) throw ConfigError("grid.channels must be at least 1");
  if (!(first > 0.0 && last >= first)) throw ConfigError("grid.first_um/grid.last_um must satisfy 0 < first ≤ last");
  return SpectralGrid::uniform(first, last, static_cast<std::size_t>(count));
}

/// Reads a line list CSV with header `center_um,peak_db_per_m,half_width_um`.
inline std::vector<AbsorptionLine> read_line_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open line list " + path.string());
  std::vector<AbsorptionLine> lines;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (row == 1) {
      if (text::trim(line) != "center_um,peak_db_per_m,half_width_um")
        throw ConfigError(path.string() + ": line 1: expected header 'center_um,peak_db_per_m,half_width_um'");
      continue;
    }
    if (text::trim(line).empty()) continue;
    const auto fields = text::split(line, ',');
    if (fields.size() != 3) throw ConfigError(path.string() + ": line " + std::to_string(row) + ": expected 3 fields");
    const auto c = text::parse_double(fields[0]);
    const auto p = text::parse_double(fields[1]);
    const auto w = text::parse_double(fields[2]);
    if (!c || !p || !w) throw ConfigError(path.string() + ": line " + std::to_string(row) + ": malformed number");
    lines.push_back({*c, *p, *w});
  }
  return lines;
}

/// Atmosphere from either `atmo.csv` (attenuation Spectrum CSV) or
/// `atmo.lines` (line list, optionally ISRF-broadened), plus `atmo.t_air`,
/// sampled on `grid`.
inline AtmosphereState load_atmosphere_on(const Config& cfg, const SpectralGrid& grid) {
  const double t_air = cfg.get_double("atmo.t_air");
  if (cfg.has("atmo.csv")) {
    const auto path = cfg.get_path("atmo.csv");
    return AtmosphereState(t_air, load_attenuation(path, grid), "csv:" + path.filename().string());
  }
  if (!cfg.has("atmo.lines")) throw ConfigError("config needs either atmo.csv or atmo.lines");
  const auto path = cfg.get_path("atmo.lines");
  SyntheticLineModel model{read_line_list(path), cfg.get_double("atmo.continuum_db_per_m", 0.0)};
  const double fwhm_nm = cfg.get_double("atmo.isrf_fwhm_nm", 40.0);
  std::string provenance = "lines:" + path.filename().string() + " isrf_nm=" + text::format_double(fwhm_nm);
  if (fwhm_nm == 0.0) return AtmosphereState(t_air, synthesize_attenuation(model, grid), provenance);
  return AtmosphereState(t_air, synthesize_attenuation(model, grid, InstrumentResponse{fwhm_nm}), provenance);
}

inline AtmosphereState load_atmosphere(const Config& cfg) { return load_atmosphere_on(cfg, load_grid(cfg)); }

/// Emissivity from a material spec:
///   flat:<value>
///   dip:<base>:<depth>:<center_um>:<width_um>   base − depth·exp(−((λ−center)/width)²)
inline EmissivitySpectrum parse_material(std::string_view spec, const SpectralGrid& grid) {
  const auto parts = text::split(spec, ':');
  std::vector<double> num;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const auto v = text::parse_double(text::trim(parts[i]));
    if (!v) throw ConfigError("material '" + std::string(spec) + "': malformed number");
    num.push_back(*v);
  }
  const auto kind = text::trim(parts.front());
  std::vector<double> eps(grid.size());
  if (kind == "flat" && num.size() == 1) {
    std::fill(eps.begin(), eps.end(), num[0]);
  } else if (kind == "dip" && num.size() == 4) {
    if (!(num[3] > 0.0)) throw ConfigError("material '" + std::string(spec) + "': width must be positive");
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double u = (grid[k] - num[2]) / num[3];
      eps[k] = num[0] - num[1] * std::exp(-u * u);
    }
  } else {
    throw ConfigError("material '" + std::string(spec) + "': expected flat:<v> or dip:<base>:<depth>:<center>:<width>");
  }
  for (const double e : eps)
    if (!(e >= 0.0 && e <= 1.0)) throw ConfigError("material '" + std::string(spec) + "' leaves [0, 1]");
  return EmissivitySpectrum(grid, std::move(eps));
}

/// Sky radiance: base_emissivity·B(λ; base_temperature) plus the ozone bump.
inline RadianceSpectrum load_sky(const Config& cfg, const SpectralGrid& grid) {
  const double t_sky = cfg.get_double("sky.base_temperature_k", 250.0);
  const double scale = cfg.get_double("sky.base_emissivity", 0.3);
  std::vector<double> base(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) base[k] = scale * planck_radiance(grid[k], t_sky);
  DownwellingModel model{RadianceSpectrum(grid, std::move(base)),
                         OzoneFeature{cfg.get_double("sky.ozone_center_um", 9.6),
                                      cfg.get_double("sky.ozone_amplitude", 16.0),
                                      cfg.get_double("sky.ozone_width_um", 0.05)}};
  return synthesize_downwelling(model, grid);
}

struct HalfOpenRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool contains(std::size_t i) const noexcept { return i >= begin && i < end; }
};

inline HalfOpenRange parse_span(const Config& cfg, const std::string& key, std::size_t limit) {
  const auto v = cfg.get_string(key);
  const auto parts = text::split(v, ':');
  const auto a = parts.size() == 2 ? text::parse_int(text::trim(parts[0])) : std::nullopt;
  const auto b = parts.size() == 2 ? text::parse_int(text::trim(parts[1])) : std::nullopt;
  if (!a || !b || *a < 0 || *b < *a || static_cast<std::size_t>(*b) > limit)
    throw ConfigError(key + ": '" + v + "' is not a span begin:end within 0.." + std::to_string(limit));
  return {static_cast<std::size_t>(*a), static_cast<std::size_t>(*b)};
}

/// Scene truth plus the region each pixel belongs to.
struct Scene {
  SceneTruth truth;
  std::vector<std::string> region_names;
  std::vector<EmissivitySpectrum> region_emissivity;
  std::vector<std::size_t> region;  // per pixel
};

/// Layouts:
///   row   one pixel per entry of scene.ranges_m across the columns
///   ramp  range linear in column from scene.range_min_m to scene.range_max_m
/// An optional panel block (scene.panel.rows / scene.panel.cols) gets its own
/// material and, unless scene.panel.reflect = false, reflects the sky.
inline Scene build_scene(const Config& cfg, const AtmosphereState& atmo) {
  const auto& grid = atmo.grid();
  const auto layout = cfg.get_string("scene.layout", "ramp");
  Scene scene;
  auto& truth = scene.truth;
  truth.atmosphere = atmo;

  std::vector<double> column_range;
  if (layout == "row") {
    column_range = cfg.get_doubles("scene.ranges_m");
    truth.width = column_range.size();
    truth.height = static_cast<std::size_t>(cfg.get_int("scene.height", 1));
  } else if (layout == "ramp") {
    truth.height = static_cast<std::size_t>(cfg.get_int("scene.height"));
    truth.width = static_cast<std::size_t>(cfg.get_int("scene.width"));
    const double lo = cfg.get_double("scene.range_min_m");
    const double hi = cfg.get_double("scene.range_max_m");
    for (std::size_t c = 0; c < truth.width; ++c)
      column_range.push_back(truth.width == 1 ? lo : lo + (hi - lo) * static_cast<double>(c) /
                                                            static_cast<double>(truth.width - 1));
  } else {
    throw ConfigError("scene.layout: unknown layout '" + layout + "' (expected row or ramp)");
  }
  if (truth.height == 0 || truth.width == 0) throw ConfigError("scene dimensions must be positive");

  const double delta_t = cfg.get_double("scene.delta_t_k", 0.0);
  scene.region_names.push_back("background");
  scene.region_emissivity.push_back(parse_material(cfg.get_string("scene.material", "flat:0.98"), grid));

  const bool has_panel = cfg.has("scene.panel.rows") || cfg.has("scene.panel.cols");
  HalfOpenRange rows{}, cols{};
  double panel_delta_t = delta_t;
  bool panel_reflects = false;
  if (has_panel) {
    rows = parse_span(cfg, "scene.panel.rows", truth.height);
    cols = parse_span(cfg, "scene.panel.cols", truth.width);
    panel_delta_t = cfg.get_double("scene.panel.delta_t_k", delta_t);
    panel_reflects = cfg.get_bool("scene.panel.reflect", true);
    scene.region_names.push_back("panel");
    scene.region_emissivity.push_back(parse_material(cfg.get_string("scene.panel.material", "flat:0.3"), grid));
    if (panel_reflects) {
      const double omega = cfg.get_double("sky.solid_angle_sr", std::numbers::pi);
      truth.reflection_sets.push_back({EnvironmentalSource{load_sky(cfg, grid), omega}});
      validate_sources(truth.reflection_sets.back());
      truth.reflection.assign(truth.height * truth.width, std::nullopt);
    }
  }

  for (std::size_t r = 0; r < truth.height; ++r)
    for (std::size_t c = 0; c < truth.width; ++c) {
      const bool in_panel = has_panel && rows.contains(r) && cols.contains(c);
      const std::size_t region = in_panel ? 1 : 0;
      const double t = atmo.t_air + (in_panel ? panel_delta_t : delta_t);
      truth.pixels.push_back(ScenePixel{column_range[c], t, scene.region_emissivity[region]});
      scene.region.push_back(region);
      if (in_panel && panel_reflects) truth.reflection[r * truth.width + c] = 0;
    }
  for (const auto& p : truth.pixels) p.validate();
  truth.validate();
  return scene;
}

inline NoiseModel load_noise(const Config& cfg) {
  NoiseModel n{cfg.get_double("noise.sigma", 0.0), cfg.get_u64("noise.seed", 0)};
  if (!(n.sigma >= 0.0) || !std::isfinite(n.sigma)) throw ConfigError("noise.sigma must be non-negative and finite");
  return n;
}

enum class EstimatorKind { hyperspectral, bispectral, bispectral_no_air };

inline EstimatorKind parse_estimator(const std::string& name) {
  if (name == "hyperspectral") return EstimatorKind::hyperspectral;
  if (name == "bispectral") return EstimatorKind::bispectral;
  if (name == "bispectral-no-air") return EstimatorKind::bispectral_no_air;
  throw ConfigError("unknown estimator '" + name + "' (expected hyperspectral, bispectral, bispectral-no-air)");
}

inline const char* to_string(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::hyperspectral: return "hyperspectral";
    case EstimatorKind::bispectral: return "bispectral";
    case EstimatorKind::bispectral_no_air: return "bispectral-no-air";
  }
  return "unknown";
}

inline HyperspectralConfig load_hyperspectral_config(const Config& cfg) {
  HyperspectralConfig h;
  h.rho = cfg.get_double("hyper.rho", h.rho);
  h.iterations = cfg.get_int("hyper.iterations", h.iterations);
  h.init_range_m = cfg.get_double("hyper.init_range_m", h.init_range_m);
  h.init_temperature_k = cfg.get_double("hyper.init_temperature_k", h.init_temperature_k);
  h.init_emissivity = cfg.get_double("hyper.init_emissivity", h.init_emissivity);
  h.max_range_m = cfg.get_double("hyper.max_range_m", h.max_range_m);
  h.gradient_tolerance = cfg.get_double("hyper.gradient_tolerance", h.gradient_tolerance);
  const auto solver = cfg.get_string("hyper.solver", "levenberg-marquardt");
  if (solver == "levenberg-marquardt") {
    h.solver = Solver::levenberg_marquardt;
  } else if (solver == "projected-gradient") {
    h.solver = Solver::projected_gradient;
  } else {
    throw ConfigError("hyper.solver: unknown solver '" + solver + "'");
  }
  try {
    h.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("hyper.") + e.what());
  }
  return h;
}

/// Bands are given by wavelength (nearest channel). `bisp.t_air` is either a
/// temperature in K, `atmo` (the atmosphere's value), or `saturated:<µm>`.
inline BispectralConfig load_bispectral_config(const Config& cfg, const AtmosphereState& atmo, EstimatorKind kind) {
  BispectralConfig b;
  b.band1 = atmo.grid().nearest(cfg.get_double("bisp.band1_um", 8.42));
  b.band2 = atmo.grid().nearest(cfg.get_double("bisp.band2_um", 8.33));
  b.air = kind == EstimatorKind::bispectral_no_air ? AirEmission::neglected : AirEmission::modeled;
  const auto source = cfg.get_string("bisp.t_air", "atmo");
  if (source == "atmo") {
    b.t_air_source = FixedAirTemperature{atmo.t_air};
  } else if (source.starts_with("saturated:")) {
    const auto w = text::parse_double(std::string_view(source).substr(10));
    if (!w) throw ConfigError("bisp.t_air: malformed wavelength in '" + source + "'");
    b.t_air_source = SaturatedChannel{atmo.grid().nearest(*w)};
  } else {
    const auto t = text::parse_double(source);
    if (!t) throw ConfigError("bisp.t_air: expected K value, 'atmo', or 'saturated:<um>'");
    b.t_air_source = FixedAirTemperature{*t};
  }
  b.validate(atmo);
  return b;
}

inline OzoneMaskConfig load_mask_config(const Config& cfg) {
  OzoneMaskConfig m;
  m.lambda_a_um = cfg.get_double("mask.lambda_a_um", m.lambda_a_um);
  m.lambda_b_um = cfg.get_double("mask.lambda_b_um", m.lambda_b_um);
  m.threshold = cfg.get_double("mask.threshold", m.threshold);
  return m;
}

}  // namespace thermrange::harness
