#pragma once

// Drivers behind the command-line tool: cube-wide estimation, the Monte Carlo
// range-accuracy study, and Fisher information reports. Work is spread over
// pixels or trials; every result is stored by index, so outputs do not depend
// on the worker count.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "thermrange/estimators/bispectral.hpp"
#include "thermrange/estimators/hyperspectral.hpp"
#include "thermrange/estimators/ozone_mask.hpp"
#include "thermrange/fisher.hpp"
#include "thermrange/forward_model.hpp"
#include "thermrange/harness/io.hpp"
#include "thermrange/harness/setup.hpp"
#include "thermrange/hsrc.hpp"
#include "thermrange/parallel.hpp"
#include "thermrange/spectrum_csv.hpp"

namespace thermrange::harness {

inline constexpr double not_available = std::numeric_limits<double>::quiet_NaN();

// ---------------------------------------------------------------- simulate

inline void write_scene_truth(const std::filesystem::path& dir, const Scene& scene) {
  const auto& t = scene.truth;
  const auto path = dir / "truth.csv";
  auto out = open_output(path);
  out << "row,col,d,T,region\n";
  for (std::size_t r = 0; r < t.height; ++r)
    for (std::size_t c = 0; c < t.width; ++c) {
      const auto& p = t.at(r, c);
      out << r << ',' << c << ',' << text::format_double(p.range_m) << ',' << text::format_double(p.temperature_k)
          << ',' << scene.region_names[scene.region[r * t.width + c]] << '\n';
    }
  finish_output(out, path);
  for (std::size_t i = 0; i < scene.region_names.size(); ++i)
    write_spectrum_csv(dir / ("emissivity_" + scene.region_names[i] + ".csv"), scene.region_emissivity[i]);
  write_spectrum_csv(dir / "attenuation.csv", t.atmosphere.attenuation);
}

// ---------------------------------------------------------------- estimate

struct CubeEstimate {
  std::size_t height = 0;
  std::size_t width = 0;
  EstimatorKind kind = EstimatorKind::hyperspectral;
  std::vector<double> range;        // m, NaN where undefined
  std::vector<double> temperature;  // K, NaN for the bispectral estimators
  std::vector<double> loss;         // NaN for the bispectral estimators
  std::vector<char> converged;
  std::vector<char> reliable;
  std::vector<std::vector<double>> emissivity;  // hyperspectral only
  std::optional<OzoneMask> mask;
};

inline CubeEstimate estimate_cube(const HyperCube& cube, const AtmosphereState& atmo, EstimatorKind kind,
                                  const HyperspectralConfig& hyper, const BispectralConfig& bisp,
                                  const std::optional<OzoneMaskConfig>& mask, unsigned workers) {
  require_same_grid(cube.grid(), atmo.grid(), "estimate_cube");
  const std::size_t n = cube.pixel_count();
  CubeEstimate out;
  out.height = cube.height();
  out.width = cube.width();
  out.kind = kind;
  out.range.assign(n, not_available);
  out.temperature.assign(n, not_available);
  out.loss.assign(n, not_available);
  out.converged.assign(n, 0);
  out.reliable.assign(n, 1);
  if (kind == EstimatorKind::hyperspectral) out.emissivity.resize(n);

  parallel_for(n, workers, [&](std::size_t p) {
    const auto spectrum = cube.spectrum(p);
    if (kind == EstimatorKind::hyperspectral) {
      const auto r = hyperspectral_estimate(spectrum, atmo, hyper);
      out.range[p] = r.range_m;
      out.temperature[p] = r.temperature_k;
      out.loss[p] = r.final_loss;
      out.converged[p] = r.converged;
      out.emissivity[p].assign(r.emissivity.values().begin(), r.emissivity.values().end());
    } else {
      try {
        out.range[p] = bispectral_range(spectrum, atmo, bisp);
        out.converged[p] = 1;
      } catch (const UndefinedEstimateError&) {
        // left as NaN and not converged
      }
    }
  });

  if (mask) {
    out.mask = ozone_mask(cube, *mask);
    out.reliable = out.mask->reliable;
  }
  return out;
}

inline void write_mask(const std::filesystem::path& dir, const OzoneMask& mask) {
  std::vector<char> flagged(mask.reliable.size());
  for (std::size_t i = 0; i < flagged.size(); ++i) flagged[i] = !mask.reliable[i];
  write_pbm(dir / "mask.pbm", mask.height, mask.width, flagged);
  write_grid_csv(dir / "ozone_difference.csv", mask.height, mask.width, mask.difference);
}

inline void write_cube_estimate(const std::filesystem::path& dir, const CubeEstimate& est, const SpectralGrid& grid) {
  const std::size_t h = est.height;
  const std::size_t w = est.width;
  write_grid_csv(dir / "depth.csv", h, w, est.range);
  write_pgm16(dir / "depth.pgm", h, w, est.range);
  if (est.kind == EstimatorKind::hyperspectral) {
    write_grid_csv(dir / "temperature.csv", h, w, est.temperature);
    write_pgm16(dir / "temperature.pgm", h, w, est.temperature);
  }

  const auto diag_path = dir / "diagnostics.csv";
  auto diag = open_output(diag_path);
  diag << "row,col,d_hat,T_hat,loss,converged,reliable\n";
  auto fmt = [](double v) { return std::isfinite(v) ? text::format_double(v) : std::string("nan"); };
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c) {
      const std::size_t p = r * w + c;
      diag << r << ',' << c << ',' << fmt(est.range[p]) << ',' << fmt(est.temperature[p]) << ',' << fmt(est.loss[p])
           << ',' << int(est.converged[p]) << ',' << int(est.reliable[p]) << '\n';
    }
  finish_output(diag, diag_path);

  if (est.kind == EstimatorKind::hyperspectral) {
    ProfileTable table;
    table.wavelengths_um.assign(grid.wavelengths().begin(), grid.wavelengths().end());
    for (std::size_t p = 0; p < h * w; ++p) {
      table.keys.push_back({static_cast<double>(p / w), static_cast<double>(p % w)});
      table.profiles.push_back(est.emissivity[p]);
    }
    const std::string keys[] = {"row", "col"};
    write_profile_table(dir / "emissivity_estimates.csv", keys, table);
  }
  if (est.mask) write_mask(dir, *est.mask);
}

// -------------------------------------------------------------- montecarlo

struct MonteCarloSpec {
  std::vector<double> delta_t_k{-8.0, -5.0, -2.0};
  long trials = 100;
  double range_m = 100.0;
  double sigma = 1.0;
  std::uint64_t seed = 0;
  std::vector<EstimatorKind> estimators{EstimatorKind::hyperspectral, EstimatorKind::bispectral};
  EmissivitySpectrum emissivity;
  HyperspectralConfig hyper;
  BispectralConfig bisp;

  void validate() const {
    if (trials < 2) throw ConfigError("montecarlo.trials must be at least 2");
    if (delta_t_k.empty()) throw ConfigError("montecarlo.delta_t_k must list at least one value");
    if (estimators.empty()) throw ConfigError("montecarlo.estimators must list at least one estimator");
    if (!(sigma >= 0.0)) throw ConfigError("montecarlo.sigma must be non-negative");
  }
};

struct MonteCarloRow {
  EstimatorKind estimator = EstimatorKind::hyperspectral;
  double delta_t_k = 0.0;
  long trials = 0;
  long undefined = 0;  // trials without an estimate (bispectral log of a non-positive ratio)
  double rmse = 0.0;
  double bias = 0.0;
  double std = 0.0;  // sample standard deviation (n − 1)
  std::uint64_t seed = 0;
};

struct MonteCarloReport {
  std::vector<MonteCarloRow> rows;  // estimator-major, then ΔT in spec order
  // estimates[e][t][i]: estimator e, ΔT index t, trial i (NaN when undefined)
  std::vector<std::vector<std::vector<double>>> estimates;
};

/// Monte Carlo settings from `montecarlo.*`, `scene.material`, `hyper.*` and
/// `bisp.*` keys.
inline MonteCarloSpec load_montecarlo_spec(const Config& cfg, const AtmosphereState& atmo) {
  MonteCarloSpec spec;
  if (cfg.has("montecarlo.delta_t_k")) spec.delta_t_k = cfg.get_doubles("montecarlo.delta_t_k");
  spec.trials = cfg.get_int("montecarlo.trials", spec.trials);
  spec.range_m = cfg.get_double("montecarlo.range_m", spec.range_m);
  spec.sigma = cfg.get_double("montecarlo.sigma", spec.sigma);
  spec.seed = cfg.get_u64("noise.seed", 0);
  if (cfg.has("montecarlo.estimators")) {
    spec.estimators.clear();
    const auto names = cfg.get_string("montecarlo.estimators");
    for (const auto name : text::split(names, ','))
      spec.estimators.push_back(parse_estimator(std::string(text::trim(name))));
  }
  spec.emissivity = parse_material(cfg.get_string("scene.material", "flat:0.98"), atmo.grid());
  spec.hyper = load_hyperspectral_config(cfg);
  spec.bisp = load_bispectral_config(cfg, atmo, EstimatorKind::bispectral);
  spec.validate();
  return spec;
}

/// Noise for trial i at ΔT index t uses stream (t << 32) | i, so a longer run
/// extends a shorter one and both estimators see the same noisy spectra.
inline std::uint64_t montecarlo_stream(std::size_t delta_index, long trial) {
  return (static_cast<std::uint64_t>(delta_index) << 32) | static_cast<std::uint64_t>(trial);
}

inline MonteCarloRow summarize_trials(const std::vector<double>& estimates, double truth) {
  MonteCarloRow row;
  row.trials = static_cast<long>(estimates.size());
  double sum = 0.0, sum_sq_err = 0.0;
  long n = 0;
  for (const double d : estimates) {
    if (!std::isfinite(d)) {
      ++row.undefined;
      continue;
    }
    sum += d;
    sum_sq_err += (d - truth) * (d - truth);
    ++n;
  }
  if (n == 0) {
    row.rmse = row.bias = row.std = not_available;
    return row;
  }
  const double mean = sum / static_cast<double>(n);
  double var = 0.0;
  for (const double d : estimates)
    if (std::isfinite(d)) var += (d - mean) * (d - mean);
  row.bias = mean - truth;
  row.rmse = std::sqrt(sum_sq_err / static_cast<double>(n));
  row.std = n > 1 ? std::sqrt(var / static_cast<double>(n - 1)) : not_available;
  return row;
}

inline MonteCarloReport run_montecarlo(const MonteCarloSpec& spec, const AtmosphereState& atmo, unsigned workers) {
  spec.validate();
  const std::size_t n_dt = spec.delta_t_k.size();
  const auto n_trials = static_cast<std::size_t>(spec.trials);
  MonteCarloReport report;
  report.estimates.assign(spec.estimators.size(),
                          std::vector<std::vector<double>>(n_dt, std::vector<double>(n_trials, not_available)));

  std::vector<RadianceSpectrum> clean;
  for (const double dt : spec.delta_t_k)
    clean.push_back(observe(ScenePixel{spec.range_m, atmo.t_air + dt, spec.emissivity}, atmo));

  const NoiseModel noise{spec.sigma, spec.seed};
  parallel_for(n_dt * n_trials, workers, [&](std::size_t task) {
    const std::size_t t = task / n_trials;
    const long i = static_cast<long>(task % n_trials);
    const auto y = add_noise(clean[t], noise, montecarlo_stream(t, i));
    for (std::size_t e = 0; e < spec.estimators.size(); ++e) {
      double d = not_available;
      switch (spec.estimators[e]) {
        case EstimatorKind::hyperspectral:
          d = hyperspectral_estimate(y, atmo, spec.hyper).range_m;
          break;
        case EstimatorKind::bispectral:
        case EstimatorKind::bispectral_no_air: {
          auto cfg = spec.bisp;
          cfg.air = spec.estimators[e] == EstimatorKind::bispectral ? AirEmission::modeled : AirEmission::neglected;
          try {
            d = bispectral_range(y, atmo, cfg);
          } catch (const UndefinedEstimateError&) {
          }
          break;
        }
      }
      report.estimates[e][t][static_cast<std::size_t>(i)] = d;
    }
  });

  for (std::size_t e = 0; e < spec.estimators.size(); ++e)
    for (std::size_t t = 0; t < n_dt; ++t) {
      auto row = summarize_trials(report.estimates[e][t], spec.range_m);
      row.estimator = spec.estimators[e];
      row.delta_t_k = spec.delta_t_k[t];
      row.seed = spec.seed;
      report.rows.push_back(row);
    }
  return report;
}

inline void write_montecarlo(const std::filesystem::path& dir, const MonteCarloSpec& spec,
                             const MonteCarloReport& report) {
  auto fmt = [](double v) { return std::isfinite(v) ? text::format_double(v) : std::string("nan"); };
  const auto summary_path = dir / "montecarlo_summary.csv";
  auto summary = open_output(summary_path);
  summary << "estimator,delta_t,trials,undefined,rmse,bias,std,seed\n";
  for (const auto& r : report.rows)
    summary << to_string(r.estimator) << ',' << fmt(r.delta_t_k) << ',' << r.trials << ',' << r.undefined << ','
            << fmt(r.rmse) << ',' << fmt(r.bias) << ',' << fmt(r.std) << ',' << r.seed << '\n';
  finish_output(summary, summary_path);

  const auto trials_path = dir / "montecarlo_trials.csv";
  auto trials = open_output(trials_path);
  trials << "estimator,delta_t,trial,d_hat\n";
  for (std::size_t e = 0; e < report.estimates.size(); ++e)
    for (std::size_t t = 0; t < report.estimates[e].size(); ++t)
      for (std::size_t i = 0; i < report.estimates[e][t].size(); ++i)
        trials << to_string(spec.estimators[e]) << ',' << fmt(spec.delta_t_k[t]) << ',' << i << ','
               << fmt(report.estimates[e][t][i]) << '\n';
  finish_output(trials, trials_path);
}

// ------------------------------------------------------------------ fisher

struct FisherSummaryRow {
  double range_m = 0.0;
  double alpha_star = 0.0;
  double alpha_star_times_d = 0.0;
  FisherProfile profile;
};

inline std::vector<FisherSummaryRow> run_fisher(const ScenePixel& pixel_template, const AtmosphereState& atmo,
                                                const std::vector<double>& ranges_m, double sigma) {
  if (ranges_m.empty()) throw ConfigError("fisher needs at least one range");
  std::vector<FisherSummaryRow> rows;
  for (const double d : ranges_m) {
    ScenePixel px = pixel_template;
    px.range_m = d;
    FisherSummaryRow row;
    row.range_m = d;
    row.alpha_star = optimal_attenuation(d);
    row.alpha_star_times_d = row.alpha_star * d;
    row.profile = fisher_profile(px, atmo, sigma);
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string fisher_profile_filename(double range_m) { return "fisher_d" + text::format_double(range_m) + ".csv"; }

inline void write_fisher(const std::filesystem::path& dir, const std::vector<FisherSummaryRow>& rows) {
  for (const auto& row : rows) {
    const auto path = dir / fisher_profile_filename(row.range_m);
    auto out = open_output(path);
    out << "wavelength_um,I_k,I_k_normalized\n";
    const auto& p = row.profile;
    for (std::size_t k = 0; k < p.per_channel.size(); ++k) {
      out << text::format_double(p.grid[k]) << ',' << text::format_double(p.per_channel[k]) << ',';
      if (!p.degenerate()) out << text::format_double(p.normalized[k]);
      out << '\n';
    }
    finish_output(out, path);
  }
  const auto path = dir / "fisher_summary.csv";
  auto out = open_output(path);
  out << "d_m,alpha_star_db_per_m,alpha_star_times_d_db,total_information,crlb_std_m,degenerate\n";
  for (const auto& row : rows) {
    out << text::format_double(row.range_m) << ',' << text::format_double(row.alpha_star) << ','
        << text::format_double(row.alpha_star_times_d) << ',' << text::format_double(row.profile.total) << ','
        << (row.profile.crlb_std ? text::format_double(*row.profile.crlb_std) : std::string()) << ','
        << int(row.profile.degenerate()) << '\n';
  }
  finish_output(out, path);
}

}  // namespace thermrange::harness
