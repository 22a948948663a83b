// Command-line front end: simulate cubes, estimate range maps, run the Monte
// Carlo and Fisher studies, mask reflective pixels, and cluster emissivities.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "thermrange/error.hpp"
#include "thermrange/estimators/kmeans.hpp"
#include "thermrange/harness/config.hpp"
#include "thermrange/harness/experiments.hpp"
#include "thermrange/harness/io.hpp"
#include "thermrange/harness/setup.hpp"
#include "thermrange/hsrc.hpp"

#ifndef THERMRANGE_PRESET_DIR
#define THERMRANGE_PRESET_DIR "presets"
#endif

namespace fs = std::filesystem;
using namespace thermrange;
using namespace thermrange::harness;

namespace {

struct CommonOptions {
  std::string config;
  std::vector<std::string> overrides;
  std::string atmo;
  std::optional<double> t_air;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  unsigned workers = default_workers();
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "Experiment config file or preset name");
  cmd->add_option("--set", o.overrides, "Config override key=value (repeatable)");
  cmd->add_option("--atmo", o.atmo, "Attenuation Spectrum CSV, or a preset whose atmosphere is used");
  cmd->add_option("--t-air", o.t_air, "Air temperature in K");
  cmd->add_option("--seed", o.seed, "Noise seed");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
}

/// A config path, or the name of a shipped preset.
fs::path resolve_config(const std::string& name) {
  if (fs::exists(name)) return name;
  const fs::path preset = fs::path(THERMRANGE_PRESET_DIR) / (name + ".cfg");
  if (fs::exists(preset)) return preset;
  throw ConfigError("no config file or preset named '" + name + "'");
}

Config build_config(const CommonOptions& o) {
  Config cfg = o.config.empty() ? Config{} : Config::load(resolve_config(o.config));
  if (!o.atmo.empty()) {
    cfg.erase("atmo.csv");
    cfg.erase("atmo.lines");
    if (fs::path(o.atmo).extension() == ".csv") {
      if (!fs::exists(o.atmo)) throw IoError("attenuation file " + o.atmo + " does not exist");
      cfg.set("atmo.csv", o.atmo);
    } else {
      cfg.import_prefixed(Config::load(resolve_config(o.atmo)), {"grid.", "atmo."});
    }
  }
  for (const auto& s : o.overrides) cfg.set_override(s);
  if (o.t_air) cfg.set("atmo.t_air", text::format_double(*o.t_air));
  if (o.seed) cfg.set("noise.seed", std::to_string(*o.seed));
  return cfg;
}

void write_resolved_config(const fs::path& dir, const Config& cfg) {
  const auto path = dir / "resolved.cfg";
  auto out = open_output(path);
  for (const auto& [key, value] : cfg.items()) out << key << " = " << value << '\n';
  finish_output(out, path);
}

int exit_code(ErrorClass c) {
  switch (c) {
    case ErrorClass::validation: return 2;
    case ErrorClass::io: return 3;
    case ErrorClass::numeric: return 4;
  }
  return 4;
}

int cmd_simulate(const CommonOptions& o) {
  const Config cfg = build_config(o);
  const auto atmo = load_atmosphere(cfg);
  const auto scene = build_scene(cfg, atmo);
  const auto noise = load_noise(cfg);
  const auto cube = simulate_cube(scene.truth, noise, o.workers);
  ensure_directory(o.out);
  write_hsrc(fs::path(o.out) / "cube.hsrc", cube);
  write_scene_truth(o.out, scene);
  write_resolved_config(o.out, cfg);
  std::cout << "seed " << noise.seed << '\n';
  return 0;
}

int cmd_estimate(CommonOptions o, const std::string& cube_path, const std::string& estimator, bool mask) {
  const auto cube = read_hsrc(cube_path);
  // The air temperature recorded in the cube applies unless given explicitly.
  if (!o.t_air) o.t_air = cube.t_air();
  Config cfg = build_config(o);
  if (!cfg.has("atmo.csv") && !cfg.has("atmo.lines"))
    throw ConfigError("estimate needs an atmosphere: pass --atmo or --config");
  const auto atmo = load_atmosphere_on(cfg, cube.grid());
  const auto kind = parse_estimator(estimator.empty() ? cfg.get_string("estimator", "hyperspectral") : estimator);
  const auto hyper = load_hyperspectral_config(cfg);
  BispectralConfig bisp;
  if (kind != EstimatorKind::hyperspectral) bisp = load_bispectral_config(cfg, atmo, kind);
  std::optional<OzoneMaskConfig> mask_cfg;
  if (mask || cfg.get_bool("mask.enabled", false)) mask_cfg = load_mask_config(cfg);
  const auto est = estimate_cube(cube, atmo, kind, hyper, bisp, mask_cfg, o.workers);
  ensure_directory(o.out);
  write_cube_estimate(o.out, est, cube.grid());
  std::size_t unconverged = 0;
  for (const char c : est.converged) unconverged += c ? 0 : 1;
  std::cout << "pixels " << est.range.size() << " unconverged " << unconverged << '\n';
  return 0;
}

int cmd_montecarlo(const CommonOptions& o, std::optional<long> trials) {
  Config cfg = build_config(o);
  if (trials) cfg.set("montecarlo.trials", std::to_string(*trials));
  const auto atmo = load_atmosphere(cfg);
  const auto spec = load_montecarlo_spec(cfg, atmo);
  const auto report = run_montecarlo(spec, atmo, o.workers);
  ensure_directory(o.out);
  write_montecarlo(o.out, spec, report);
  write_resolved_config(o.out, cfg);
  std::cout << "seed " << spec.seed << '\n';
  return 0;
}

int cmd_fisher(const CommonOptions& o, const std::vector<double>& ranges, std::optional<double> sigma) {
  Config cfg = build_config(o);
  const auto atmo = load_atmosphere(cfg);
  const auto emissivity = parse_material(cfg.get_string("scene.material", "flat:0.98"), atmo.grid());
  const ScenePixel pixel{0.0, atmo.t_air + cfg.get_double("scene.delta_t_k", 0.0), emissivity};
  const auto d = ranges.empty() ? cfg.get_doubles("fisher.ranges_m") : ranges;
  const auto rows = run_fisher(pixel, atmo, d, sigma ? *sigma : cfg.get_double("fisher.sigma", 1.0));
  ensure_directory(o.out);
  write_fisher(o.out, rows);
  for (const auto& r : rows)
    if (r.profile.degenerate()) std::cout << "degenerate information at d = " << text::format_double(r.range_m) << '\n';
  return 0;
}

int cmd_mask(const CommonOptions& o, const std::string& cube_path, std::optional<double> threshold) {
  const auto cube = read_hsrc(cube_path);
  const Config cfg = build_config(o);
  auto mask_cfg = load_mask_config(cfg);
  if (threshold) mask_cfg.threshold = *threshold;
  const auto mask = ozone_mask(cube, mask_cfg);
  ensure_directory(o.out);
  write_mask(o.out, mask);
  std::cout << "flagged " << mask.flagged_count() << " of " << mask.reliable.size() << '\n';
  return 0;
}

int cmd_cluster(const CommonOptions& o, const std::string& estimates, std::size_t k) {
  const auto table = read_profile_table(estimates, 2);
  if (table.profiles.empty()) throw ConfigError(estimates + " holds no profiles");
  std::size_t height = 0, width = 0;
  for (const auto& key : table.keys) {
    height = std::max(height, static_cast<std::size_t>(key[0]) + 1);
    width = std::max(width, static_cast<std::size_t>(key[1]) + 1);
  }
  if (height * width != table.profiles.size()) throw ParseError(estimates + ": rows do not form a full grid", 0);
  const auto seed = o.seed ? *o.seed : 0;
  const auto result = cluster_profiles(table.profiles, k, seed);
  std::vector<std::size_t> labels(height * width);
  for (std::size_t i = 0; i < table.keys.size(); ++i)
    labels[static_cast<std::size_t>(table.keys[i][0]) * width + static_cast<std::size_t>(table.keys[i][1])] =
        result.labels[i];
  ensure_directory(o.out);
  write_label_csv(fs::path(o.out) / "cluster_labels.csv", height, width, labels);
  ProfileTable centroids;
  centroids.wavelengths_um = table.wavelengths_um;
  for (std::size_t c = 0; c < result.centroids.size(); ++c) {
    centroids.keys.push_back({static_cast<double>(c)});
    centroids.profiles.push_back(result.centroids[c]);
  }
  const std::string keys[] = {"cluster"};
  write_profile_table(fs::path(o.out) / "cluster_centroids.csv", keys, centroids);
  std::cout << "seed " << seed << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Passive thermal ranging through an absorbing atmosphere"};
  app.require_subcommand(1);

  CommonOptions sim_o, est_o, mc_o, fi_o, mask_o, cl_o;

  auto* sim = app.add_subcommand("simulate", "Simulate a hyperspectral cube from a scene config");
  add_common(sim, sim_o);

  auto* est = app.add_subcommand("estimate", "Estimate range (and T, ε) for every pixel of a cube");
  add_common(est, est_o);
  std::string est_cube, est_kind;
  bool est_mask = false;
  est->add_option("--cube", est_cube, "HSRC cube file")->required();
  est->add_option("--estimator", est_kind, "hyperspectral, bispectral, or bispectral-no-air");
  est->add_flag("--mask", est_mask, "Apply the ozone downwelling mask");

  auto* mc = app.add_subcommand("montecarlo", "Range RMSE study over temperature contrasts");
  add_common(mc, mc_o);
  std::optional<long> mc_trials;
  mc->add_option("--trials", mc_trials, "Trials per temperature contrast")->check(CLI::Range(2L, 100000000L));

  auto* fi = app.add_subcommand("fisher", "Per-channel Fisher information about range");
  add_common(fi, fi_o);
  std::vector<double> fi_ranges;
  std::optional<double> fi_sigma;
  fi->add_option("--ranges", fi_ranges, "Ranges in m")->delimiter(',');
  fi->add_option("--sigma", fi_sigma, "Noise standard deviation in microflicks");

  auto* mk = app.add_subcommand("mask", "Ozone-difference reliability mask for a cube");
  add_common(mk, mask_o);
  std::string mk_cube;
  std::optional<double> mk_threshold;
  mk->add_option("--cube", mk_cube, "HSRC cube file")->required();
  mk->add_option("--threshold", mk_threshold, "Threshold in microflicks");

  auto* cl = app.add_subcommand("cluster", "k-means clustering of estimated emissivity profiles");
  add_common(cl, cl_o);
  std::string cl_estimates;
  std::size_t cl_k = 4;
  cl->add_option("--estimates", cl_estimates, "emissivity_estimates.csv from estimate")->required();
  cl->add_option("--k", cl_k, "Cluster count")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage_error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*sim) return cmd_simulate(sim_o);
    if (*est) return cmd_estimate(est_o, est_cube, est_kind, est_mask);
    if (*mc) return cmd_montecarlo(mc_o, mc_trials);
    if (*fi) return cmd_fisher(fi_o, fi_ranges, fi_sigma);
    if (*mk) return cmd_mask(mask_o, mk_cube, mk_threshold);
    if (*cl) return cmd_cluster(cl_o, cl_estimates, cl_k);
  } catch (const Error& e) {
    std::cerr << "error: " << e.tag() << ": " << e.what() << '\n';
    return exit_code(e.error_class());
  } catch (const std::exception& e) {
    std::cerr << "error: internal_error: " << e.what() << '\n';
    return 4;
  }
  return 0;
}
