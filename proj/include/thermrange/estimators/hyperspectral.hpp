#pragma once

// Joint per-pixel estimation of range, temperature and emissivity from a full
// spectrum by minimizing
//
//   L(d, T, ε) = Σ_k (ŷ_k(d, T, ε_k) − y_k)² + ρ Σ_k (ε_{k+1} − ε_k)²
//
// with ŷ the emission-plus-air forward model, subject to box constraints.
//
// Internally the solver works on normalized coordinates (d/100 m, T/300 K, ε).
// The default solver is a projected Levenberg–Marquardt method whose normal
// equations have a tridiagonal ε block bordered by the (d, T) rows; they are
// solved in O(K) by eliminating ε (Thomas algorithm) and solving the 2×2
// Schur complement. A fixed-step projected gradient method with
// backtracking is available as an alternative.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "thermrange/atmosphere.hpp"
#include "thermrange/error.hpp"
#include "thermrange/spectral.hpp"

namespace thermrange {

struct HyperspectralParams {
  double range_m = 0.0;
  double temperature_k = 0.0;
  std::vector<double> emissivity;
};

/// First-difference operator D of shape (K−1)×K: (Dε)_k = ε_{k+1} − ε_k.
struct DifferenceOperator {
  std::size_t channels = 0;

  std::vector<double> apply(std::span<const double> eps) const {
    if (eps.size() != channels) throw PreconditionError("difference operator length mismatch");
    std::vector<double> out(channels > 0 ? channels - 1 : 0);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = eps[k + 1] - eps[k];
    return out;
  }

  /// Dᵀv for v of length K−1.
  std::vector<double> apply_transpose(std::span<const double> v) const {
    if (channels == 0 || v.size() != channels - 1) throw PreconditionError("difference operator length mismatch");
    std::vector<double> out(channels, 0.0);
    for (std::size_t k = 0; k < v.size(); ++k) {
      out[k] -= v[k];
      out[k + 1] += v[k];
    }
    return out;
  }
};

/// Partial derivatives of the loss in physical units.
struct HyperspectralGradient {
  double range = 0.0;        // ∂L/∂d, per m
  double temperature = 0.0;  // ∂L/∂T, per K
  std::vector<double> emissivity;
};

enum class Solver { levenberg_marquardt, projected_gradient };

enum class StopReason {
  gradient_tolerance,  // scaled projected gradient fell below tolerance
  stalled,             // no step reduces the loss any more (numerically stationary)
  iteration_budget,
};

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::gradient_tolerance: return "gradient_tolerance";
    case StopReason::stalled: return "stalled";
    case StopReason::iteration_budget: return "iteration_budget";
  }
  return "unknown";
}

struct HyperspectralConfig {
  double rho = 1e7;
  long iterations = 20000;
  double init_range_m = 150.0;
  double init_temperature_k = 300.0;
  double init_emissivity = 0.9;
  double max_range_m = 1e4;
  double min_temperature_k = 200.0;
  double max_temperature_k = 400.0;
  /// Early stop on ‖∇L‖∞ / (1 + L) in normalized coordinates.
  double gradient_tolerance = 1e-10;
  Solver solver = Solver::levenberg_marquardt;

  // Projected gradient step control.
  double initial_step = 1e-8;
  double step_shrink = 0.5;
  double step_growth = 1.1;

  // Levenberg–Marquardt damping.
  double initial_damping = 1e-3;
  double max_damping = 1e12;

  void validate() const {
    if (!(rho >= 0.0) || !std::isfinite(rho)) throw ConfigError("rho must be non-negative");
    if (iterations < 1) throw ConfigError("iterations must be at least 1");
    if (!(max_range_m > 0.0)) throw ConfigError("max_range_m must be positive");
    if (!(min_temperature_k > 0.0 && min_temperature_k < max_temperature_k))
      throw ConfigError("min_temperature_k and max_temperature_k must satisfy 0 < min < max");
    if (!(init_range_m >= 0.0 && init_range_m <= max_range_m)) throw ConfigError("init_range_m outside [0, max_range_m]");
    if (!(init_temperature_k >= min_temperature_k && init_temperature_k <= max_temperature_k))
      throw ConfigError("init_temperature_k outside the temperature bounds");
    if (!(init_emissivity >= 0.0 && init_emissivity <= 1.0)) throw ConfigError("init_emissivity outside [0, 1]");
    if (!(step_shrink > 0.0 && step_shrink < 1.0) || !(step_growth >= 1.0) || !(initial_step > 0.0))
      throw ConfigError("initial_step, step_shrink and step_growth must satisfy step > 0, 0 < shrink < 1, growth >= 1");
    if (!(initial_damping > 0.0) || !(max_damping > initial_damping)) throw ConfigError("initial_damping and max_damping must satisfy 0 < initial < max");
  }
};

struct EstimationResult {
  double range_m = 0.0;
  double temperature_k = 0.0;
  EmissivitySpectrum emissivity;
  double final_loss = 0.0;
  bool converged = false;
  /// Downwelling-mask outcome; set by the caller when a mask is applied.
  bool reliable = true;
  /// False when the loss is flat in range at the estimate (no object/air contrast).
  bool identifiable = true;
  long iterations = 0;
  StopReason stop = StopReason::iteration_budget;
  double scaled_gradient = 0.0;
};

/// View of one solver iterate, passed to the optional observer.
struct IterateView {
  long iteration;
  double range_m;
  double temperature_k;
  std::span<const double> emissivity;
  double loss;
};

namespace detail {

inline constexpr double range_scale = 100.0;
inline constexpr double temperature_scale = 300.0;

/// Loss terms and Jacobian columns (normalized coordinates) at one point.
struct Evaluation {
  double loss = 0.0;
  std::vector<double> residual;  // ŷ − y
  std::vector<double> jac_range;
  std::vector<double> jac_temperature;
  std::vector<double> jac_emissivity;  // ∂r_k/∂ε_k
  std::vector<double> gradient;        // ∇L in normalized coordinates, size K + 2
};

class HyperspectralProblem {
 public:
  HyperspectralProblem(const RadianceSpectrum& measurement, const AtmosphereState& atmo, double rho)
      : grid_(atmo.grid()), rho_(rho) {
    require_same_grid(measurement.grid(), atmo.grid(), "hyperspectral estimation");
    const std::size_t k = grid_.size();
    y_.assign(measurement.values().begin(), measurement.values().end());
    alpha_.assign(atmo.attenuation.values().begin(), atmo.attenuation.values().end());
    b_air_.resize(k);
    for (std::size_t i = 0; i < k; ++i) b_air_[i] = planck_radiance(grid_[i], atmo.t_air);
  }

  std::size_t channels() const noexcept { return y_.size(); }
  double rho() const noexcept { return rho_; }

  double loss(double range_m, double temperature_k, std::span<const double> eps) const {
    double data = 0.0;
    for (std::size_t k = 0; k < y_.size(); ++k) {
      const double tau = std::pow(10.0, -alpha_[k] * range_m / 10.0);
      const double r = tau * (eps[k] * planck_radiance(grid_[k], temperature_k) - b_air_[k]) + b_air_[k] - y_[k];
      data += r * r;
    }
    return data + rho_ * roughness(eps);
  }

  static double roughness(std::span<const double> eps) {
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < eps.size(); ++k) {
      const double d = eps[k + 1] - eps[k];
      s += d * d;
    }
    return s;
  }

  void evaluate(double range_m, double temperature_k, std::span<const double> eps, Evaluation& ev) const {
    const std::size_t n = y_.size();
    ev.residual.resize(n);
    ev.jac_range.resize(n);
    ev.jac_temperature.resize(n);
    ev.jac_emissivity.resize(n);
    ev.gradient.assign(n + 2, 0.0);
    double data = 0.0;
    double g_range = 0.0;
    double g_temp = 0.0;
    constexpr double ln10_over_10 = std::numbers::ln10 / 10.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double tau = std::pow(10.0, -alpha_[k] * range_m / 10.0);
      const double b = planck_radiance(grid_[k], temperature_k);
      const double db = planck_temperature_derivative(grid_[k], temperature_k);
      const double contrast = eps[k] * b - b_air_[k];
      const double r = tau * contrast + b_air_[k] - y_[k];
      ev.residual[k] = r;
      ev.jac_range[k] = -ln10_over_10 * alpha_[k] * tau * contrast * range_scale;
      ev.jac_temperature[k] = tau * eps[k] * db * temperature_scale;
      ev.jac_emissivity[k] = tau * b;
      data += r * r;
      g_range += 2.0 * r * ev.jac_range[k];
      g_temp += 2.0 * r * ev.jac_temperature[k];
      ev.gradient[k + 2] = 2.0 * r * ev.jac_emissivity[k];
    }
    for (std::size_t k = 0; k + 1 < n; ++k) {
      const double d = eps[k + 1] - eps[k];
      ev.gradient[k + 2] -= 2.0 * rho_ * d;
      ev.gradient[k + 3] += 2.0 * rho_ * d;
    }
    ev.gradient[0] = g_range;
    ev.gradient[1] = g_temp;
    ev.loss = data + rho_ * roughness(eps);
  }

  /// Σ_k (∂ŷ_k/∂d)² in physical units: Fisher information for d at unit noise.
  double range_information(double range_m, double temperature_k, std::span<const double> eps) const {
    double s = 0.0;
    for (std::size_t k = 0; k < y_.size(); ++k) {
      const double tau = std::pow(10.0, -alpha_[k] * range_m / 10.0);
      const double slope = -(std::numbers::ln10 / 10.0) * alpha_[k] * tau *
                           (eps[k] * planck_radiance(grid_[k], temperature_k) - b_air_[k]);
      s += slope * slope;
    }
    return s;
  }

 private:
  SpectralGrid grid_;
  double rho_;
  std::vector<double> y_;
  std::vector<double> alpha_;
  std::vector<double> b_air_;
};

/// Solves the symmetric tridiagonal system (diagonal `diag`, sub/super-diagonal
/// `lower`) in place of `rhs`.
inline void solve_tridiagonal(std::span<const double> diag, std::span<const double> lower,
                              std::vector<double>& rhs, std::vector<double>& scratch) {
  const std::size_t n = diag.size();
  scratch.resize(n);
  double denom = diag[0];
  scratch[0] = n > 1 ? lower[0] / denom : 0.0;
  rhs[0] /= denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = diag[i] - lower[i - 1] * scratch[i - 1];
    scratch[i] = i + 1 < n ? lower[i] / denom : 0.0;
    rhs[i] = (rhs[i] - lower[i - 1] * rhs[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= scratch[i] * rhs[i + 1];
}

}  // namespace detail

/// Loss at `params` for a measured spectrum.
inline double hyperspectral_loss(const HyperspectralParams& params, const RadianceSpectrum& measurement,
                                 const AtmosphereState& atmo, double rho) {
  const detail::HyperspectralProblem problem(measurement, atmo, rho);
  if (params.emissivity.size() != problem.channels())
    throw PreconditionError("emissivity parameter length does not match the grid");
  return problem.loss(params.range_m, params.temperature_k, params.emissivity);
}

/// Exact gradient of `hyperspectral_loss` with respect to (d, T, ε_1..ε_K).
inline HyperspectralGradient hyperspectral_gradient(const HyperspectralParams& params,
                                                    const RadianceSpectrum& measurement,
                                                    const AtmosphereState& atmo, double rho) {
  const detail::HyperspectralProblem problem(measurement, atmo, rho);
  if (params.emissivity.size() != problem.channels())
    throw PreconditionError("emissivity parameter length does not match the grid");
  detail::Evaluation ev;
  problem.evaluate(params.range_m, params.temperature_k, params.emissivity, ev);
  HyperspectralGradient g;
  g.range = ev.gradient[0] / detail::range_scale;
  g.temperature = ev.gradient[1] / detail::temperature_scale;
  g.emissivity.assign(ev.gradient.begin() + 2, ev.gradient.end());
  return g;
}

struct NoObserver {
  void operator()(const IterateView&) const noexcept {}
};

template <class Observer = NoObserver>
EstimationResult hyperspectral_estimate(const RadianceSpectrum& measurement, const AtmosphereState& atmo,
                                        const HyperspectralConfig& cfg, Observer&& observe_iterate = {}) {
  cfg.validate();
  const detail::HyperspectralProblem problem(measurement, atmo, cfg.rho);
  const std::size_t n_eps = problem.channels();
  const std::size_t n = n_eps + 2;

  // Normalized coordinates and bounds.
  std::vector<double> x(n), lo(n, 0.0), hi(n, 1.0);
  x[0] = cfg.init_range_m / detail::range_scale;
  x[1] = cfg.init_temperature_k / detail::temperature_scale;
  std::fill(x.begin() + 2, x.end(), cfg.init_emissivity);
  lo[0] = 0.0;
  hi[0] = cfg.max_range_m / detail::range_scale;
  lo[1] = cfg.min_temperature_k / detail::temperature_scale;
  hi[1] = cfg.max_temperature_k / detail::temperature_scale;

  auto range_of = [](const std::vector<double>& v) { return v[0] * detail::range_scale; };
  auto temp_of = [](const std::vector<double>& v) { return v[1] * detail::temperature_scale; };
  auto eps_of = [n_eps](const std::vector<double>& v) { return std::span<const double>(v).subspan(2, n_eps); };

  detail::Evaluation ev, trial_ev;
  problem.evaluate(range_of(x), temp_of(x), eps_of(x), ev);
  if (!std::isfinite(ev.loss)) throw NumericError("hyperspectral loss is not finite", 0);
  observe_iterate(IterateView{0, range_of(x), temp_of(x), eps_of(x), ev.loss});

  std::vector<char> active(n, 0);
  auto update_active = [&](const std::vector<double>& g) {
    for (std::size_t i = 0; i < n; ++i)
      active[i] = (x[i] <= lo[i] && g[i] > 0.0) || (x[i] >= hi[i] && g[i] < 0.0);
  };
  auto scaled_gradient = [&](const detail::Evaluation& e) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (!active[i]) m = std::max(m, std::abs(e.gradient[i]));
    return m / (1.0 + e.loss);
  };

  EstimationResult result;
  result.stop = StopReason::iteration_budget;
  long iter = 0;

  std::vector<double> trial(n);
  if (cfg.solver == Solver::projected_gradient) {
    double step = cfg.initial_step;
    for (; iter < cfg.iterations; ++iter) {
      update_active(ev.gradient);
      if (scaled_gradient(ev) < cfg.gradient_tolerance) {
        result.stop = StopReason::gradient_tolerance;
        break;
      }
      bool accepted = false;
      while (step > std::numeric_limits<double>::min()) {
        for (std::size_t i = 0; i < n; ++i) trial[i] = std::clamp(x[i] - step * ev.gradient[i], lo[i], hi[i]);
        const double l = problem.loss(range_of(trial), temp_of(trial), eps_of(trial));
        if (!std::isfinite(l)) throw NumericError("hyperspectral loss is not finite", iter + 1);
        if (l <= ev.loss) {
          accepted = true;
          break;
        }
        step *= cfg.step_shrink;
      }
      if (!accepted) {
        result.stop = StopReason::stalled;
        break;
      }
      x.swap(trial);
      problem.evaluate(range_of(x), temp_of(x), eps_of(x), ev);
      step *= cfg.step_growth;
      observe_iterate(IterateView{iter + 1, range_of(x), temp_of(x), eps_of(x), ev.loss});
    }
  } else {
    double damping = cfg.initial_damping;
    std::vector<double> diag(n_eps), lower(n_eps > 1 ? n_eps - 1 : 0), scratch;
    std::vector<double> rhs_g(n_eps), rhs_r(n_eps), rhs_t(n_eps), c_r(n_eps), c_t(n_eps);
    for (; iter < cfg.iterations; ++iter) {
      update_active(ev.gradient);
      if (scaled_gradient(ev) < cfg.gradient_tolerance) {
        result.stop = StopReason::gradient_tolerance;
        break;
      }
      // Gauss–Newton matrix (halved): JᵀJ + ρDᵀD.
      double h_rr = 0.0, h_tt = 0.0, h_rt = 0.0, max_diag = 0.0;
      for (std::size_t k = 0; k < n_eps; ++k) {
        h_rr += ev.jac_range[k] * ev.jac_range[k];
        h_tt += ev.jac_temperature[k] * ev.jac_temperature[k];
        h_rt += ev.jac_range[k] * ev.jac_temperature[k];
      }
      max_diag = std::max(h_rr, h_tt);
      for (std::size_t k = 0; k < n_eps; ++k) {
        const double neighbours = (k > 0 ? 1.0 : 0.0) + (k + 1 < n_eps ? 1.0 : 0.0);
        diag[k] = ev.jac_emissivity[k] * ev.jac_emissivity[k] + cfg.rho * neighbours;
        max_diag = std::max(max_diag, diag[k]);
      }
      const double floor = 1e-12 * std::max(max_diag, std::numeric_limits<double>::min());

      bool accepted = false;
      while (damping <= cfg.max_damping) {
        // Damped, active-set-reduced system.
        std::vector<double> d_eps(n_eps);
        for (std::size_t k = 0; k < n_eps; ++k) {
          const bool fixed = active[k + 2];
          d_eps[k] = fixed ? 1.0 : diag[k] + damping * std::max(diag[k], floor);
          rhs_g[k] = fixed ? 0.0 : -0.5 * ev.gradient[k + 2];
          c_r[k] = fixed || active[0] ? 0.0 : ev.jac_range[k] * ev.jac_emissivity[k];
          c_t[k] = fixed || active[1] ? 0.0 : ev.jac_temperature[k] * ev.jac_emissivity[k];
        }
        for (std::size_t k = 0; k + 1 < n_eps; ++k)
          lower[k] = (active[k + 2] || active[k + 3]) ? 0.0 : -cfg.rho;
        rhs_r = c_r;
        rhs_t = c_t;
        detail::solve_tridiagonal(d_eps, lower, rhs_g, scratch);
        detail::solve_tridiagonal(d_eps, lower, rhs_r, scratch);
        detail::solve_tridiagonal(d_eps, lower, rhs_t, scratch);

        double s_rr = active[0] ? 1.0 : h_rr + damping * std::max(h_rr, floor);
        double s_tt = active[1] ? 1.0 : h_tt + damping * std::max(h_tt, floor);
        double s_rt = (active[0] || active[1]) ? 0.0 : h_rt;
        double b_r = active[0] ? 0.0 : -0.5 * ev.gradient[0];
        double b_t = active[1] ? 0.0 : -0.5 * ev.gradient[1];
        for (std::size_t k = 0; k < n_eps; ++k) {
          s_rr -= c_r[k] * rhs_r[k];
          s_tt -= c_t[k] * rhs_t[k];
          s_rt -= c_r[k] * rhs_t[k];
          b_r -= c_r[k] * rhs_g[k];
          b_t -= c_t[k] * rhs_g[k];
        }
        const double det = s_rr * s_tt - s_rt * s_rt;
        if (!(det > 0.0) || !std::isfinite(det)) {
          damping *= 4.0;
          continue;
        }
        const double step_r = (b_r * s_tt - b_t * s_rt) / det;
        const double step_t = (s_rr * b_t - s_rt * b_r) / det;
        trial[0] = std::clamp(x[0] + step_r, lo[0], hi[0]);
        trial[1] = std::clamp(x[1] + step_t, lo[1], hi[1]);
        for (std::size_t k = 0; k < n_eps; ++k) {
          const double step_e = rhs_g[k] - rhs_r[k] * step_r - rhs_t[k] * step_t;
          trial[k + 2] = std::clamp(x[k + 2] + step_e, lo[k + 2], hi[k + 2]);
        }
        problem.evaluate(range_of(trial), temp_of(trial), eps_of(trial), trial_ev);
        if (!std::isfinite(trial_ev.loss)) throw NumericError("hyperspectral loss is not finite", iter + 1);
        if (trial_ev.loss < ev.loss) {
          accepted = true;
          damping = std::max(damping / 3.0, 1e-15);
          break;
        }
        damping *= 4.0;
      }
      if (!accepted) {
        result.stop = StopReason::stalled;
        break;
      }
      x.swap(trial);
      std::swap(ev, trial_ev);
      observe_iterate(IterateView{iter + 1, range_of(x), temp_of(x), eps_of(x), ev.loss});
    }
  }

  update_active(ev.gradient);
  result.range_m = range_of(x);
  result.temperature_k = temp_of(x);
  result.emissivity = EmissivitySpectrum(atmo.grid(), std::vector<double>(x.begin() + 2, x.end()));
  result.final_loss = ev.loss;
  result.iterations = iter;
  result.scaled_gradient = scaled_gradient(ev);
  result.converged = result.stop != StopReason::iteration_budget;
  const double info = problem.range_information(result.range_m, result.temperature_k, eps_of(x));
  result.identifiable = info > 0.0 && 1.0 / std::sqrt(info) <= cfg.max_range_m;
  return result;
}

}  // namespace thermrange
