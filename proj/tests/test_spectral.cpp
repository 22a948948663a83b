#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "support.hpp"
#include "thermrange/spectral.hpp"
#include "thermrange/spectrum_csv.hpp"

using namespace thermrange;
using thermrange::testing::relative_error;

namespace {

// Bisection on the forward Planck function: independent of the closed-form inverse.
double brightness_by_bisection(double wavelength_um, double radiance) {
  double lo = 1.0, hi = 5000.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (planck_radiance(wavelength_um, mid) < radiance ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST(SpectralGrid, RejectsEmptyNonIncreasingAndNonPositive) {
  EXPECT_THROW(SpectralGrid(std::vector<double>{}), PreconditionError);
  EXPECT_THROW(SpectralGrid(std::vector<double>{8.0, 8.0}), PreconditionError);
  EXPECT_THROW(SpectralGrid(std::vector<double>{9.0, 8.0}), PreconditionError);
  EXPECT_THROW(SpectralGrid(std::vector<double>{0.0, 8.0}), PreconditionError);
  EXPECT_NO_THROW(SpectralGrid(std::vector<double>{10.0}));
}

TEST(SpectralGrid, UniformGridEndpointsAndEquality) {
  const auto g = SpectralGrid::uniform(8.0, 13.2, 256);
  EXPECT_EQ(g.size(), 256u);
  EXPECT_EQ(g.front(), 8.0);
  EXPECT_EQ(g.back(), 13.2);
  EXPECT_TRUE(g == SpectralGrid::uniform(8.0, 13.2, 256));
  EXPECT_FALSE(g == SpectralGrid::uniform(8.0, 13.2, 255));
}

TEST(SpectralGrid, NearestBreaksTiesTowardLowerIndex) {
  const SpectralGrid g(std::vector<double>{9.0, 9.5, 10.0});
  EXPECT_EQ(g.nearest(9.25), 0u);
  EXPECT_EQ(g.nearest(9.26), 1u);
  EXPECT_EQ(g.nearest(1.0), 0u);
  EXPECT_EQ(g.nearest(20.0), 2u);
}

TEST(SpectralGrid, CombiningDifferentGridsIsRejected) {
  const auto a = SpectralGrid::uniform(8.0, 13.0, 11);
  const auto b = SpectralGrid::uniform(8.0, 13.0 + 1e-12, 11);
  EXPECT_THROW(require_same_grid(a, b, "test"), GridMismatchError);
  EXPECT_NO_THROW(require_same_grid(a, SpectralGrid::uniform(8.0, 13.0, 11), "test"));
}

TEST(Spectrum, ValidatesValuesPerTag) {
  const auto g = SpectralGrid::uniform(8.0, 9.0, 3);
  EXPECT_THROW(EmissivitySpectrum(g, {0.5, 1.01, 0.5}), DomainError);
  EXPECT_THROW(AttenuationSpectrum(g, {0.1, -1e-9, 0.1}), DomainError);
  EXPECT_THROW(RadianceSpectrum(g, {1.0, NAN, 1.0}), DomainError);
  EXPECT_THROW(RadianceSpectrum(g, {1.0, 2.0}), PreconditionError);
  EXPECT_NO_THROW(EmissivitySpectrum(g, {0.0, 1.0, 0.5}));
}

// Golden values from a 50-digit evaluation of the SI Planck law, converted
// to microflicks (µW·cm⁻²·sr⁻¹·µm⁻¹).
TEST(Planck, MatchesHighPrecisionGoldenValues) {
  EXPECT_LT(relative_error(planck_radiance(10.0, 300.0), 992.40333300706946661), 1e-13);
  EXPECT_LT(relative_error(planck_radiance(8.0, 250.0), 273.23702790607269108), 1e-13);
  EXPECT_LT(relative_error(planck_radiance(13.0, 350.0), 1418.0578727753466442), 1e-13);
  EXPECT_LT(relative_error(planck_radiance(9.5, 289.7), 830.2876500536281639), 1e-13);
  EXPECT_LT(relative_error(planck_radiance(12.0, 200.0), 119.55038581577456192), 1e-13);
}

TEST(Planck, StrictlyIncreasingInTemperature) {
  for (double w = 8.0; w <= 13.2; w += 0.4)
    for (double t = 200.0; t <= 400.0; t += 10.0) EXPECT_GT(planck_radiance(w, t + 1.0), planck_radiance(w, t));
}

TEST(Planck, TemperatureDerivativeMatchesGoldenAndFiniteDifference) {
  EXPECT_LT(relative_error(planck_temperature_derivative(10.0, 300.0), 15.997156725132193944), 1e-12);
  EXPECT_LT(relative_error(planck_temperature_derivative(8.0, 250.0), 7.8684528679213609129), 1e-12);
  for (double w : {8.0, 9.7, 11.3, 13.2})
    for (double t : {220.0, 289.7, 380.0}) {
      const double h = 1e-3;
      const double fd = (planck_radiance(w, t + h) - planck_radiance(w, t - h)) / (2 * h);
      EXPECT_LT(relative_error(planck_temperature_derivative(w, t), fd), 1e-7);
    }
}

TEST(Planck, RejectsNonPositiveArguments) {
  EXPECT_THROW(planck_radiance(0.0, 300.0), DomainError);
  EXPECT_THROW(planck_radiance(10.0, 0.0), DomainError);
  EXPECT_THROW(planck_radiance(-1.0, 300.0), DomainError);
  EXPECT_THROW(brightness_temperature(10.0, 0.0), DomainError);
  EXPECT_THROW(brightness_temperature(0.0, 10.0), DomainError);
}

TEST(BrightnessTemperature, RoundTripOverLwirGrid) {
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      const double w = 8.0 + 5.0 * i / 4.0;
      const double t = 250.0 + 100.0 * j / 4.0;
      EXPECT_LT(std::abs(brightness_temperature(w, planck_radiance(w, t)) - t), 1e-6) << w << " µm " << t << " K";
    }
}

TEST(BrightnessTemperature, AirTemperatureRoundTrip) {
  EXPECT_NEAR(brightness_temperature(10.0, planck_radiance(10.0, 289.7)), 289.7, 1e-9);
}

TEST(BrightnessTemperature, MonotoneTowardZeroRadiance) {
  double l = planck_radiance(8.0, 300.0);
  double prev = brightness_temperature(8.0, l);
  for (int i = 0; i < 40; ++i) {
    l /= 2;
    const double t = brightness_temperature(8.0, l);
    EXPECT_LT(t, prev);
    EXPECT_GT(t, 0.0);
    prev = t;
  }
}

TEST(BrightnessTemperature, AgreesWithBisectionOracle) {
  const double t = brightness_temperature(12.0, 500.0);
  EXPECT_LT(relative_error(t, brightness_by_bisection(12.0, 500.0)), 1e-9);
  EXPECT_LT(relative_error(t, 262.24822705513064391), 1e-12);
}

TEST(Transmittance, ZeroPathIsOne) {
  const auto g = SpectralGrid::uniform(8.0, 9.0, 5);
  for (const double t : transmittance(AttenuationSpectrum(g, {0.0, 0.1, 1.0, 5.0, 0.01}), 0.0)) EXPECT_EQ(t, 1.0);
}

TEST(Transmittance, BandValueAtHundredMetres) {
  const SpectralGrid g(std::vector<double>{8.42});
  const auto tau = transmittance(AttenuationSpectrum(g, {8.6e-4}), 100.0);
  EXPECT_LT(relative_error(tau[0], 0.98039254460442071458), 1e-14);
}

TEST(Transmittance, MultiplicativeAndMonotoneInRange) {
  const auto g = SpectralGrid::uniform(8.0, 9.0, 4);
  const AttenuationSpectrum a(g, {0.0, 1e-3, 0.03, 0.2});
  const auto t1 = transmittance(a, 37.0);
  const auto t2 = transmittance(a, 55.5);
  const auto t12 = transmittance(a, 92.5);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_LT(relative_error(t12[k], t1[k] * t2[k]), 1e-13);
    EXPECT_LE(t12[k], t1[k]);
  }
  EXPECT_THROW(transmittance(a, -1.0), DomainError);
}

class IsrfTest : public ::testing::Test {
 protected:
  InstrumentResponse response{40.0};
  SpectralGrid target = SpectralGrid::uniform(9.0, 10.0, 201);  // 5 nm channels
  SpectralGrid dense = dense_grid_for(target, response);
};

TEST_F(IsrfTest, ConstantInConstantOut) {
  const auto out = isrf_convolve(RadianceSpectrum::constant(dense, 7.25), response, target);
  for (const double v : out.values()) EXPECT_LT(relative_error(v, 7.25), 1e-14);
}

TEST_F(IsrfTest, PreservesLinearRamp) {
  std::vector<double> ramp(dense.size());
  for (std::size_t j = 0; j < dense.size(); ++j) ramp[j] = 3.0 + 2.0 * dense[j];
  const auto out = isrf_convolve(RadianceSpectrum(dense, ramp), response, target);
  for (std::size_t k = 0; k < target.size(); ++k) EXPECT_LT(relative_error(out[k], 3.0 + 2.0 * target[k]), 1e-12);
}

TEST_F(IsrfTest, IsLinear) {
  std::vector<double> x(dense.size()), y(dense.size()), z(dense.size());
  for (std::size_t j = 0; j < dense.size(); ++j) {
    x[j] = 1.0 + std::sin(7.0 * dense[j]);
    y[j] = 2.0 + std::cos(13.0 * dense[j]);
    z[j] = 0.7 * x[j] + 2.5 * y[j];
  }
  const auto cx = isrf_convolve(RadianceSpectrum(dense, x), response, target);
  const auto cy = isrf_convolve(RadianceSpectrum(dense, y), response, target);
  const auto cz = isrf_convolve(RadianceSpectrum(dense, z), response, target);
  for (std::size_t k = 0; k < target.size(); ++k) EXPECT_LT(relative_error(cz[k], 0.7 * cx[k] + 2.5 * cy[k]), 1e-12);
}

// A single elevated dense sample must come out as a Gaussian of the
// configured FWHM, recovered by a least-squares parabola fit to log(output).
TEST_F(IsrfTest, SpikeRecoversFwhm) {
  std::vector<double> v(dense.size(), 0.0);
  std::size_t spike = dense.nearest(9.5);
  v[spike] = 1.0;
  const auto out = isrf_convolve(RadianceSpectrum(dense, v), response, target);
  double peak = 0.0;
  for (const double o : out.values()) peak = std::max(peak, o);
  // Normal equations for log y = a x² + b x + c over channels above 1% of peak.
  double s[5] = {}, t[3] = {};
  for (std::size_t k = 0; k < target.size(); ++k) {
    if (out[k] < 0.01 * peak) continue;
    const double x = target[k] - dense[spike];
    const double ly = std::log(out[k]);
    double p = 1.0;
    for (int i = 0; i < 5; ++i, p *= x) s[i] += p;
    t[0] += ly;
    t[1] += x * ly;
    t[2] += x * x * ly;
  }
  // Solve [[s4 s3 s2][s3 s2 s1][s2 s1 s0]]·[a b c] = [t2 t1 t0] by Cramer's rule.
  const double m[3][3] = {{s[4], s[3], s[2]}, {s[3], s[2], s[1]}, {s[2], s[1], s[0]}};
  const double r[3] = {t[2], t[1], t[0]};
  auto det3 = [](const double q[3][3]) {
    return q[0][0] * (q[1][1] * q[2][2] - q[1][2] * q[2][1]) - q[0][1] * (q[1][0] * q[2][2] - q[1][2] * q[2][0]) +
           q[0][2] * (q[1][0] * q[2][1] - q[1][1] * q[2][0]);
  };
  double ma[3][3];
  for (int i = 0; i < 3; ++i) {
    ma[i][0] = r[i];
    ma[i][1] = m[i][1];
    ma[i][2] = m[i][2];
  }
  const double a = det3(ma) / det3(m);
  const double sigma = std::sqrt(-1.0 / (2.0 * a));
  const double fwhm_um = 2.0 * std::sqrt(2.0 * std::numbers::ln2) * sigma;
  const double spacing = dense[1] - dense[0];
  EXPECT_NEAR(fwhm_um, response.fwhm_um(), spacing);
}

TEST_F(IsrfTest, RejectsThinMarginAndCoarseSpacing) {
  const auto narrow = SpectralGrid::uniform(9.0 - 0.1, 10.0 + 0.1, 301);
  EXPECT_THROW(isrf_convolve(RadianceSpectrum::constant(narrow, 1.0), response, target), PreconditionError);
  const auto coarse = SpectralGrid::uniform(8.0, 11.0, 301);  // 10 nm > FWHM/8
  EXPECT_THROW(isrf_convolve(RadianceSpectrum::constant(coarse, 1.0), response, target), PreconditionError);
  EXPECT_THROW(InstrumentResponse{0.0}.validate(), PreconditionError);
}

TEST(SpectrumCsv, RoundTripPreservesValues) {
  const auto dir = thermrange::testing::scratch_dir("spectrum_csv");
  const auto g = SpectralGrid::uniform(8.0, 13.2, 256);
  std::vector<double> v(g.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = planck_radiance(g[k], 287.3) * (1.0 + 1e-7 * std::sin(k * 1.3));
  const RadianceSpectrum s(g, v);
  write_spectrum_csv(dir / "s.csv", s);
  const auto back = read_spectrum_csv<RadianceTag>(dir / "s.csv");
  ASSERT_EQ(back.size(), s.size());
  EXPECT_TRUE(back.grid() == g);
  for (std::size_t k = 0; k < v.size(); ++k) EXPECT_LT(relative_error(back[k], s[k]), 1e-12);
}

TEST(SpectrumCsv, ReportsMissingFileAndMalformedRow) {
  const auto dir = thermrange::testing::scratch_dir("spectrum_csv_bad");
  try {
    read_spectrum_table(dir / "none.csv");
    FAIL();
  } catch (const SpectrumFileError& e) {
    EXPECT_EQ(e.reason(), SpectrumFileError::Reason::missing_file);
  }
  {
    std::ofstream(dir / "bad.csv") << "wavelength_um,value\n8.0,1\n8.1,oops\n";
  }
  try {
    read_spectrum_table(dir / "bad.csv");
    FAIL();
  } catch (const SpectrumFileError& e) {
    EXPECT_EQ(e.reason(), SpectrumFileError::Reason::malformed_row);
    EXPECT_EQ(e.row(), 3u);
  }
  {
    std::ofstream(dir / "order.csv") << "wavelength_um,value\n8.0,1\n7.9,1\n";
  }
  EXPECT_THROW(read_spectrum_table(dir / "order.csv"), SpectrumFileError);
}
