#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <vector>

#include "support.hpp"
#include "thermrange/atmosphere.hpp"
#include "thermrange/spectrum_csv.hpp"

using namespace thermrange;
using thermrange::testing::relative_error;
using thermrange::testing::scratch_dir;

TEST(AtmosphereState, AirTemperatureSanityBounds) {
  const auto g = SpectralGrid::uniform(8.0, 9.0, 3);
  const auto a = AttenuationSpectrum::constant(g, 0.01);
  EXPECT_THROW(AtmosphereState(149.0, a), DomainError);
  EXPECT_THROW(AtmosphereState(401.0, a), DomainError);
  EXPECT_NO_THROW(AtmosphereState(289.7, a));
}

TEST(LoadAttenuation, FileOnTargetGridIsUnchanged) {
  const auto dir = scratch_dir("atmo_identity");
  const auto g = SpectralGrid::uniform(8.0, 9.0, 11);
  std::vector<double> v(g.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = 0.001 * (k + 1) + 1e-5 * std::sin(double(k));
  write_spectrum_csv(dir / "a.csv", AttenuationSpectrum(g, v));
  const auto a = load_attenuation(dir / "a.csv", g);
  for (std::size_t k = 0; k < v.size(); ++k) EXPECT_EQ(a[k], v[k]);
}

TEST(LoadAttenuation, RejectsNegativeRowByLineNumber) {
  const auto dir = scratch_dir("atmo_negative");
  {
    std::ofstream(dir / "a.csv") << "wavelength_um,value\n8.0,0.01\n8.5,0.02\n9.0,-0.001\n9.5,0.01\n";
  }
  try {
    load_attenuation(dir / "a.csv", SpectralGrid::uniform(8.0, 9.5, 4));
    FAIL();
  } catch (const SpectrumFileError& e) {
    EXPECT_EQ(e.reason(), SpectrumFileError::Reason::negative_value);
    EXPECT_EQ(e.row(), 4u);
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos);
  }
}

TEST(LoadAttenuation, MidpointsAreAveragesOfBracketingSamples) {
  const auto dir = scratch_dir("atmo_interp");
  const auto file_grid = SpectralGrid::uniform(8.0, 9.0, 101);  // 10 nm
  std::vector<double> v(file_grid.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = 0.01 + 0.005 * std::sin(0.37 * double(k));
  write_spectrum_csv(dir / "a.csv", AttenuationSpectrum(file_grid, v));
  // 20 nm target grid whose channels sit halfway between file samples.
  std::vector<double> mid;
  for (std::size_t k = 0; k + 1 < file_grid.size(); k += 2) mid.push_back(0.5 * (file_grid[k] + file_grid[k + 1]));
  const auto a = load_attenuation(dir / "a.csv", SpectralGrid(mid));
  for (std::size_t i = 0; i < mid.size(); ++i) {
    const std::size_t k = 2 * i;
    EXPECT_LT(relative_error(a[i], 0.5 * (v[k] + v[k + 1])), 1e-12);
  }
}

TEST(LoadAttenuation, RejectsCoverageGap) {
  const auto dir = scratch_dir("atmo_gap");
  write_spectrum_csv(dir / "a.csv", AttenuationSpectrum::constant(SpectralGrid::uniform(8.0, 9.0, 11), 0.01));
  try {
    load_attenuation(dir / "a.csv", SpectralGrid::uniform(8.0, 9.5, 11));
    FAIL();
  } catch (const SpectrumFileError& e) {
    EXPECT_EQ(e.reason(), SpectrumFileError::Reason::coverage_gap);
  }
}

TEST(LoadAttenuation, LoadWriteLoadIsIdempotent) {
  const auto dir = scratch_dir("atmo_idem");
  const auto& ref = thermrange::testing::reference_atmosphere();
  write_spectrum_csv(dir / "a.csv", ref.attenuation);
  const auto once = load_attenuation(dir / "a.csv", ref.grid());
  write_spectrum_csv(dir / "b.csv", once);
  const auto twice = load_attenuation(dir / "b.csv", ref.grid());
  for (std::size_t k = 0; k < once.size(); ++k) {
    EXPECT_LT(relative_error(once[k], ref.attenuation[k]), 1e-12);
    EXPECT_LT(relative_error(twice[k], once[k]), 1e-12);
  }
}

TEST(SyntheticLines, ContinuumOnlyIsConstant) {
  const auto g = SpectralGrid::uniform(8.0, 13.2, 64);
  const auto a = synthesize_attenuation(SyntheticLineModel{{}, 2e-4}, g);
  for (const double v : a.values()) EXPECT_EQ(v, 2e-4);
}

TEST(SyntheticLines, LorentzianPeakAndHalfWidth) {
  const SpectralGrid g(std::vector<double>{9.99, 10.0, 10.01});
  const SyntheticLineModel m{{AbsorptionLine{10.0, 0.05, 0.01}}, 1e-4};
  const auto a = synthesize_attenuation(m, g);
  EXPECT_NEAR(a[1], 1e-4 + 0.05, 1e-15);
  EXPECT_NEAR(a[0], 1e-4 + 0.025, 1e-12);
  EXPECT_NEAR(a[2], 1e-4 + 0.025, 1e-12);
}

TEST(SyntheticLines, AboveContinuumAndSymmetricAboutIsolatedLine) {
  const auto g = SpectralGrid::uniform(9.5, 10.5, 101);  // symmetric about 10.0
  const SyntheticLineModel m{{AbsorptionLine{10.0, 0.03, 0.02}}, 3e-4};
  const auto a = synthesize_attenuation(m, g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    EXPECT_GE(a[k], 3e-4);
    EXPECT_NEAR(a[k], a[g.size() - 1 - k], 1e-12);
  }
}

TEST(SyntheticLines, ValidationNamesTheBadLine) {
  const auto g = SpectralGrid::uniform(8.0, 13.2, 16);
  EXPECT_THROW(synthesize_attenuation(SyntheticLineModel{{{14.0, 0.01, 0.01}}, 0.0}, g), PreconditionError);
  EXPECT_THROW(synthesize_attenuation(SyntheticLineModel{{{10.0, -0.01, 0.01}}, 0.0}, g), PreconditionError);
  EXPECT_THROW(synthesize_attenuation(SyntheticLineModel{{{10.0, 0.01, 0.0}}, 0.0}, g), PreconditionError);
  EXPECT_THROW(synthesize_attenuation(SyntheticLineModel{{}, -1.0}, g), PreconditionError);
}

TEST(SyntheticLines, IsrfBroadeningKeepsLineArea) {
  // Broadening lowers the peak but keeps the continuum far from lines.
  const auto g = SpectralGrid::uniform(8.0, 13.2, 256);
  const SyntheticLineModel m{{AbsorptionLine{10.5, 0.05, 0.01}}, 2e-4};
  const auto raw = synthesize_attenuation(m, g);
  const auto broad = synthesize_attenuation(m, g, InstrumentResponse{40.0});
  const auto c = g.nearest(10.5);
  EXPECT_LT(broad[c], raw[c]);
  EXPECT_GT(broad[c], 2e-4);
  EXPECT_NEAR(broad[0], raw[0], 1e-5);
}

TEST(ReferenceAtmosphere, HasManyLinesAndClearOzoneWindow) {
  const auto& atmo = thermrange::testing::reference_atmosphere();
  EXPECT_EQ(atmo.grid().size(), 256u);
  EXPECT_EQ(atmo.grid().front(), 8.0);
  EXPECT_EQ(atmo.grid().back(), 13.2);
  const auto lines = harness::read_line_list(std::filesystem::path(THERMRANGE_PRESET_DIR) / "lwir_lines.csv");
  EXPECT_GE(lines.size(), 20u);
  double lo = 1.0, hi = 0.0;
  for (const auto& l : lines) {
    lo = std::min(lo, l.peak_db_per_m);
    hi = std::max(hi, l.peak_db_per_m);
    EXPECT_FALSE(l.center_um > 9.4 && l.center_um < 9.7);
  }
  EXPECT_GE(hi / lo, 20.0);  // weak to strong
}

TEST(Downwelling, ZeroAmplitudeReturnsBase) {
  const auto g = SpectralGrid::uniform(8.0, 13.2, 256);
  const auto base = blackbody(g, 250.0);
  const auto out = synthesize_downwelling(DownwellingModel{base, OzoneFeature{9.6, 0.0, 0.05}}, g);
  for (std::size_t k = 0; k < g.size(); ++k) EXPECT_EQ(out[k], base[k]);
}

TEST(Downwelling, EightMicroflickFeatureSeparatesProbeWavelengths) {
  const SpectralGrid g(std::vector<double>{9.50, 9.58});
  const auto base = RadianceSpectrum::constant(g, 300.0);
  const auto out = synthesize_downwelling(DownwellingModel{base, OzoneFeature{9.6, 8.0, 0.05}}, g);
  EXPECT_GT(std::abs(out[1] - out[0]), 4.0);
}

TEST(Downwelling, FeatureExtremumNearCentre) {
  const auto g = SpectralGrid::uniform(8.0, 13.2, 256);
  const auto base = blackbody(g, 250.0);
  const auto out = synthesize_downwelling(DownwellingModel{base, OzoneFeature{9.6, 5.0, 0.05}}, g);
  std::size_t best = 0;
  for (std::size_t k = 0; k < g.size(); ++k)
    if (std::abs(out[k] - base[k]) > std::abs(out[best] - base[best])) best = k;
  EXPECT_LE(std::abs(long(best) - long(g.nearest(9.6))), 1);
}

TEST(Downwelling, RejectsNegativeAmplitudeOrBase) {
  const auto g = SpectralGrid::uniform(8.0, 9.0, 4);
  EXPECT_THROW(synthesize_downwelling(DownwellingModel{RadianceSpectrum(g, {1, -1, 1, 1}), {}}, g),
               PreconditionError);
  EXPECT_THROW(synthesize_downwelling(DownwellingModel{RadianceSpectrum::constant(g, 1), {9.6, -1, 0.05}}, g),
               PreconditionError);
}
