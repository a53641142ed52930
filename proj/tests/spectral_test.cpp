#include <gtest/gtest.h>

#include <sstream>

#include "krescale/resample.hpp"
#include "krescale/spectral.hpp"
#include "support.hpp"

namespace krescale {
namespace {

using test::kPi;
using test::random_tensor;

TEST(CosineWave, DcIsAllOnes) {
  EXPECT_TRUE(cosine_wave({1.0, 0, 0, 0, 0.0}, 3, 2, 4).identical(Tensor::filled({3, 2, 4}, 1.0)));
}

TEST(CosineWave, QuarterPeriods) {
  const Tensor t = cosine_wave({2.0, 1, 0, 0, 0.0}, 4, 1, 1);
  EXPECT_NEAR(t[0], 2.0, 1e-15);
  EXPECT_NEAR(t[1], 0.0, 1e-15);
  EXPECT_NEAR(t[2], -2.0, 1e-15);
  EXPECT_NEAR(t[3], 0.0, 1e-15);
}

TEST(CosineWave, PhaseShift) {
  EXPECT_NEAR(cosine_wave({1.0, 1, 1, 0, kPi / 2}, 4, 4, 1)(0, 0, 0), 0.0, 1e-15);
}

TEST(CosineWave, RejectsOutOfRangeFrequency) {
  EXPECT_KRESCALE_ERROR(cosine_wave({1.0, 4, 0, 0, 0.0}, 4, 4, 1), ErrorCode::FrequencyOutOfRange);
  EXPECT_KRESCALE_ERROR(cosine_wave({1.0, 0, 0, 1, 0.0}, 4, 4, 1), ErrorCode::FrequencyOutOfRange);
}

TEST(Dft3, OnesConcentrateInDc) {
  const ComplexGrid g = dft3(Tensor::filled({2, 2, 2}, 1.0));
  EXPECT_EQ(amplitude_at(g, 0, 0, 0), std::complex<double>(8.0, 0.0));
  for (std::size_t k = 1; k < 8; ++k) EXPECT_LT(std::abs(g[k]), 1e-15);
}

TEST(Dft3, DeltaIsFlat) {
  std::vector<double> data(3 * 4 * 2, 0.0);
  data[0] = 1.0;
  const ComplexGrid g = dft3(Tensor({3, 4, 2}, data));
  for (std::size_t k = 0; k < g.size(); ++k) {
    EXPECT_NEAR(g[k].real(), 1.0, 1e-15);
    EXPECT_NEAR(g[k].imag(), 0.0, 1e-15);
  }
}

TEST(Dft3Oracle, MatchesNaiveSummation) {
  Rng rng(101);
  for (const Shape& shape : {Shape{1, 1, 1}, Shape{2, 3, 1}, Shape{5, 4, 3}, Shape{6, 5, 2}, Shape{7, 3, 4}}) {
    const Tensor field = random_tensor(rng, shape);
    const ComplexGrid fast = dft3(field);
    const auto slow = test::naive_dft3(field);
    ASSERT_EQ(fast.size(), slow.size());
    for (std::size_t k = 0; k < slow.size(); ++k) {
      EXPECT_NEAR(fast[k].real(), slow[k].real(), 1e-9);
      EXPECT_NEAR(fast[k].imag(), slow[k].imag(), 1e-9);
    }
  }
}

TEST(Dft3Oracle, RankTwoPlaneIsSingleChannel) {
  Rng rng(102);
  const Tensor plane = random_tensor(rng, {4, 5});
  const ComplexGrid a = dft3(plane);
  const ComplexGrid b = dft3(plane.reshaped({4, 5, 1}));
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k], b[k]);
}

TEST(Dft3, InverseRoundTrip) {
  Rng rng(103);
  const Tensor field = random_tensor(rng, {5, 3, 2});
  const ComplexGrid back = idft3(dft3(field));
  for (std::size_t k = 0; k < field.size(); ++k) {
    EXPECT_NEAR(back.re()[k], field[k], 1e-12);
    EXPECT_NEAR(back.im()[k], 0.0, 1e-12);
  }
}

TEST(DftBin, MatchesFullTransform) {
  Rng rng(104);
  const Tensor field = random_tensor(rng, {4, 3, 2});
  const ComplexGrid g = dft3(field);
  for (std::size_t u = 0; u < 4; ++u)
    for (std::size_t v = 0; v < 3; ++v)
      for (std::size_t w = 0; w < 2; ++w) EXPECT_LT(std::abs(dft_bin(field, u, v, w) - amplitude_at(g, u, v, w)), 1e-12);
}

// Frozen from the naive oracle: A M N C / 2 = 2 * 3 * 3 * 1 / 2.
TEST(AmplitudeAt, MatchedBinOfThreeByThreeCosine) {
  const Tensor field = cosine_wave({2.0, 1, 1, 0, 0.0}, 3, 3, 1);
  const auto naive = test::naive_dft3(field);
  EXPECT_NEAR(naive[(1 * 3 + 1) * 1].real(), 9.0, 1e-12);
  const std::complex<double> bin = amplitude_at(dft3(field), 1, 1, 0);
  EXPECT_NEAR(bin.real(), 9.0, 1e-12);
  EXPECT_NEAR(bin.imag(), 0.0, 1e-12);
}

TEST(AmplitudeAt, RejectsOutOfRange) {
  const ComplexGrid g = dft3(Tensor::zeros({2, 2, 2}));
  EXPECT_KRESCALE_ERROR(amplitude_at(g, 2, 0, 0), ErrorCode::IndexOutOfRange);
  EXPECT_KRESCALE_ERROR(amplitude_at(g, 0, 0, 2), ErrorCode::IndexOutOfRange);
}

// Random cosines whose matched bin differs from its conjugate: the matched bin
// equals (A M N C / 2) exp(j phi) and every other bin except the conjugate vanishes.
TEST(SpectralProperty, MatchedBinAndZeroOffBin) {
  Rng rng(105);
  int checked = 0;
  while (checked < 200) {
    const auto m = static_cast<std::size_t>(rng.integer(1, 6));
    const auto n = static_cast<std::size_t>(rng.integer(1, 6));
    const auto c = static_cast<std::size_t>(rng.integer(1, 4));
    CosineSpec spec{rng.uniform(-2.0, 2.0), static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(m) - 1)),
                    static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(n) - 1)),
                    static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(c) - 1)),
                    rng.uniform(-kPi, kPi)};
    if (is_self_conjugate(spec, m, n, c) || std::abs(spec.amplitude) < 0.05) continue;
    ++checked;
    const double volume = static_cast<double>(m * n * c);
    const ComplexGrid g = dft3(cosine_wave(spec, m, n, c));
    const std::complex<double> expected = std::polar(spec.amplitude * volume / 2.0, spec.phase);
    EXPECT_LT(std::abs(amplitude_at(g, spec.u, spec.v, spec.w) - expected), 1e-9 * std::abs(expected));
    EXPECT_NEAR(matched_bin_magnitude(spec, m, n, c), std::abs(expected), 1e-12 * std::abs(expected));

    const std::size_t cu = (m - spec.u) % m, cv = (n - spec.v) % n, cw = (c - spec.w) % c;
    for (std::size_t u = 0; u < m; ++u)
      for (std::size_t v = 0; v < n; ++v)
        for (std::size_t w = 0; w < c; ++w) {
          const bool matched = u == spec.u && v == spec.v && w == spec.w;
          const bool conjugate = u == cu && v == cv && w == cw;
          if (matched || conjugate) continue;
          EXPECT_LT(std::abs(amplitude_at(g, u, v, w)), 1e-9 * std::abs(spec.amplitude) * volume);
        }
  }
}

TEST(SpectralProperty, SelfConjugateBinDoubles) {
  // u = 0 and 2u = M: the two exponentials share a bin.
  const CosineSpec spec{1.5, 2, 0, 0, 0.4};
  const std::complex<double> bin = amplitude_at(dft3(cosine_wave(spec, 4, 3, 1)), 2, 0, 0);
  EXPECT_NEAR(bin.real(), 1.5 * 12 * std::cos(0.4), 1e-12);
  EXPECT_NEAR(bin.imag(), 0.0, 1e-12);
  EXPECT_NEAR(matched_bin_magnitude(spec, 4, 3, 1), std::abs(bin), 1e-12);
}

TEST(SpectralProperty, Parseval) {
  Rng rng(106);
  for (int trial = 0; trial < 30; ++trial) {
    const Tensor field = random_tensor(rng, {static_cast<std::size_t>(rng.integer(1, 6)),
                                             static_cast<std::size_t>(rng.integer(1, 6)),
                                             static_cast<std::size_t>(rng.integer(1, 4))});
    double spatial = 0.0, spectral = 0.0;
    for (double v : field.data()) spatial += v * v;
    const ComplexGrid g = dft3(field);
    for (std::size_t k = 0; k < g.size(); ++k) spectral += std::norm(g[k]);
    EXPECT_NEAR(spatial, spectral / static_cast<double>(field.size()), 1e-9 * spatial);
  }
}

// --- ratio and attenuation ----------------------------------------------------------

TEST(VerifyRatio, FourByFourDoubled) {
  const RatioReport r = verify_ratio({1.0, 1, 1, 0, 0.0}, 4, 4, 1, {2, 2});
  EXPECT_EQ(r.predicted, 4.0);
  EXPECT_LT(r.rel_err, 1e-9);
}

TEST(VerifyRatio, UnitScaleIsExact) {
  const RatioReport r = verify_ratio({0.7, 2, 1, 1, -0.3}, 5, 3, 2, {1, 1});
  EXPECT_EQ(r.measured, 1.0);
  EXPECT_EQ(r.rel_err, 0.0);
}

// Cross-checked against the naive DFT on both grids.
TEST(VerifyRatio, AnisotropicScale) {
  const CosineSpec spec{3.0, 1, 2, 1, 1.0};
  const RatioReport r = verify_ratio(spec, 3, 5, 2, {2, 3});
  EXPECT_EQ(r.predicted, 6.0);
  EXPECT_LT(r.rel_err, 1e-9);
  const auto base = test::naive_dft3(cosine_wave(spec, 3, 5, 2));
  const auto fine = test::naive_dft3(cosine_wave(spec, 6, 15, 2));
  const double naive_ratio = std::abs(fine[(1 * 15 + 2) * 2 + 1]) / std::abs(base[(1 * 5 + 2) * 2 + 1]);
  EXPECT_NEAR(naive_ratio, 6.0, 1e-9 * 6.0);
}

TEST(VerifyRatio, RejectsZeroAmplitude) {
  EXPECT_KRESCALE_ERROR(verify_ratio({0.0, 1, 1, 0, 0.0}, 4, 4, 1, {2, 2}), ErrorCode::DegenerateAmplitude);
  EXPECT_KRESCALE_ERROR(verify_attenuation({0.0, 1, 1, 0, 0.0}, 4, 4, 1, {2, 2}), ErrorCode::DegenerateAmplitude);
}

TEST(VerifyAttenuation, FourByFourQuarter) {
  const RatioReport r = verify_attenuation({1.0, 1, 1, 0, 0.0}, 4, 4, 1, {2, 2});
  EXPECT_EQ(r.predicted, 0.25);
  EXPECT_LT(r.rel_err, 1e-9);
}

TEST(VerifyAttenuation, UnitScaleIsExact) {
  const RatioReport r = verify_attenuation({1.2, 1, 2, 0, 0.5}, 3, 4, 2, {1, 1});
  EXPECT_EQ(r.measured, 1.0);
}

TEST(VerifyAttenuation, SixthOnThreeCube) {
  const CosineSpec spec{2.0, 1, 1, 1, 0.7};
  const RatioReport r = verify_attenuation(spec, 3, 3, 3, {3, 2});
  EXPECT_NEAR(r.predicted, 1.0 / 6.0, 1e-16);
  EXPECT_LT(r.rel_err, 1e-9);
  const Tensor fine = cosine_wave(spec, 9, 6, 3);
  const auto masked = test::naive_dft3(lattice_mask(fine, {3, 2}));
  const auto full = test::naive_dft3(fine);
  const std::size_t bin = (1 * 6 + 1) * 3 + 1;
  EXPECT_NEAR(std::abs(masked[bin]) / std::abs(full[bin]), 1.0 / 6.0, 1e-9 / 6.0);
}

TEST(LatticeMask, ZeroesOffLatticeSamples) {
  const Tensor out = lattice_mask(Tensor::filled({4, 6, 1}, 2.0), {2, 3});
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 6; ++j) EXPECT_EQ(out(i, j, 0), (i % 2 == 0 && j % 3 == 0) ? 2.0 : 0.0);
}

// --- spectrum reports ----------------------------------------------------------------

TEST(SpectrumReport, ZeroPlane) {
  const SpectrumReport r = spectrum_report(Tensor::zeros({3, 3}), 0.5);
  EXPECT_EQ(r.total_energy, 0.0);
  EXPECT_EQ(r.baseband_energy, 0.0);
  EXPECT_EQ(r.out_of_band_share(), 0.0);
}

TEST(SpectrumReport, FullBandHoldsAllEnergy) {
  std::vector<double> data(25, 0.0);
  data[12] = 3.0;
  const SpectrumReport r = spectrum_report(Tensor({5, 5}, data), 1.0);
  EXPECT_EQ(r.baseband_energy, r.total_energy);
  EXPECT_NEAR(r.total_energy, 25 * 9.0, 1e-12);
}

TEST(SpectrumReport, RejectsBadFraction) {
  EXPECT_KRESCALE_ERROR(spectrum_report(Tensor::zeros({3, 3}), 0.0), ErrorCode::BadFraction);
  EXPECT_KRESCALE_ERROR(spectrum_report(Tensor::zeros({3, 3}), 1.5), ErrorCode::BadFraction);
}

TEST(SpectrumReport, MagnitudeInvariants) {
  Rng rng(107);
  const SpectrumReport r = spectrum_report(random_tensor(rng, {5, 4}), 0.5);
  for (std::size_t k = 0; k < r.magnitude.size(); ++k) {
    EXPECT_EQ(r.magnitude[k], std::hypot(r.grid.re()[k], r.grid.im()[k]));
    EXPECT_EQ(r.log1p_magnitude[k], std::log1p(r.magnitude[k]));
  }
  EXPECT_GE(r.baseband_energy, 0.0);
  EXPECT_LE(r.baseband_energy, r.total_energy);
}

// 5 x 5 with fraction 0.5: |f| <= floor(2.5 / 2) = 1 per axis, i.e. bins
// {0, 1, 4} on each axis (9 of 25).
TEST(SpectrumReport, BasebandRectangle) {
  EXPECT_EQ(signed_frequency(0, 5), 0);
  EXPECT_EQ(signed_frequency(2, 5), 2);
  EXPECT_EQ(signed_frequency(3, 5), -2);
  EXPECT_EQ(signed_frequency(2, 4), -2);
  std::vector<double> data(25, 0.0);
  data[0] = 1.0;
  const SpectrumReport r = spectrum_report(Tensor({5, 5}, data), 0.5);
  EXPECT_NEAR(r.baseband_energy, 9.0, 1e-12);
  EXPECT_NEAR(r.total_energy, 25.0, 1e-12);
}

TEST(SpectrumReport, DilationLeaksMoreThanBicubic) {
  Rng rng(108);
  const Tensor kernel = random_tensor(rng, {1, 1, 3, 3});
  const Tensor dilated = rescale_kernel(KernelStack::without_bias(kernel), {2, 2}, InterpMethod::Dilation).weights();
  const Tensor bicubic = rescale_kernel(KernelStack::without_bias(kernel), {2, 2}, InterpMethod::Bicubic).weights();
  EXPECT_GT(spectrum_report(dilated.reshaped({5, 5}), 0.5).out_of_band_share(),
            spectrum_report(bicubic.reshaped({5, 5}), 0.5).out_of_band_share());
}

TEST(SpectrumReport, AveragedStackOfIdenticalPlanes) {
  Rng rng(109);
  const Tensor plane = random_tensor(rng, {3, 4});
  std::vector<double> data;
  for (int i = 0; i < 6; ++i) data.insert(data.end(), plane.data().begin(), plane.data().end());
  const SpectrumReport single = spectrum_report(plane, 0.5);
  const SpectrumReport avg = spectrum_report_averaged(Tensor({2, 3, 3, 4}, data), 0.5);
  for (std::size_t k = 0; k < single.magnitude.size(); ++k) EXPECT_NEAR(avg.magnitude[k], single.magnitude[k], 1e-12);
  EXPECT_KRESCALE_ERROR(spectrum_report_averaged(Tensor::zeros({2, 2, 2}), 0.5), ErrorCode::BadRank);
}

// --- export ----------------------------------------------------------------------------

std::string export_to_string(const SpectrumReport& r, SpectrumFormat f) {
  std::ostringstream out(std::ios::binary);
  export_spectrum(r, out, f);
  return out.str();
}

TEST(ExportSpectrum, SingleBinCsv) {
  const std::string csv = export_to_string(spectrum_report(Tensor({1, 1}, {2.0}), 1.0), SpectrumFormat::Csv);
  const std::string prefix = "row,col,magnitude,log1p\n0,0,2,";
  ASSERT_EQ(csv.substr(0, prefix.size()), prefix);
  ASSERT_EQ(csv.back(), '\n');
  // 17 significant digits; the last one depends on the libm's log1p.
  const std::string field = csv.substr(prefix.size(), csv.size() - prefix.size() - 1);
  EXPECT_EQ(field.size(), 18u);
  EXPECT_NEAR(std::stod(field), std::log(3.0), 5e-16);
}

TEST(ExportSpectrum, CsvParsesBackToMagnitudes) {
  Rng rng(110);
  const SpectrumReport r = spectrum_report(random_tensor(rng, {4, 5}), 0.5);
  std::istringstream in(export_to_string(r, SpectrumFormat::Csv));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "row,col,magnitude,log1p");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    std::size_t row = 0, col = 0;
    double mag = 0.0, lp = 0.0;
    ASSERT_EQ(std::sscanf(line.c_str(), "%zu,%zu,%lf,%lf", &row, &col, &mag, &lp), 4) << line;
    EXPECT_NEAR(mag, r.magnitude(row, col), 1e-12 * std::max(1.0, mag));
    EXPECT_EQ(lp, r.log1p_magnitude(row, col));
    ++rows;
  }
  EXPECT_EQ(rows, 20u);
}

TEST(ExportSpectrum, ConstantMapIsAllZeroPgm) {
  const std::string pgm = export_to_string(spectrum_report(Tensor::zeros({2, 3}), 0.5), SpectrumFormat::Pgm);
  const std::string header = "P5\n3 2\n65535\n";
  ASSERT_EQ(pgm.substr(0, header.size()), header);
  EXPECT_EQ(pgm.substr(header.size()), std::string(12, '\0'));
}

// DC of a constant plane lands at the fftshifted center and takes maxval.
TEST(ExportSpectrum, PgmIsShiftedAndBigEndian) {
  const std::string pgm = export_to_string(spectrum_report(Tensor::filled({3, 4}, 1.0), 1.0), SpectrumFormat::Pgm);
  const std::string header = "P5\n4 3\n65535\n";
  ASSERT_EQ(pgm.size(), header.size() + 24);
  const std::string body = pgm.substr(header.size());
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 4; ++c) {
      const auto hi = static_cast<unsigned char>(body[2 * (r * 4 + c)]);
      const auto lo = static_cast<unsigned char>(body[2 * (r * 4 + c) + 1]);
      const bool centre = r == 1 && c == 2;
      EXPECT_EQ((hi << 8) | lo, centre ? 65535 : 0) << r << "," << c;
    }
}

TEST(ExportSpectrum, GoldenFiles) {
  // A fixed, seeded 5 x 5 bicubic-rescaled kernel plane.
  Rng rng(2718);
  const Tensor kernel = random_tensor(rng, {1, 1, 3, 3});
  const Tensor plane =
      rescale_kernel(KernelStack::without_bias(kernel), {2, 2}, InterpMethod::Bicubic).weights().reshaped({5, 5});
  const SpectrumReport r = spectrum_report(plane, 0.5);
  const std::string csv = export_to_string(r, SpectrumFormat::Csv);
  const std::string pgm = export_to_string(r, SpectrumFormat::Pgm);
  EXPECT_EQ(csv, export_to_string(spectrum_report(plane, 0.5), SpectrumFormat::Csv));
  test::expect_golden("spectrum_bicubic5x5.csv", csv);
  test::expect_golden("spectrum_bicubic5x5.pgm", pgm);
}

TEST(SpectrumFormat, Parses) {
  EXPECT_EQ(parse_spectrum_format("csv"), SpectrumFormat::Csv);
  EXPECT_EQ(parse_spectrum_format("pgm"), SpectrumFormat::Pgm);
  EXPECT_KRESCALE_ERROR(parse_spectrum_format("png"), ErrorCode::BadMethod);
}

}  // namespace
}  // namespace krescale
