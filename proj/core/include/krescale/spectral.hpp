#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <string_view>

#include "krescale/resample.hpp"
#include "krescale/tensor.hpp"

namespace krescale {

// A * cos(2 pi (u m / M + v n / N + w c / C) + phase) over an M x N x C grid.
struct CosineSpec {
  double amplitude = 1.0;
  std::size_t u = 0;
  std::size_t v = 0;
  std::size_t w = 0;
  double phase = 0.0;
};

// Throws FrequencyOutOfRange unless u < M, v < N, w < C.
void check_frequencies(const CosineSpec& spec, std::size_t m, std::size_t n, std::size_t c);

// Samples the cosine on an (M, N, C) grid. Phases are reduced modulo the
// grid period in integer arithmetic before scaling by 2 pi.
Tensor cosine_wave(const CosineSpec& spec, std::size_t m, std::size_t n, std::size_t c);

// Unnormalized forward DFT of a rank-3 field (rank-2 planes are treated as
// C = 1). Evaluated by direct summation, one axis at a time.
ComplexGrid dft3(const Tensor& field);

// Inverse of dft3, including the 1 / (M N C) factor.
ComplexGrid idft3(const ComplexGrid& spectrum);

// Single bin of dft3 by direct summation over the whole field.
std::complex<double> dft_bin(const Tensor& field, std::size_t u, std::size_t v, std::size_t w);

// Throws IndexOutOfRange when (u, v, w) falls outside the grid.
std::complex<double> amplitude_at(const ComplexGrid& grid, std::size_t u, std::size_t v, std::size_t w);

// Closed-form magnitude of the matched bin of cosine_wave(spec, M, N, C):
// A M N C / 2, or A M N C |cos(phase)| when (u, v, w) is its own conjugate
// bin (each index is 0 or exactly half its extent).
double matched_bin_magnitude(const CosineSpec& spec, std::size_t m, std::size_t n, std::size_t c);
bool is_self_conjugate(const CosineSpec& spec, std::size_t m, std::size_t n, std::size_t c);

struct RatioReport {
  double measured = 0.0;
  double predicted = 0.0;
  double rel_err = 0.0;
};

// |matched bin on (aM, bN, C)| / |matched bin on (M, N, C)|, predicted a * b.
RatioReport verify_ratio(const CosineSpec& spec, std::size_t m, std::size_t n, std::size_t c, ScaleFactor scale);

// The supersampled cosine with every sample off the (a, b) lattice zeroed,
// compared against the unmasked supersample at the matched bin; predicted
// 1 / (a * b).
RatioReport verify_attenuation(const CosineSpec& spec, std::size_t m, std::size_t n, std::size_t c,
                               ScaleFactor scale);

// Zeroes every sample of an (aM, bN, C) field whose row is not a multiple of
// a or whose column is not a multiple of b.
Tensor lattice_mask(const Tensor& field, ScaleFactor scale);

struct SpectrumReport {
  ComplexGrid grid;
  Tensor magnitude;
  Tensor log1p_magnitude;
  double baseband_energy = 0.0;
  double total_energy = 0.0;

  // 1 - baseband / total; 0 for an all-zero spectrum.
  double out_of_band_share() const noexcept;
};

// Signed frequency of DFT bin k on an axis of length n (fftshift convention:
// bins above (n - 1) / 2 wrap to negative).
std::ptrdiff_t signed_frequency(std::size_t k, std::size_t n) noexcept;

// 2-D spectrum of a rank-2 plane. Baseband is the centered rectangle of bins
// with |signed frequency| <= floor(extent * fraction / 2) on each axis.
SpectrumReport spectrum_report(const Tensor& plane, double baseband_fraction);

// Spectrum of a rank-4 stack: magnitudes averaged over all (o, c_in) planes.
// The report's grid holds the averaged magnitude as a real spectrum.
SpectrumReport spectrum_report_averaged(const Tensor& stack, double baseband_fraction);

enum class SpectrumFormat { Csv, Pgm };

SpectrumFormat parse_spectrum_format(std::string_view name);

// csv: "row,col,magnitude,log1p", natural bin order, %.17g, LF endings.
// pgm: binary P5, maxval 65535, big-endian, fftshifted log1p map min-max
//      scaled to [0, 65535]; a zero-range map is written as all zeros.
void export_spectrum(const SpectrumReport& report, std::ostream& sink, SpectrumFormat format);

}  // namespace krescale
