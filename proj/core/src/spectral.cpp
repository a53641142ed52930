#include "krescale/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "krescale/error.hpp"

namespace krescale {
namespace {

using cplx = std::complex<double>;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// exp(sign * j 2 pi r / n) for r in [0, n).
std::vector<cplx> twiddles(std::size_t n, double sign) {
  std::vector<cplx> table(n);
  for (std::size_t r = 0; r < n; ++r) {
    const double angle = kTwoPi * static_cast<double>(r) / static_cast<double>(n);
    table[r] = {std::cos(angle), sign * std::sin(angle)};
  }
  return table;
}

// In-place DFT along one axis of a row-major (outer, len, inner) view.
void transform_axis(std::vector<cplx>& data, std::size_t outer, std::size_t len, std::size_t inner, double sign) {
  if (len == 1) return;
  const std::vector<cplx> table = twiddles(len, sign);
  std::vector<cplx> line(len);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t i = 0; i < inner; ++i) {
      const std::size_t base = o * len * inner + i;
      for (std::size_t k = 0; k < len; ++k) {
        cplx acc = 0.0;
        for (std::size_t x = 0; x < len; ++x) acc += data[base + x * inner] * table[(k * x) % len];
        line[k] = acc;
      }
      for (std::size_t k = 0; k < len; ++k) data[base + k * inner] = line[k];
    }
  }
}

Shape as_grid3(const Shape& shape) {
  if (shape.size() == 3) return shape;
  if (shape.size() == 2) return {shape[0], shape[1], 1};
  throw Error(ErrorCode::BadRank, "expected a rank-2 or rank-3 field, got " + shape_to_string(shape));
}

void transform3(std::vector<cplx>& data, const Shape& g, double sign) {
  transform_axis(data, g[0] * g[1], g[2], 1, sign);
  transform_axis(data, g[0], g[1], g[2], sign);
  transform_axis(data, 1, g[0], g[1] * g[2], sign);
}

ComplexGrid to_grid(const Shape& shape, const std::vector<cplx>& data, double scale) {
  std::vector<double> re(data.size());
  std::vector<double> im(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    re[i] = data[i].real() * scale;
    im[i] = data[i].imag() * scale;
  }
  return ComplexGrid(shape, std::move(re), std::move(im));
}

void check_fraction(double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error(ErrorCode::BadFraction, "baseband fraction " + std::to_string(fraction) + " outside (0, 1]");
  }
}

SpectrumReport report_from(ComplexGrid grid, std::vector<double> magnitude, std::size_t rows, std::size_t cols,
                           double fraction) {
  const auto half_r = static_cast<std::ptrdiff_t>(std::floor(static_cast<double>(rows) * fraction / 2.0));
  const auto half_c = static_cast<std::ptrdiff_t>(std::floor(static_cast<double>(cols) * fraction / 2.0));
  std::vector<double> log_map(magnitude.size());
  double total = 0.0;
  double baseband = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const bool row_in = std::abs(signed_frequency(r, rows)) <= half_r;
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t k = r * cols + c;
      log_map[k] = std::log1p(magnitude[k]);
      const double energy = magnitude[k] * magnitude[k];
      total += energy;
      if (row_in && std::abs(signed_frequency(c, cols)) <= half_c) baseband += energy;
    }
  }
  return SpectrumReport{std::move(grid), Tensor({rows, cols}, std::move(magnitude)),
                        Tensor({rows, cols}, std::move(log_map)), baseband, total};
}

void write_csv(const SpectrumReport& report, std::ostream& sink) {
  const std::size_t rows = report.magnitude.dim(0);
  const std::size_t cols = report.magnitude.dim(1);
  sink << "row,col,magnitude,log1p\n";
  char buf[96];
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      std::snprintf(buf, sizeof(buf), "%zu,%zu,%.17g,%.17g\n", r, c, report.magnitude(r, c),
                    report.log1p_magnitude(r, c));
      sink << buf;
    }
  }
}

void write_pgm(const SpectrumReport& report, std::ostream& sink) {
  const std::size_t rows = report.log1p_magnitude.dim(0);
  const std::size_t cols = report.log1p_magnitude.dim(1);
  const auto values = report.log1p_magnitude.data();
  double lo = values[0];
  double hi = values[0];
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double range = hi - lo;
  sink << "P5\n" << cols << ' ' << rows << "\n65535\n";
  // fftshift: output row r shows bin (r + ceil(rows / 2)) mod rows.
  const std::size_t shift_r = (rows + 1) / 2;
  const std::size_t shift_c = (cols + 1) / 2;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = report.log1p_magnitude((r + shift_r) % rows, (c + shift_c) % cols);
      const auto level = range > 0.0 ? static_cast<unsigned>(std::lround((v - lo) / range * 65535.0)) : 0u;
      const char bytes[2] = {static_cast<char>((level >> 8) & 0xFF), static_cast<char>(level & 0xFF)};
      sink.write(bytes, 2);
    }
  }
}

}  // namespace

void check_frequencies(const CosineSpec& spec, std::size_t m, std::size_t n, std::size_t c) {
  if (m < 1 || n < 1 || c < 1) throw Error(ErrorCode::EmptyShape, "cosine grid must be at least 1x1x1");
  if (spec.u >= m || spec.v >= n || spec.w >= c) {
    throw Error(ErrorCode::FrequencyOutOfRange, "frequency (" + std::to_string(spec.u) + ", " +
                                                    std::to_string(spec.v) + ", " + std::to_string(spec.w) +
                                                    ") outside grid " + std::to_string(m) + "x" +
                                                    std::to_string(n) + "x" + std::to_string(c));
  }
  if (!std::isfinite(spec.amplitude) || !std::isfinite(spec.phase)) {
    throw Error(ErrorCode::NonFinite, "cosine amplitude and phase must be finite");
  }
}

Tensor cosine_wave(const CosineSpec& spec, std::size_t m, std::size_t n, std::size_t c) {
  check_frequencies(spec, m, n, c);
  // Common denominator m * n * c keeps the phase numerator an exact integer.
  const std::size_t period = m * n * c;
  std::vector<double> out(period);
  std::size_t flat = 0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < c; ++k) {
        const std::size_t turns = ((spec.u * i) % m) * n * c + ((spec.v * j) % n) * m * c + ((spec.w * k) % c) * m * n;
        const double angle = kTwoPi * static_cast<double>(turns % period) / static_cast<double>(period);
        out[flat++] = spec.amplitude * std::cos(angle + spec.phase);
      }
    }
  }
  return Tensor({m, n, c}, std::move(out));
}

ComplexGrid dft3(const Tensor& field) {
  const Shape g = as_grid3(field.shape());
  std::vector<cplx> data(field.data().begin(), field.data().end());
  transform3(data, g, -1.0);
  return to_grid(field.shape(), data, 1.0);
}

ComplexGrid idft3(const ComplexGrid& spectrum) {
  const Shape g = as_grid3(spectrum.shape());
  std::vector<cplx> data(spectrum.size());
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = spectrum[i];
  transform3(data, g, 1.0);
  return to_grid(spectrum.shape(), data, 1.0 / static_cast<double>(data.size()));
}

std::complex<double> dft_bin(const Tensor& field, std::size_t u, std::size_t v, std::size_t w) {
  const Shape g = as_grid3(field.shape());
  if (u >= g[0] || v >= g[1] || w >= g[2]) throw Error(ErrorCode::IndexOutOfRange, "DFT bin outside grid");
  const std::size_t period = g[0] * g[1] * g[2];
  cplx acc = 0.0;
  std::size_t flat = 0;
  for (std::size_t i = 0; i < g[0]; ++i) {
    for (std::size_t j = 0; j < g[1]; ++j) {
      for (std::size_t k = 0; k < g[2]; ++k) {
        const std::size_t turns =
            ((u * i) % g[0]) * g[1] * g[2] + ((v * j) % g[1]) * g[0] * g[2] + ((w * k) % g[2]) * g[0] * g[1];
        const double angle = kTwoPi * static_cast<double>(turns % period) / static_cast<double>(period);
        acc += field[flat++] * cplx(std::cos(angle), -std::sin(angle));
      }
    }
  }
  return acc;
}

std::complex<double> amplitude_at(const ComplexGrid& grid, std::size_t u, std::size_t v, std::size_t w) {
  const Shape g = as_grid3(grid.shape());
  if (u >= g[0] || v >= g[1] || w >= g[2]) {
    throw Error(ErrorCode::IndexOutOfRange, "bin (" + std::to_string(u) + ", " + std::to_string(v) + ", " +
                                                std::to_string(w) + ") outside grid " + shape_to_string(g));
  }
  return grid[(u * g[1] + v) * g[2] + w];
}

bool is_self_conjugate(const CosineSpec& spec, std::size_t m, std::size_t n, std::size_t c) {
  return (2 * spec.u) % m == 0 && (2 * spec.v) % n == 0 && (2 * spec.w) % c == 0;
}

double matched_bin_magnitude(const CosineSpec& spec, std::size_t m, std::size_t n, std::size_t c) {
  const double volume = static_cast<double>(m * n * c);
  const double amp = std::abs(spec.amplitude);
  if (is_self_conjugate(spec, m, n, c)) return amp * volume * std::abs(std::cos(spec.phase));
  return amp * volume / 2.0;
}

namespace {

RatioReport ratio_of(std::complex<double> numerator, std::complex<double> denominator, double predicted) {
  RatioReport report;
  report.measured = std::abs(numerator) / std::abs(denominator);
  report.predicted = predicted;
  report.rel_err = std::abs(report.measured - predicted) / predicted;
  return report;
}

void check_nondegenerate(double expected, const CosineSpec& spec, std::size_t volume) {
  if (spec.amplitude == 0.0 || expected <= 1e-12 * std::abs(spec.amplitude) * static_cast<double>(volume)) {
    throw Error(ErrorCode::DegenerateAmplitude, "matched bin of the cosine is (numerically) zero");
  }
}

}  // namespace

RatioReport verify_ratio(const CosineSpec& spec, std::size_t m, std::size_t n, std::size_t c, ScaleFactor scale) {
  check_frequencies(spec, m, n, c);
  const std::size_t fm = scale.a() * m;
  const std::size_t fn = scale.b() * n;
  const double base_expected = matched_bin_magnitude(spec, m, n, c);
  const double fine_expected = matched_bin_magnitude(spec, fm, fn, c);
  check_nondegenerate(base_expected, spec, m * n * c);
  check_nondegenerate(fine_expected, spec, fm * fn * c);

  const auto base = dft_bin(cosine_wave(spec, m, n, c), spec.u, spec.v, spec.w);
  const auto fine = dft_bin(cosine_wave(spec, fm, fn, c), spec.u, spec.v, spec.w);
  return ratio_of(fine, base, fine_expected / base_expected);
}

Tensor lattice_mask(const Tensor& field, ScaleFactor scale) {
  const Shape g = as_grid3(field.shape());
  std::vector<double> out(field.data().begin(), field.data().end());
  for (std::size_t i = 0; i < g[0]; ++i) {
    for (std::size_t j = 0; j < g[1]; ++j) {
      if (i % scale.a() == 0 && j % scale.b() == 0) continue;
      for (std::size_t k = 0; k < g[2]; ++k) out[(i * g[1] + j) * g[2] + k] = 0.0;
    }
  }
  return Tensor(field.shape(), std::move(out));
}

RatioReport verify_attenuation(const CosineSpec& spec, std::size_t m, std::size_t n, std::size_t c,
                               ScaleFactor scale) {
  check_frequencies(spec, m, n, c);
  const std::size_t fm = scale.a() * m;
  const std::size_t fn = scale.b() * n;
  // On the lattice the masked field is the base field, so its matched bin
  // carries the base-grid amplitude.
  const double base_expected = matched_bin_magnitude(spec, m, n, c);
  const double fine_expected = matched_bin_magnitude(spec, fm, fn, c);
  check_nondegenerate(base_expected, spec, m * n * c);
  check_nondegenerate(fine_expected, spec, fm * fn * c);

  const Tensor fine = cosine_wave(spec, fm, fn, c);
  const auto full = dft_bin(fine, spec.u, spec.v, spec.w);
  const auto dilated = dft_bin(lattice_mask(fine, scale), spec.u, spec.v, spec.w);
  return ratio_of(dilated, full, base_expected / fine_expected);
}

double SpectrumReport::out_of_band_share() const noexcept {
  return total_energy > 0.0 ? 1.0 - baseband_energy / total_energy : 0.0;
}

std::ptrdiff_t signed_frequency(std::size_t k, std::size_t n) noexcept {
  const auto sk = static_cast<std::ptrdiff_t>(k);
  return k <= (n - 1) / 2 ? sk : sk - static_cast<std::ptrdiff_t>(n);
}

SpectrumReport spectrum_report(const Tensor& plane, double baseband_fraction) {
  check_fraction(baseband_fraction);
  if (plane.rank() != 2) throw Error(ErrorCode::BadRank, "spectrum_report expects a rank-2 plane");
  ComplexGrid grid = dft3(plane);
  std::vector<double> magnitude(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) magnitude[i] = std::hypot(grid.re()[i], grid.im()[i]);
  return report_from(std::move(grid), std::move(magnitude), plane.dim(0), plane.dim(1), baseband_fraction);
}

SpectrumReport spectrum_report_averaged(const Tensor& stack, double baseband_fraction) {
  check_fraction(baseband_fraction);
  if (stack.rank() == 2) return spectrum_report(stack, baseband_fraction);
  if (stack.rank() != 4) throw Error(ErrorCode::BadRank, "expected a rank-2 plane or rank-4 stack");
  const std::size_t rows = stack.dim(2);
  const std::size_t cols = stack.dim(3);
  const std::size_t planes = stack.dim(0) * stack.dim(1);
  std::vector<double> mean(rows * cols, 0.0);
  for (std::size_t p = 0; p < planes; ++p) {
    const auto begin = stack.data().begin() + static_cast<std::ptrdiff_t>(p * rows * cols);
    Tensor plane({rows, cols}, std::vector<double>(begin, begin + static_cast<std::ptrdiff_t>(rows * cols)));
    const ComplexGrid grid = dft3(plane);
    for (std::size_t i = 0; i < grid.size(); ++i) mean[i] += std::abs(grid[i]);
  }
  for (double& v : mean) v /= static_cast<double>(planes);
  ComplexGrid grid({rows, cols}, mean, std::vector<double>(mean.size(), 0.0));
  return report_from(std::move(grid), std::move(mean), rows, cols, baseband_fraction);
}

SpectrumFormat parse_spectrum_format(std::string_view name) {
  if (name == "csv") return SpectrumFormat::Csv;
  if (name == "pgm") return SpectrumFormat::Pgm;
  throw Error(ErrorCode::BadMethod, "unknown spectrum format '" + std::string(name) + "'");
}

void export_spectrum(const SpectrumReport& report, std::ostream& sink, SpectrumFormat format) {
  if (format == SpectrumFormat::Csv) {
    write_csv(report, sink);
  } else {
    write_pgm(report, sink);
  }
  if (!sink) throw Error(ErrorCode::IoFailure, "failed writing spectrum");
}

}  // namespace krescale
