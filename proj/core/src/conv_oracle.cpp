#include "krescale/conv_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "krescale/error.hpp"

namespace krescale {

std::size_t conv_output_extent(std::size_t extent, std::size_t kernel, std::size_t pad, std::size_t stride) {
  const std::size_t padded = extent + 2 * pad;
  if (padded < kernel || stride == 0) return 0;
  return (padded - kernel) / stride + 1;
}

namespace {

Tensor correlate(const Tensor& input, const KernelStack& kernel, const ConvConfig& cfg, double scale,
                 bool add_bias) {
  if (input.rank() != 3) throw Error(ErrorCode::BadRank, "convolution input must be (H, W, C)");
  if (cfg.stride_h == 0 || cfg.stride_w == 0) throw Error(ErrorCode::BadScale, "convolution stride must be >= 1");
  const std::size_t h = input.dim(0);
  const std::size_t w = input.dim(1);
  const std::size_t c = input.dim(2);
  if (kernel.in_channels() != c) {
    throw Error(ErrorCode::ChannelMismatch, "kernel expects " + std::to_string(kernel.in_channels()) +
                                                " input channels, input has " + std::to_string(c));
  }
  const std::size_t kh = kernel.height();
  const std::size_t kw = kernel.width();
  const std::size_t o = kernel.out_channels();
  const std::size_t out_h = conv_output_extent(h, kh, cfg.pad_h, cfg.stride_h);
  const std::size_t out_w = conv_output_extent(w, kw, cfg.pad_w, cfg.stride_w);
  if (out_h == 0 || out_w == 0) {
    throw Error(ErrorCode::EmptyOutput, "convolution of " + shape_to_string(input.shape()) + " with " +
                                            std::to_string(kh) + "x" + std::to_string(kw) +
                                            " kernel produces no output");
  }

  // Repack (O, C, KH, KW) as (O, KH, KW, C) so the channel loop is contiguous
  // on both operands.
  std::vector<double> packed(o * kh * kw * c);
  for (std::size_t oc = 0; oc < o; ++oc)
    for (std::size_t ic = 0; ic < c; ++ic)
      for (std::size_t y = 0; y < kh; ++y)
        for (std::size_t x = 0; x < kw; ++x)
          packed[((oc * kh + y) * kw + x) * c + ic] = kernel.weights()(oc, ic, y, x);

  const double* in = input.data().data();
  const double* bias = kernel.bias().data().data();
  std::vector<double> out(out_h * out_w * o);
  for (std::size_t m = 0; m < out_h; ++m) {
    for (std::size_t n = 0; n < out_w; ++n) {
      for (std::size_t oc = 0; oc < o; ++oc) {
        double acc = 0.0;
        for (std::size_t y = 0; y < kh; ++y) {
          const auto row = static_cast<std::ptrdiff_t>(m * cfg.stride_h + y) - static_cast<std::ptrdiff_t>(cfg.pad_h);
          if (row < 0 || row >= static_cast<std::ptrdiff_t>(h)) continue;
          for (std::size_t x = 0; x < kw; ++x) {
            const auto col =
                static_cast<std::ptrdiff_t>(n * cfg.stride_w + x) - static_cast<std::ptrdiff_t>(cfg.pad_w);
            if (col < 0 || col >= static_cast<std::ptrdiff_t>(w)) continue;
            const double* src = in + (static_cast<std::size_t>(row) * w + static_cast<std::size_t>(col)) * c;
            const double* k = packed.data() + ((oc * kh + y) * kw + x) * c;
            for (std::size_t ic = 0; ic < c; ++ic) acc += src[ic] * k[ic];
          }
        }
        out[(m * out_w + n) * o + oc] = scale * acc + (add_bias ? bias[oc] : 0.0);
      }
    }
  }
  return Tensor({out_h, out_w, o}, std::move(out));
}

void check_same_grid(const Tensor& a, const Tensor& b) {
  if (a.rank() != 3 || a.shape() != b.shape()) {
    throw Error(ErrorCode::GridMismatch, "circular convolution needs two (M, N, C) fields of one shape, got " +
                                             shape_to_string(a.shape()) + " and " + shape_to_string(b.shape()));
  }
}

}  // namespace

Tensor conv3d_direct(const Tensor& input, const KernelStack& kernel, const ConvConfig& cfg) {
  return correlate(input, kernel, cfg, 1.0, true);
}

Tensor conv3d_scaled(const Tensor& input, const KernelStack& kernel, const ConvConfig& cfg, ScaleFactor scale) {
  return correlate(input, kernel, cfg, 1.0 / static_cast<double>(scale.area()), true);
}

void check_field(const CosineField& field) {
  for (const auto& spec : field.components) check_frequencies(spec, field.m, field.n, field.c);
  if (field.m < 1 || field.n < 1 || field.c < 1) throw Error(ErrorCode::EmptyShape, "cosine field grid is empty");
}

namespace {

Tensor sum_components(const CosineField& field, std::size_t m, std::size_t n) {
  std::vector<double> acc(m * n * field.c, 0.0);
  for (const auto& spec : field.components) {
    const Tensor wave = cosine_wave(spec, m, n, field.c);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += wave[i];
  }
  return Tensor({m, n, field.c}, std::move(acc));
}

}  // namespace

Tensor build_field_tensor(const CosineField& field) {
  check_field(field);
  return sum_components(field, field.m, field.n);
}

Tensor supersample_field(const CosineField& field, ScaleFactor scale) {
  check_field(field);
  return sum_components(field, scale.a() * field.m, scale.b() * field.n);
}

Tensor circular_conv3d(const Tensor& input, const Tensor& kernel, double bias) {
  check_same_grid(input, kernel);
  const std::size_t gm = input.dim(0);
  const std::size_t gn = input.dim(1);
  const std::size_t gc = input.dim(2);
  std::vector<double> out(input.size());
  for (std::size_t m = 0; m < gm; ++m) {
    for (std::size_t n = 0; n < gn; ++n) {
      for (std::size_t c = 0; c < gc; ++c) {
        double acc = 0.0;
        for (std::size_t x = 0; x < gm; ++x) {
          const std::size_t kx = (m + gm - x) % gm;
          for (std::size_t y = 0; y < gn; ++y) {
            const std::size_t ky = (n + gn - y) % gn;
            for (std::size_t k = 0; k < gc; ++k) {
              acc += input(x, y, k) * kernel(kx, ky, (c + gc - k) % gc);
            }
          }
        }
        out[(m * gn + n) * gc + c] = acc + bias;
      }
    }
  }
  return Tensor(input.shape(), std::move(out));
}

Tensor circular_conv3d_spectral(const Tensor& input, const Tensor& kernel, double bias) {
  check_same_grid(input, kernel);
  const ComplexGrid fi = dft3(input);
  const ComplexGrid fk = dft3(kernel);
  std::vector<double> re(fi.size());
  std::vector<double> im(fi.size());
  for (std::size_t i = 0; i < fi.size(); ++i) {
    const std::complex<double> p = fi[i] * fk[i];
    re[i] = p.real();
    im[i] = p.imag();
  }
  const ComplexGrid product = idft3(ComplexGrid(input.shape(), std::move(re), std::move(im)));
  std::vector<double> out(product.re().begin(), product.re().end());
  for (double& v : out) v += bias;
  return Tensor(input.shape(), std::move(out));
}

EquivalenceReport verify_conv_equivalence(const CosineField& input, const CosineField& kernel, double bias,
                                          ScaleFactor scale, double tol) {
  check_field(input);
  check_field(kernel);
  if (input.m != kernel.m || input.n != kernel.n || input.c != kernel.c) {
    throw Error(ErrorCode::GridMismatch, "input and kernel fields must share (M, N, C)");
  }
  const Tensor base = circular_conv3d(build_field_tensor(input), build_field_tensor(kernel), bias);
  const Tensor fine_raw = circular_conv3d(supersample_field(input, scale), supersample_field(kernel, scale), 0.0);

  const double attenuation = 1.0 / static_cast<double>(scale.area());
  const std::size_t fn = fine_raw.dim(1);
  const std::size_t gc = fine_raw.dim(2);
  EquivalenceReport report;
  for (std::size_t m = 0; m < input.m; ++m) {
    for (std::size_t n = 0; n < input.n; ++n) {
      for (std::size_t c = 0; c < gc; ++c) {
        const double fine = attenuation * fine_raw[((scale.a() * m) * fn + scale.b() * n) * gc + c] + bias;
        report.max_abs_err = std::max(report.max_abs_err, std::abs(fine - base(m, n, c)));
      }
    }
  }
  report.pass = report.max_abs_err <= tol;
  return report;
}

}  // namespace krescale
