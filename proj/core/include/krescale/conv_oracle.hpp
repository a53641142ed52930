#pragma once

#include <cstddef>
#include <vector>

#include "krescale/resample.hpp"
#include "krescale/spectral.hpp"
#include "krescale/tensor.hpp"

namespace krescale {

enum class PaddingMode { Zeros };

struct ConvConfig {
  std::size_t stride_h = 1;
  std::size_t stride_w = 1;
  std::size_t pad_h = 0;
  std::size_t pad_w = 0;
  PaddingMode padding_mode = PaddingMode::Zeros;
};

// floor((extent + 2 pad - kernel) / stride) + 1, or 0 when the padded input
// is smaller than the kernel.
std::size_t conv_output_extent(std::size_t extent, std::size_t kernel, std::size_t pad, std::size_t stride);

// Zero-padded cross-correlation of an (H, W, C_in) input with an
// (O, C_in, KH, KW) kernel stack, producing (H_out, W_out, O).
Tensor conv3d_direct(const Tensor& input, const KernelStack& kernel, const ConvConfig& cfg);

// (1 / (a b)) * correlation + bias: the attenuation never reaches the bias.
Tensor conv3d_scaled(const Tensor& input, const KernelStack& kernel, const ConvConfig& cfg, ScaleFactor scale);

// Sum of analytic cosine components on an (M, N, C) grid.
struct CosineField {
  std::vector<CosineSpec> components;
  std::size_t m = 1;
  std::size_t n = 1;
  std::size_t c = 1;
};

void check_field(const CosineField& field);

Tensor build_field_tensor(const CosineField& field);

// Re-evaluates every component on (aM, bN, C), i.e. at spatial frequencies
// u / (aM) and v / (bN). Exact; no interpolation involved.
Tensor supersample_field(const CosineField& field, ScaleFactor scale);

// Periodic 3-D convolution of two equally shaped (M, N, C) fields:
//   out[m, n, c] = bias + sum_{x, y, k} input[x, y, k] * kernel[m - x, n - y, c - k]
// with all indices taken modulo the grid.
Tensor circular_conv3d(const Tensor& input, const Tensor& kernel, double bias);

// The same convolution through the spectrum: idft3(dft3(input) * dft3(kernel)) + bias.
Tensor circular_conv3d_spectral(const Tensor& input, const Tensor& kernel, double bias);

struct EquivalenceReport {
  double max_abs_err = 0.0;
  bool pass = false;
};

// Base result f = circular_conv3d(I, theta) + bias on (M, N, C) against the
// scaled fine result f_s = circular_conv3d(I_s, theta_s) / (a b) + bias on
// (aM, bN, C), compared at the lattice points f_s[a m, b n, c].
EquivalenceReport verify_conv_equivalence(const CosineField& input, const CosineField& kernel, double bias,
                                          ScaleFactor scale, double tol);

}  // namespace krescale
