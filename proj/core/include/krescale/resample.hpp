#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "krescale/tensor.hpp"

namespace krescale {

// Integer supersampling factors: a along height, b along width.
class ScaleFactor {
 public:
  ScaleFactor(std::size_t a, std::size_t b);
  static ScaleFactor uniform(std::size_t factor) { return {factor, factor}; }

  std::size_t a() const noexcept { return a_; }
  std::size_t b() const noexcept { return b_; }
  std::size_t area() const noexcept { return a_ * b_; }

  bool operator==(const ScaleFactor&) const = default;

 private:
  std::size_t a_;
  std::size_t b_;
};

enum class InterpMethod { Nearest, Bilinear, Bicubic, Dilation };

std::string_view to_string(InterpMethod method) noexcept;
// Accepts "nearest", "bilinear", "bicubic", "dilation"; throws BadMethod otherwise.
InterpMethod parse_method(std::string_view name);

// Convolution weights (O, C_in, H, W) with one bias per output channel.
class KernelStack {
 public:
  KernelStack(Tensor weights, Tensor bias);

  // Bias of zeros, for kernels stored without one.
  static KernelStack without_bias(Tensor weights);

  const Tensor& weights() const noexcept { return weights_; }
  const Tensor& bias() const noexcept { return bias_; }
  std::size_t out_channels() const noexcept { return weights_.dim(0); }
  std::size_t in_channels() const noexcept { return weights_.dim(1); }
  std::size_t height() const noexcept { return weights_.dim(2); }
  std::size_t width() const noexcept { return weights_.dim(3); }

 private:
  Tensor weights_;
  Tensor bias_;
};

// factor * (base - 1) + 1: the finest lattice that still contains every
// base sample, and odd whenever base is odd.
std::size_t target_size(std::size_t base, std::size_t factor);

// "Same" padding for an odd kernel extent.
std::size_t padding_for(std::size_t kernel_extent);

// Align-corners resampling of a rank-2 plane to (out_h, out_w), up-sampling
// only. Output index i reads source coordinate i * (H - 1) / (out_h - 1).
//
// Bicubic is Catmull-Rom (Keys, a = -0.5). Samples one step beyond an edge
// are extrapolated with Keys' boundary rule f(-1) = 3 f(0) - 3 f(1) + f(2)
// (linear for two samples, constant for one), so quadratics are reproduced
// across the whole plane.
Tensor interp2d(const Tensor& plane, InterpMethod method, std::size_t out_h, std::size_t out_w);

// Zero insertion: out[a*i, b*j] = plane[i, j], zero elsewhere.
Tensor dilate2d(const Tensor& plane, ScaleFactor scale);

// Resamples every (o, c_in) plane to (target_size(H, a), target_size(W, b)).
// Interpolating methods multiply the weights by 1 / (a * b); dilation is
// already attenuated and is left unscaled. Biases are never touched.
KernelStack rescale_kernel(const KernelStack& kernel, ScaleFactor scale, InterpMethod method);

// Plane-wise resampling of a rank-4 (O, C, H, W) tensor to (out_h, out_w),
// without attenuation. Shared by kernel and fully-connected rescaling.
Tensor resample_planes(const Tensor& stack, InterpMethod method, std::size_t out_h, std::size_t out_w);

}  // namespace krescale
