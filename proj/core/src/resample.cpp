#include "krescale/resample.hpp"

#include <array>
#include <vector>

#include "krescale/error.hpp"

namespace krescale {
namespace {

struct Tap {
  std::size_t index;
  double weight;
};

using TapTable = std::vector<std::vector<Tap>>;

void add_tap(std::vector<Tap>& taps, std::size_t index, double weight) {
  for (auto& tap : taps) {
    if (tap.index == index) {
      tap.weight += weight;
      return;
    }
  }
  taps.push_back({index, weight});
}

// Adds weight * sample(j) where j may sit one step outside [0, n).
void add_extended(std::vector<Tap>& taps, std::ptrdiff_t j, std::size_t n, double weight) {
  const auto last = static_cast<std::ptrdiff_t>(n) - 1;
  if (j >= 0 && j <= last) {
    add_tap(taps, static_cast<std::size_t>(j), weight);
    return;
  }
  if (n == 1) {
    add_tap(taps, 0, weight);
    return;
  }
  // Mirror the right edge onto the left so one rule covers both sides.
  auto at = [&](std::size_t k) { return j < 0 ? k : n - 1 - k; };
  if (n == 2) {
    add_tap(taps, at(0), 2.0 * weight);
    add_tap(taps, at(1), -weight);
    return;
  }
  add_tap(taps, at(0), 3.0 * weight);
  add_tap(taps, at(1), -3.0 * weight);
  add_tap(taps, at(2), weight);
}

TapTable build_taps(std::size_t in, std::size_t out, InterpMethod method) {
  TapTable table(out);
  const std::size_t den = out > 1 ? out - 1 : 1;
  for (std::size_t i = 0; i < out; ++i) {
    const std::size_t num = out > 1 ? i * (in - 1) : 0;
    const std::size_t base = num / den;
    const std::size_t rem = num % den;
    auto& taps = table[i];
    if (rem == 0) {
      taps.push_back({base, 1.0});
      continue;
    }
    const double t = static_cast<double>(rem) / static_cast<double>(den);
    switch (method) {
      case InterpMethod::Nearest:
        taps.push_back({2 * rem < den ? base : base + 1, 1.0});
        break;
      case InterpMethod::Bilinear:
        taps.push_back({base, 1.0 - t});
        taps.push_back({base + 1, t});
        break;
      case InterpMethod::Bicubic: {
        const double t2 = t * t;
        const double t3 = t2 * t;
        const std::array<double, 4> w = {
            0.5 * (-t3 + 2.0 * t2 - t),
            0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
            0.5 * (-3.0 * t3 + 4.0 * t2 + t),
            0.5 * (t3 - t2),
        };
        const auto p = static_cast<std::ptrdiff_t>(base);
        for (std::ptrdiff_t k = 0; k < 4; ++k) add_extended(taps, p - 1 + k, in, w[static_cast<std::size_t>(k)]);
        break;
      }
      case InterpMethod::Dilation:
        throw Error(ErrorCode::BadMethod, "dilation is not an interpolating method");
    }
  }
  return table;
}

// Separable application of precomputed tap tables to one H x W plane.
void apply_taps(const double* plane, std::size_t h, std::size_t w, const TapTable& rows, const TapTable& cols,
                std::vector<double>& scratch, double* out) {
  const std::size_t out_h = rows.size();
  const std::size_t out_w = cols.size();
  scratch.assign(h * out_w, 0.0);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t j = 0; j < out_w; ++j) {
      double acc = 0.0;
      for (const Tap& tap : cols[j]) acc += tap.weight * plane[r * w + tap.index];
      scratch[r * out_w + j] = acc;
    }
  }
  for (std::size_t i = 0; i < out_h; ++i) {
    for (std::size_t j = 0; j < out_w; ++j) {
      double acc = 0.0;
      for (const Tap& tap : rows[i]) acc += tap.weight * scratch[tap.index * out_w + j];
      out[i * out_w + j] = acc;
    }
  }
}

void check_upsampling(std::size_t h, std::size_t w, std::size_t out_h, std::size_t out_w) {
  if (out_h < h || out_w < w) {
    throw Error(ErrorCode::BadScale, "resampling " + std::to_string(h) + "x" + std::to_string(w) + " to " +
                                         std::to_string(out_h) + "x" + std::to_string(out_w) +
                                         " would down-sample");
  }
}

}  // namespace

ScaleFactor::ScaleFactor(std::size_t a, std::size_t b) : a_(a), b_(b) {
  if (a < 1 || b < 1) {
    throw Error(ErrorCode::BadScale, "scale factors must be >= 1, got " + std::to_string(a) + "x" + std::to_string(b));
  }
}

std::string_view to_string(InterpMethod method) noexcept {
  switch (method) {
    case InterpMethod::Nearest: return "nearest";
    case InterpMethod::Bilinear: return "bilinear";
    case InterpMethod::Bicubic: return "bicubic";
    case InterpMethod::Dilation: return "dilation";
  }
  return "unknown";
}

InterpMethod parse_method(std::string_view name) {
  if (name == "nearest") return InterpMethod::Nearest;
  if (name == "bilinear") return InterpMethod::Bilinear;
  if (name == "bicubic") return InterpMethod::Bicubic;
  if (name == "dilation") return InterpMethod::Dilation;
  throw Error(ErrorCode::BadMethod, "unknown interpolation method '" + std::string(name) + "'");
}

KernelStack::KernelStack(Tensor weights, Tensor bias) : weights_(std::move(weights)), bias_(std::move(bias)) {
  if (weights_.rank() != 4) throw Error(ErrorCode::BadRank, "kernel weights must be rank 4 (O, C_in, H, W)");
  if (bias_.rank() != 1 || bias_.dim(0) != weights_.dim(0)) {
    throw Error(ErrorCode::ShapeMismatch, "bias " + shape_to_string(bias_.shape()) + " does not match " +
                                              std::to_string(weights_.dim(0)) + " output channels");
  }
}

KernelStack KernelStack::without_bias(Tensor weights) {
  if (weights.rank() != 4) throw Error(ErrorCode::BadRank, "kernel weights must be rank 4 (O, C_in, H, W)");
  Tensor bias = Tensor::zeros({weights.dim(0)});
  return {std::move(weights), std::move(bias)};
}

std::size_t target_size(std::size_t base, std::size_t factor) { return factor * (base - 1) + 1; }

std::size_t padding_for(std::size_t kernel_extent) { return kernel_extent / 2; }

Tensor interp2d(const Tensor& plane, InterpMethod method, std::size_t out_h, std::size_t out_w) {
  if (plane.rank() != 2) throw Error(ErrorCode::BadRank, "interp2d expects a rank-2 plane");
  return resample_planes(plane.reshaped({1, 1, plane.dim(0), plane.dim(1)}), method, out_h, out_w)
      .reshaped({out_h, out_w});
}

Tensor resample_planes(const Tensor& stack, InterpMethod method, std::size_t out_h, std::size_t out_w) {
  if (stack.rank() != 4) throw Error(ErrorCode::BadRank, "expected a rank-4 (O, C, H, W) stack");
  if (method == InterpMethod::Dilation) {
    throw Error(ErrorCode::BadMethod, "dilation is not an interpolating method");
  }
  const std::size_t h = stack.dim(2);
  const std::size_t w = stack.dim(3);
  if (out_h < 1 || out_w < 1) throw Error(ErrorCode::EmptyShape, "empty resampling target");
  check_upsampling(h, w, out_h, out_w);

  const TapTable rows = build_taps(h, out_h, method);
  const TapTable cols = build_taps(w, out_w, method);
  const std::size_t planes = stack.dim(0) * stack.dim(1);
  std::vector<double> out(planes * out_h * out_w);
  std::vector<double> scratch;
  const double* src = stack.data().data();
  for (std::size_t p = 0; p < planes; ++p) {
    apply_taps(src + p * h * w, h, w, rows, cols, scratch, out.data() + p * out_h * out_w);
  }
  return Tensor({stack.dim(0), stack.dim(1), out_h, out_w}, std::move(out));
}

Tensor dilate2d(const Tensor& plane, ScaleFactor scale) {
  if (plane.rank() != 2) throw Error(ErrorCode::BadRank, "dilate2d expects a rank-2 plane");
  const std::size_t h = plane.dim(0);
  const std::size_t w = plane.dim(1);
  const std::size_t out_h = target_size(h, scale.a());
  const std::size_t out_w = target_size(w, scale.b());
  std::vector<double> out(out_h * out_w, 0.0);
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) out[(scale.a() * i) * out_w + scale.b() * j] = plane(i, j);
  }
  return Tensor({out_h, out_w}, std::move(out));
}

KernelStack rescale_kernel(const KernelStack& kernel, ScaleFactor scale, InterpMethod method) {
  const std::size_t o = kernel.out_channels();
  const std::size_t c = kernel.in_channels();
  const std::size_t h = kernel.height();
  const std::size_t w = kernel.width();
  const std::size_t out_h = target_size(h, scale.a());
  const std::size_t out_w = target_size(w, scale.b());

  if (method == InterpMethod::Dilation) {
    std::vector<double> out(o * c * out_h * out_w, 0.0);
    const double* src = kernel.weights().data().data();
    for (std::size_t p = 0; p < o * c; ++p) {
      for (std::size_t i = 0; i < h; ++i) {
        for (std::size_t j = 0; j < w; ++j) {
          out[p * out_h * out_w + scale.a() * i * out_w + scale.b() * j] = src[p * h * w + i * w + j];
        }
      }
    }
    return {Tensor({o, c, out_h, out_w}, std::move(out)), kernel.bias()};
  }

  std::vector<double> out = resample_planes(kernel.weights(), method, out_h, out_w).release();
  if (scale.area() != 1) {
    const double attenuation = 1.0 / static_cast<double>(scale.area());
    for (double& v : out) v *= attenuation;
  }
  return {Tensor({o, c, out_h, out_w}, std::move(out)), kernel.bias()};
}

}  // namespace krescale
