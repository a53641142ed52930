#include "krescale/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "krescale/conv_oracle.hpp"
#include "krescale/error.hpp"
#include "krescale/random.hpp"

namespace krescale {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

Tensor relu(const Tensor& x) {
  std::vector<double> out(x.data().begin(), x.data().end());
  for (double& v : out) v = std::max(v, 0.0);
  return Tensor(x.shape(), std::move(out));
}

Tensor max_pool(const Tensor& x, std::size_t window, std::size_t stride) {
  const std::size_t h = x.dim(0), w = x.dim(1), c = x.dim(2);
  const std::size_t oh = conv_output_extent(h, window, 0, stride);
  const std::size_t ow = conv_output_extent(w, window, 0, stride);
  std::vector<double> out(oh * ow * c, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < oh; ++i)
    for (std::size_t j = 0; j < ow; ++j)
      for (std::size_t y = 0; y < window; ++y)
        for (std::size_t z = 0; z < window; ++z)
          for (std::size_t k = 0; k < c; ++k) {
            double& cell = out[(i * ow + j) * c + k];
            cell = std::max(cell, x(i * stride + y, j * stride + z, k));
          }
  return Tensor({oh, ow, c}, std::move(out));
}

Tensor adaptive_avg_pool(const Tensor& x, std::size_t oh, std::size_t ow) {
  const std::size_t h = x.dim(0), w = x.dim(1), c = x.dim(2);
  std::vector<double> out(oh * ow * c, 0.0);
  for (std::size_t i = 0; i < oh; ++i) {
    const std::size_t r0 = i * h / oh;
    const std::size_t r1 = ((i + 1) * h + oh - 1) / oh;
    for (std::size_t j = 0; j < ow; ++j) {
      const std::size_t c0 = j * w / ow;
      const std::size_t c1 = ((j + 1) * w + ow - 1) / ow;
      const double cells = static_cast<double>((r1 - r0) * (c1 - c0));
      for (std::size_t k = 0; k < c; ++k) {
        double acc = 0.0;
        for (std::size_t y = r0; y < r1; ++y)
          for (std::size_t z = c0; z < c1; ++z) acc += x(y, z, k);
        out[(i * ow + j) * c + k] = acc / cells;
      }
    }
  }
  return Tensor({oh, ow, c}, std::move(out));
}

Tensor flatten_channel_major(const Tensor& x) {
  const std::size_t h = x.dim(0), w = x.dim(1), c = x.dim(2);
  std::vector<double> out(x.size());
  for (std::size_t k = 0; k < c; ++k)
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < w; ++j) out[(k * h + i) * w + j] = x(i, j, k);
  return Tensor({x.size()}, std::move(out));
}

Tensor affine(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  const std::size_t out_features = weight.dim(0);
  const std::size_t in_features = weight.dim(1);
  const double* wp = weight.data().data();
  std::vector<double> out(out_features);
  for (std::size_t o = 0; o < out_features; ++o) {
    double acc = 0.0;
    for (std::size_t i = 0; i < in_features; ++i) acc += wp[o * in_features + i] * x[i];
    out[o] = acc + bias[o];
  }
  return Tensor({out_features}, std::move(out));
}

Tensor softmax(const Tensor& x) {
  double peak = -std::numeric_limits<double>::infinity();
  for (double v : x.data()) peak = std::max(peak, v);
  std::vector<double> out(x.size());
  double total = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::exp(x[i] - peak);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return Tensor(x.shape(), std::move(out));
}

std::size_t argmax(const Tensor& x) {
  return static_cast<std::size_t>(std::max_element(x.data().begin(), x.data().end()) - x.data().begin());
}

}  // namespace

Tensor forward(const ModelSpec& model, const TensorMap& weights, const Tensor& input) {
  validate_model(model, weights);
  if (input.shape() != Shape{model.input_h, model.input_w, model.input_c}) {
    throw Error(ErrorCode::ShapeError, "input " + shape_to_string(input.shape()) + " does not match manifest " +
                                           std::to_string(model.input_h) + "x" + std::to_string(model.input_w) +
                                           "x" + std::to_string(model.input_c));
  }
  Tensor x = input;
  for (const auto& layer : model.layers) {
    x = std::visit(overloaded{
                       [&](const ConvLayer& l) {
                         const KernelStack k(weights.at(l.weight_name), weights.at(l.bias_name));
                         return conv3d_direct(x, k, ConvConfig{l.stride_h, l.stride_w, l.pad_h, l.pad_w});
                       },
                       [&](const FcLayer& l) { return affine(x, weights.at(l.weight_name), weights.at(l.bias_name)); },
                       [&](const ReluLayer&) { return relu(x); },
                       [&](const MaxPoolLayer& l) { return max_pool(x, l.window, l.stride); },
                       [&](const AvgPoolAdaptiveLayer& l) { return adaptive_avg_pool(x, l.out_h, l.out_w); },
                       [&](const FlattenLayer&) { return flatten_channel_major(x); },
                       [&](const SoftmaxLayer&) { return softmax(x); },
                   },
                   layer);
  }
  return x;
}

Tensor upsample_input(const Tensor& image, std::size_t m, std::size_t n, InterpMethod method) {
  if (image.rank() != 3) throw Error(ErrorCode::BadRank, "image must be (H, W, C)");
  if (m < 1 || n < 1) throw Error(ErrorCode::BadScale, "upsampling factors must be >= 1");
  const std::size_t h = image.dim(0), w = image.dim(1), c = image.dim(2);
  std::vector<double> planar(image.size());
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j)
      for (std::size_t k = 0; k < c; ++k) planar[(k * h + i) * w + j] = image(i, j, k);
  const Tensor resized = resample_planes(Tensor({1, c, h, w}, std::move(planar)), method, m * h, n * w);
  const std::size_t oh = m * h, ow = n * w;
  std::vector<double> out(oh * ow * c);
  for (std::size_t k = 0; k < c; ++k)
    for (std::size_t i = 0; i < oh; ++i)
      for (std::size_t j = 0; j < ow; ++j) out[(i * ow + j) * c + k] = resized(0, k, i, j);
  return Tensor({oh, ow, c}, std::move(out));
}

double cosine_similarity(const Tensor& a, const Tensor& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::ShapeError, "cannot compare outputs of different sizes");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return na == nb ? 1.0 : 0.0;
  return dot / std::sqrt(na * nb);
}

AgreementReport logit_agreement(const ModelSpec& base_model, const TensorMap& base_weights,
                                const ModelSpec& surgered_model, const TensorMap& surgered_weights,
                                const std::vector<Tensor>& inputs, InterpMethod method) {
  if (surgered_model.input_h % base_model.input_h != 0 || surgered_model.input_w % base_model.input_w != 0) {
    throw Error(ErrorCode::ShapeError, "surgered input is not an integer multiple of the base input");
  }
  const std::size_t m = surgered_model.input_h / base_model.input_h;
  const std::size_t n = surgered_model.input_w / base_model.input_w;
  AgreementReport report;
  if (inputs.empty()) return report;
  std::size_t matches = 0;
  double cos_total = 0.0;
  for (const Tensor& x : inputs) {
    const Tensor base = forward(base_model, base_weights, x);
    const Tensor fine = forward(surgered_model, surgered_weights, upsample_input(x, m, n, method));
    if (argmax(base) == argmax(fine)) ++matches;
    cos_total += cosine_similarity(base, fine);
  }
  report.argmax_match_rate = static_cast<double>(matches) / static_cast<double>(inputs.size());
  report.mean_cosine_sim = cos_total / static_cast<double>(inputs.size());
  return report;
}

std::vector<Sample> synth_dataset(std::uint64_t seed, std::size_t count, std::size_t h, std::size_t w,
                                  std::size_t c, std::size_t classes) {
  if (count < 1 || classes < 1 || h < 1 || w < 1 || c < 1) {
    throw Error(ErrorCode::EmptyShape, "synthetic dataset needs count, classes and image dims >= 1");
  }
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  Rng rng(seed);
  std::vector<Sample> samples;
  samples.reserve(count);
  const double sigma = 0.12 * static_cast<double>(std::min(h, w));
  for (std::size_t s = 0; s < count; ++s) {
    const auto label = static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(classes) - 1));
    const double theta = kTwoPi * static_cast<double>(label) / static_cast<double>(classes);
    // Blob centers in normalized coordinates, jittered per sample.
    const double y1 = 0.5 + 0.3 * std::sin(theta) + rng.uniform(-0.03, 0.03);
    const double x1 = 0.5 + 0.3 * std::cos(theta) + rng.uniform(-0.03, 0.03);
    const double y2 = 0.5 + 0.2 * std::sin(2.0 * theta + 1.0) + rng.uniform(-0.03, 0.03);
    const double x2 = 0.5 - 0.2 * std::cos(2.0 * theta + 1.0) + rng.uniform(-0.03, 0.03);
    const double fy = static_cast<double>(rng.integer(0, 1));
    const double fx = static_cast<double>(rng.integer(0, 1));
    std::vector<double> gain(c);
    std::vector<double> phase(c);
    for (std::size_t k = 0; k < c; ++k) {
      gain[k] = rng.uniform(0.6, 1.0);
      phase[k] = rng.uniform(0.0, kTwoPi);
    }

    std::vector<double> pixels(h * w * c);
    for (std::size_t i = 0; i < h; ++i) {
      for (std::size_t j = 0; j < w; ++j) {
        const double yi = static_cast<double>(i);
        const double xj = static_cast<double>(j);
        const double d1 = std::pow(yi - y1 * static_cast<double>(h - 1), 2) + std::pow(xj - x1 * static_cast<double>(w - 1), 2);
        const double d2 = std::pow(yi - y2 * static_cast<double>(h - 1), 2) + std::pow(xj - x2 * static_cast<double>(w - 1), 2);
        const double blob = std::max(std::exp(-d1 / (2 * sigma * sigma)), std::exp(-d2 / (2 * sigma * sigma)));
        for (std::size_t k = 0; k < c; ++k) {
          const double bg = 0.5 + 0.5 * std::cos(kTwoPi * (fy * yi / static_cast<double>(h) + fx * xj / static_cast<double>(w)) + phase[k]);
          pixels[(i * w + j) * c + k] = 0.75 * gain[k] * blob + 0.25 * bg;
        }
      }
    }
    samples.push_back({Tensor({h, w, c}, std::move(pixels)), label});
  }
  return samples;
}

}  // namespace krescale
