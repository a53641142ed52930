#include "krescale/model_zoo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "krescale/inference.hpp"
#include "krescale/random.hpp"

namespace krescale::zoo {

TensorMap random_weights(const ShapeMap& shapes, std::uint64_t seed) {
  Rng rng(seed);
  TensorMap out;
  for (const auto& [name, shape] : shapes) {
    const std::size_t n = element_count(shape);
    double stddev = 0.05;
    if (shape.size() >= 2) {
      const std::size_t fan_in = n / shape[0];
      stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
    }
    std::vector<double> data(n);
    for (double& v : data) v = rng.normal(0.0, stddev);
    out.emplace(name, Tensor(shape, std::move(data)));
  }
  return out;
}

std::string toy_cnn_manifest() {
  return "# toy CNN used by the agreement harness\n"
         "input 32 32 3\n"
         "conv conv1 conv1.bias stride 1 1 pad 1 1\n"
         "relu\n"
         "conv conv2 conv2.bias stride 1 1 pad 1 1\n"
         "relu\n"
         "maxpool 2 2\n"
         "flatten\n"
         "fc fc1 fc1.bias spatial 8\n";
}

ShapeMap toy_cnn_shapes() {
  return {
      {"conv1", {8, 3, 3, 3}}, {"conv1.bias", {8}},     {"conv2", {8, 8, 3, 3}},
      {"conv2.bias", {8}},           {"fc1", {10, 2048}}, {"fc1.bias", {10}},
  };
}

namespace {

// Planar 3x3 filters (DC plus horizontal and vertical gradients) with a
// weaker white component, He-scaled per input channel.
Tensor smooth_kernel(const Shape& shape, Rng& rng, double noise) {
  const std::size_t out = shape[0], in = shape[1], kh = shape[2], kw = shape[3];
  const double stddev = std::sqrt(2.0 / static_cast<double>(in * kh * kw));
  const double cy0 = 0.5 * static_cast<double>(kh - 1), cx0 = 0.5 * static_cast<double>(kw - 1);
  std::vector<double> data(element_count(shape));
  for (std::size_t o = 0; o < out; ++o) {
    for (std::size_t i = 0; i < in; ++i) {
      const double dc = rng.normal(0.0, stddev);
      const double gy = rng.normal(0.0, stddev);
      const double gx = rng.normal(0.0, stddev);
      for (std::size_t y = 0; y < kh; ++y) {
        for (std::size_t x = 0; x < kw; ++x) {
          data[((o * in + i) * kh + y) * kw + x] = dc + gy * (static_cast<double>(y) - cy0) +
                                                   gx * (static_cast<double>(x) - cx0) +
                                                   noise * rng.normal(0.0, stddev);
        }
      }
    }
  }
  return Tensor(shape, std::move(data));
}

// Full-batch gradient descent on the softmax cross-entropy of a linear
// head over fixed features. Features are rescaled to unit RMS internally
// and the scale is folded back into the returned weights.
std::pair<Tensor, Tensor> fit_softmax_head(const std::vector<std::vector<double>>& features,
                                           const std::vector<std::size_t>& labels, std::size_t classes,
                                           std::size_t epochs, double rate) {
  const std::size_t count = features.size();
  const std::size_t dims = features.front().size();
  double sq = 0.0;
  for (const auto& f : features)
    for (double v : f) sq += v * v;
  const double rms = std::sqrt(sq / static_cast<double>(count * dims));
  const double inv = rms > 0.0 ? 1.0 / rms : 1.0;

  std::vector<double> w(classes * dims, 0.0), b(classes, 0.0);
  std::vector<double> gw(classes * dims), gb(classes), z(classes);
  for (std::size_t e = 0; e < epochs; ++e) {
    std::fill(gw.begin(), gw.end(), 0.0);
    std::fill(gb.begin(), gb.end(), 0.0);
    for (std::size_t s = 0; s < count; ++s) {
      const std::vector<double>& f = features[s];
      double peak = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < classes; ++k) {
        double acc = b[k];
        for (std::size_t i = 0; i < dims; ++i) acc += w[k * dims + i] * f[i] * inv;
        z[k] = acc;
        peak = std::max(peak, acc);
      }
      double total = 0.0;
      for (double& v : z) total += (v = std::exp(v - peak));
      for (std::size_t k = 0; k < classes; ++k) {
        const double g = z[k] / total - (k == labels[s] ? 1.0 : 0.0);
        gb[k] += g;
        for (std::size_t i = 0; i < dims; ++i) gw[k * dims + i] += g * f[i] * inv;
      }
    }
    const double step = rate / static_cast<double>(count);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= step * gw[i];
    for (std::size_t k = 0; k < classes; ++k) b[k] -= step * gb[k];
  }
  for (double& v : w) v *= inv;
  return {Tensor({classes, dims}, std::move(w)), Tensor({classes}, std::move(b))};
}

struct VggBlock {
  std::size_t convs;
  std::size_t channels;
};

constexpr VggBlock kVgg16[] = {{2, 64}, {2, 128}, {3, 256}, {3, 512}, {3, 512}};

}  // namespace

TensorMap toy_cnn_weights(std::uint64_t seed) {
  const ShapeMap shapes = toy_cnn_shapes();
  Rng rng(seed);
  TensorMap weights;
  for (const char* name : {"conv1", "conv2"}) {
    const std::string stem(name);
    weights.emplace(stem, smooth_kernel(shapes.at(stem), rng, kToyKernelNoise));
    const Shape bias_shape = shapes.at(stem + ".bias");
    std::vector<double> bias(bias_shape[0]);
    for (double& v : bias) v = rng.normal(0.0, 0.05);
    weights.emplace(stem + ".bias", Tensor(bias_shape, std::move(bias)));
  }
  weights.emplace("fc1", Tensor::zeros(shapes.at("fc1")));
  weights.emplace("fc1.bias", Tensor::zeros(shapes.at("fc1.bias")));

  ModelSpec trunk = parse_manifest(toy_cnn_manifest());
  trunk.layers.pop_back();
  const std::vector<Sample> train = synth_dataset(seed + 1, kToyTrainCount, 32, 32, 3, kToyClasses);
  std::vector<std::vector<double>> features;
  std::vector<std::size_t> labels;
  features.reserve(train.size());
  for (const Sample& sample : train) {
    const Tensor f = forward(trunk, weights, sample.image);
    features.emplace_back(f.data().begin(), f.data().end());
    labels.push_back(sample.label);
  }
  auto [w, b] = fit_softmax_head(features, labels, kToyClasses, 100, 1.0);
  weights.insert_or_assign("fc1", std::move(w));
  weights.insert_or_assign("fc1.bias", std::move(b));
  return weights;
}

std::string vgg16_manifest() {
  std::ostringstream out;
  out << "# VGG-16 (configuration D), 10-class head\n";
  out << "input 224 224 3\n";
  std::size_t index = 1;
  for (const auto& block : kVgg16) {
    for (std::size_t i = 0; i < block.convs; ++i, ++index) {
      out << "conv conv" << index << " conv" << index << ".bias stride 1 1 pad 1 1\n";
      out << "relu\n";
    }
    out << "maxpool 2 2\n";
  }
  out << "flatten\n";
  out << "fc fc1 fc1.bias spatial 512\nrelu\n";
  out << "fc fc2 fc2.bias spatial 0\nrelu\n";
  out << "fc fc3 fc3.bias spatial 0\n";
  out << "softmax\n";
  return out.str();
}

ShapeMap vgg16_shapes() {
  ShapeMap shapes;
  std::size_t in = 3;
  std::size_t index = 1;
  for (const auto& block : kVgg16) {
    for (std::size_t i = 0; i < block.convs; ++i, ++index) {
      const std::string stem = "conv" + std::to_string(index);
      shapes[stem] = {block.channels, in, 3, 3};
      shapes[stem + ".bias"] = {block.channels};
      in = block.channels;
    }
  }
  shapes["fc1"] = {4096, 512 * 7 * 7};
  shapes["fc1.bias"] = {4096};
  shapes["fc2"] = {4096, 4096};
  shapes["fc2.bias"] = {4096};
  shapes["fc3"] = {10, 4096};
  shapes["fc3.bias"] = {10};
  return shapes;
}

}  // namespace krescale::zoo
