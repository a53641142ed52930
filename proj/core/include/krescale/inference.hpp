#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "krescale/archive.hpp"
#include "krescale/model.hpp"
#include "krescale/resample.hpp"
#include "krescale/tensor.hpp"

namespace krescale {

// Evaluates the model on one (H, W, C) input. conv uses conv3d_direct,
// maxpool takes window maxima, avgpool_adaptive averages the cells
// [floor(i H / oh), ceil((i + 1) H / oh)), flatten is channel-major and
// softmax subtracts the maximum before exponentiating.
Tensor forward(const ModelSpec& model, const TensorMap& weights, const Tensor& input);

// Per-channel align-corners resampling of an (H, W, C) image to (m H, n W, C).
Tensor upsample_input(const Tensor& image, std::size_t m, std::size_t n, InterpMethod method);

struct AgreementReport {
  double argmax_match_rate = 0.0;
  double mean_cosine_sim = 0.0;
};

double cosine_similarity(const Tensor& a, const Tensor& b);

// forward(base, x) against forward(surgered, upsample_input(x, m, n, method)),
// where (m, n) is the ratio of the two manifests' input sizes.
AgreementReport logit_agreement(const ModelSpec& base_model, const TensorMap& base_weights,
                                const ModelSpec& surgered_model, const TensorMap& surgered_weights,
                                const std::vector<Tensor>& inputs, InterpMethod method);

struct Sample {
  Tensor image;
  std::size_t label = 0;
};

// Deterministic stand-in for an image dataset. Class k draws two Gaussian
// blobs around class-specific centers (seeded jitter) over a low-frequency
// cosine background: pixel = 0.75 * gain_c * max(blob1, blob2) + 0.25 * bg,
// so every value lies in [0, 1].
std::vector<Sample> synth_dataset(std::uint64_t seed, std::size_t count, std::size_t h, std::size_t w,
                                  std::size_t c, std::size_t classes);

}  // namespace krescale
