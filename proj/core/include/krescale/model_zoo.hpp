#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "krescale/archive.hpp"
#include "krescale/model.hpp"

namespace krescale::zoo {

// Seeded He-normal initialization for every entry of `shapes`: rank-4 and
// rank-2 tensors get N(0, 2 / fan_in), rank-1 (biases) N(0, 0.05^2).
TensorMap random_weights(const ShapeMap& shapes, std::uint64_t seed);

// 32x32x3 -> conv3-8 -> relu -> conv3-8 -> relu -> maxpool 2/2 -> flatten
// -> fc-10x2048 (spatial 8).
std::string toy_cnn_manifest();
ShapeMap toy_cnn_shapes();

// Weights for the toy CNN: planar 3x3 conv filters (DC + gradients, plus a
// white component of relative size kToyKernelNoise), N(0, 0.05^2) conv
// biases, and an fc head fitted by softmax regression on
// synth_dataset(seed + 1, kToyTrainCount, 32, 32, 3, kToyClasses).
TensorMap toy_cnn_weights(std::uint64_t seed);

// VGG-16 (configuration D) at 224x224x3 with a 10-class head.
std::string vgg16_manifest();
ShapeMap vgg16_shapes();

inline constexpr std::uint64_t kToySeed = 20240611;
inline constexpr std::size_t kToyClasses = 10;
inline constexpr std::size_t kToyTrainCount = 500;
inline constexpr double kToyKernelNoise = 0.25;

}  // namespace krescale::zoo
