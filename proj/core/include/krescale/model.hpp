#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "krescale/archive.hpp"
#include "krescale/tensor.hpp"

namespace krescale {

struct ConvLayer {
  std::string weight_name;
  std::string bias_name;
  std::size_t stride_h = 1;
  std::size_t stride_w = 1;
  std::size_t pad_h = 0;
  std::size_t pad_w = 0;
  // Projection convolution (stride == receptive step); surgery multiplies
  // its stride instead of keeping it.
  bool patch_embed = false;

  bool operator==(const ConvLayer&) const = default;
};

struct FcLayer {
  std::string weight_name;  // (out_features, in_features)
  std::string bias_name;
  // Channels of the map flattened into this layer; 0 = never interpolated.
  std::size_t spatial_channels = 0;

  bool operator==(const FcLayer&) const = default;
};

struct ReluLayer {
  bool operator==(const ReluLayer&) const = default;
};
struct MaxPoolLayer {
  std::size_t window = 2;
  std::size_t stride = 2;
  bool operator==(const MaxPoolLayer&) const = default;
};
struct AvgPoolAdaptiveLayer {
  std::size_t out_h = 1;
  std::size_t out_w = 1;
  bool operator==(const AvgPoolAdaptiveLayer&) const = default;
};
// Flattens (H, W, C) channel-major, i.e. in (C, H, W) order.
struct FlattenLayer {
  bool operator==(const FlattenLayer&) const = default;
};
struct SoftmaxLayer {
  bool operator==(const SoftmaxLayer&) const = default;
};

using LayerSpec =
    std::variant<ConvLayer, FcLayer, ReluLayer, MaxPoolLayer, AvgPoolAdaptiveLayer, FlattenLayer, SoftmaxLayer>;

std::string_view layer_kind(const LayerSpec& layer) noexcept;

struct ModelSpec {
  std::size_t input_h = 1;
  std::size_t input_w = 1;
  std::size_t input_c = 1;
  std::vector<LayerSpec> layers;

  bool operator==(const ModelSpec&) const = default;
};

// Manifest text, one directive per line, '#' starts a comment:
//
//   input H W C
//   conv <weight> <bias> stride <sh> <sw> pad <ph> <pw> [patch_embed]
//   fc <weight> <bias> spatial <C>
//   relu | maxpool <win> <stride> | avgpool_adaptive <oh> <ow> | flatten | softmax
//
// The "stride", "pad" and "spatial" keywords may be omitted.
ModelSpec parse_manifest(std::string_view text);
std::string format_manifest(const ModelSpec& model);

using ShapeMap = std::map<std::string, Shape>;
ShapeMap shapes_of(const TensorMap& weights);

// Output shape after each layer: (H, W, C) while spatial, (F) once flattened.
using ShapeTrace = std::vector<Shape>;

// Propagates the input shape through every layer. Throws ShapeError naming
// the first offending layer.
ShapeTrace validate_model(const ModelSpec& model, const ShapeMap& weights);
ShapeTrace validate_model(const ModelSpec& model, const TensorMap& weights);

}  // namespace krescale
