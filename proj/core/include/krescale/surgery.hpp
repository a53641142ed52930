#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "krescale/archive.hpp"
#include "krescale/model.hpp"
#include "krescale/resample.hpp"

namespace krescale {

// m, n: ratio of the new input height / width to the base input.
struct SurgeryPlan {
  std::size_t m = 2;
  std::size_t n = 2;
  InterpMethod method = InterpMethod::Bicubic;
  bool interpolate_fc = true;
};

// Structural result of a surgery: the new manifest, the new weight shapes
// and the shape traces before and after.
struct SurgeryLayout {
  ModelSpec model;
  ShapeMap shapes;
  ShapeTrace base_trace;
  ShapeTrace trace;
  // Layer index of the interpolated fc layer, if any.
  std::optional<std::size_t> fc_index;
};

// Shape-level surgery. Needs only weight shapes, so it also serves models
// whose weights are too large to materialize.
//
//  - conv: kernel (O, C, KH, KW) -> (O, C, target_size(KH, m), target_size(KW, n)),
//    padding = padding_for(new extent); patch_embed layers instead keep
//    their padding and get stride * (m, n) (m == n required), which keeps
//    the token count.
//  - first fc with spatial channels (when interpolate_fc): in_features
//    C * H * W -> C * (m H) * (n W), where (H, W, C) is the flattened map.
//  - avgpool_adaptive targets and the input are multiplied by (m, n).
//
// Throws ShapeError if either model fails to validate, NoSpatialFc when fc
// interpolation is requested without an eligible layer, and BadMethod for
// dilation on an fc layer.
SurgeryLayout plan_surgery(const ModelSpec& model, const ShapeMap& weights, const SurgeryPlan& plan);

struct SurgeredModel {
  ModelSpec model;
  TensorMap weights;
};

// plan_surgery plus the numeric transform: conv kernels through
// rescale_kernel, the selected fc reshaped to (out, C, H, W), resampled to
// (out, C, m H, n W) with the plan's method, scaled by 1 / (m n) and
// flattened back. Every other tensor, biases included, is copied verbatim.
SurgeredModel supersample_model(const ModelSpec& model, const TensorMap& weights, const SurgeryPlan& plan);

// One row of the before/after layer table.
struct LayerChange {
  std::size_t index = 0;
  std::string kind;
  std::string base;
  std::string interpolated;
  Shape base_out;
  Shape interpolated_out;
};

// Rows for the input and every layer, e.g. "conv3-64 pad1 s1" ->
// "conv5-64 pad2 s1" or "fc-4096x25088" -> "fc-4096x100352".
std::vector<LayerChange> describe_surgery(const ModelSpec& model, const ShapeMap& weights,
                                          const SurgeryLayout& layout);

std::size_t parameter_count(const ShapeMap& shapes);

}  // namespace krescale
