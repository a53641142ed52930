#include "krescale/surgery.hpp"

#include <set>

#include "krescale/error.hpp"

namespace krescale {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

std::string pair_str(std::size_t h, std::size_t w) {
  return h == w ? std::to_string(h) : std::to_string(h) + "x" + std::to_string(w);
}

// (H, W, C) of the map flattened into layer `index`.
Shape flattened_source(const ModelSpec& model, const ShapeTrace& trace, std::size_t index) {
  for (std::size_t j = index; j-- > 0;) {
    if (std::holds_alternative<FlattenLayer>(model.layers[j])) {
      return j == 0 ? Shape{model.input_h, model.input_w, model.input_c} : trace[j - 1];
    }
  }
  throw Error(ErrorCode::ShapeError, "layer " + std::to_string(index) + " (fc): no flatten precedes it");
}

std::string describe_layer(const LayerSpec& layer, const ShapeMap& shapes) {
  return std::visit(
      overloaded{
          [&](const ConvLayer& l) {
            const Shape& w = shapes.at(l.weight_name);
            std::string s = "conv" + pair_str(w[2], w[3]) + "-" + std::to_string(w[0]) + " pad" +
                            pair_str(l.pad_h, l.pad_w) + " s" + pair_str(l.stride_h, l.stride_w);
            if (l.patch_embed) s += " patch_embed";
            return s;
          },
          [&](const FcLayer& l) {
            const Shape& w = shapes.at(l.weight_name);
            return "fc-" + std::to_string(w[0]) + "x" + std::to_string(w[1]);
          },
          [](const ReluLayer&) { return std::string("relu"); },
          [](const MaxPoolLayer& l) { return "maxpool" + std::to_string(l.window) + "/" + std::to_string(l.stride); },
          [](const AvgPoolAdaptiveLayer& l) {
            return "avgpool(" + std::to_string(l.out_h) + "," + std::to_string(l.out_w) + ")";
          },
          [](const FlattenLayer&) { return std::string("flatten"); },
          [](const SoftmaxLayer&) { return std::string("softmax"); },
      },
      layer);
}

}  // namespace

SurgeryLayout plan_surgery(const ModelSpec& model, const ShapeMap& weights, const SurgeryPlan& plan) {
  if (plan.m < 1 || plan.n < 1) throw Error(ErrorCode::BadScale, "surgery factors must be >= 1");
  SurgeryLayout layout;
  layout.base_trace = validate_model(model, weights);
  layout.model = model;
  layout.model.input_h *= plan.m;
  layout.model.input_w *= plan.n;
  layout.shapes = weights;

  std::set<std::string> rescaled;
  auto claim = [&](const std::string& name, std::size_t index) {
    if (!rescaled.insert(name).second) {
      throw Error(ErrorCode::ShapeError, "layer " + std::to_string(index) + ": tensor '" + name +
                                             "' is shared by several rescaled layers");
    }
  };

  for (std::size_t i = 0; i < layout.model.layers.size(); ++i) {
    LayerSpec& layer = layout.model.layers[i];
    if (auto* conv = std::get_if<ConvLayer>(&layer)) {
      claim(conv->weight_name, i);
      Shape w = weights.at(conv->weight_name);
      w[2] = target_size(w[2], plan.m);
      w[3] = target_size(w[3], plan.n);
      if (conv->patch_embed) {
        if (plan.m != plan.n) {
          throw Error(ErrorCode::BadScale, "patch_embed stride scaling needs m == n");
        }
        // Padding is kept: with an even rescaled kernel, padding_for would
        // add one token per axis.
        conv->stride_h *= plan.m;
        conv->stride_w *= plan.n;
      } else {
        conv->pad_h = padding_for(w[2]);
        conv->pad_w = padding_for(w[3]);
      }
      layout.shapes[conv->weight_name] = w;
    } else if (auto* fc = std::get_if<FcLayer>(&layer)) {
      if (!plan.interpolate_fc || layout.fc_index || fc->spatial_channels == 0) continue;
      if (plan.method == InterpMethod::Dilation) {
        throw Error(ErrorCode::BadMethod, "dilation cannot resize a fully-connected layer to m*s x n*s");
      }
      claim(fc->weight_name, i);
      const Shape source = flattened_source(model, layout.base_trace, i);
      Shape w = weights.at(fc->weight_name);
      w[1] = source[2] * (plan.m * source[0]) * (plan.n * source[1]);
      layout.shapes[fc->weight_name] = w;
      layout.fc_index = i;
    } else if (auto* pool = std::get_if<AvgPoolAdaptiveLayer>(&layer)) {
      pool->out_h *= plan.m;
      pool->out_w *= plan.n;
    }
  }
  if (plan.interpolate_fc && !layout.fc_index) {
    throw Error(ErrorCode::NoSpatialFc, "fc interpolation requested but no fc layer has spatial channels > 0");
  }
  layout.trace = validate_model(layout.model, layout.shapes);
  return layout;
}

SurgeredModel supersample_model(const ModelSpec& model, const TensorMap& weights, const SurgeryPlan& plan) {
  SurgeryLayout layout = plan_surgery(model, shapes_of(weights), plan);
  TensorMap out = weights;
  const ScaleFactor scale(plan.m, plan.n);

  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    const LayerSpec& layer = model.layers[i];
    if (const auto* conv = std::get_if<ConvLayer>(&layer)) {
      const KernelStack stack(weights.at(conv->weight_name), weights.at(conv->bias_name));
      out.insert_or_assign(conv->weight_name, rescale_kernel(stack, scale, plan.method).weights());
    } else if (const auto* fc = std::get_if<FcLayer>(&layer); fc && layout.fc_index == i) {
      const Shape source = flattened_source(model, layout.base_trace, i);
      const Tensor& w = weights.at(fc->weight_name);
      const Tensor planes = w.reshaped({w.dim(0), source[2], source[0], source[1]});
      std::vector<double> resized =
          resample_planes(planes, plan.method, plan.m * source[0], plan.n * source[1]).release();
      const double attenuation = 1.0 / static_cast<double>(scale.area());
      for (double& v : resized) v *= attenuation;
      out.insert_or_assign(fc->weight_name, Tensor(layout.shapes.at(fc->weight_name), std::move(resized)));
    }
  }
  return {std::move(layout.model), std::move(out)};
}

std::vector<LayerChange> describe_surgery(const ModelSpec& model, const ShapeMap& weights,
                                          const SurgeryLayout& layout) {
  std::vector<LayerChange> rows;
  const auto input_str = [](const ModelSpec& spec) {
    return "input-" + std::to_string(spec.input_h) + "x" + std::to_string(spec.input_w) + "x" +
           std::to_string(spec.input_c);
  };
  rows.push_back({0, "input", input_str(model), input_str(layout.model),
                  {model.input_h, model.input_w, model.input_c},
                  {layout.model.input_h, layout.model.input_w, layout.model.input_c}});
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    rows.push_back({i + 1, std::string(layer_kind(model.layers[i])), describe_layer(model.layers[i], weights),
                    describe_layer(layout.model.layers[i], layout.shapes), layout.base_trace[i], layout.trace[i]});
  }
  return rows;
}

std::size_t parameter_count(const ShapeMap& shapes) {
  std::size_t total = 0;
  for (const auto& [name, shape] : shapes) total += element_count(shape);
  return total;
}

}  // namespace krescale
