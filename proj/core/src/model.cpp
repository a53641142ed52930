#include "krescale/model.hpp"

#include <charconv>
#include <optional>
#include <sstream>

#include "krescale/conv_oracle.hpp"
#include "krescale/error.hpp"

namespace krescale {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

std::vector<std::string_view> tokenize(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

class LineParser {
 public:
  LineParser(std::vector<std::string_view> tokens, std::size_t line) : tokens_(std::move(tokens)), line_(line) {}

  std::string_view directive() const { return tokens_.front(); }

  std::string name(const char* what) {
    if (pos_ >= tokens_.size()) fail(std::string("missing ") + what);
    return std::string(tokens_[pos_++]);
  }

  std::size_t number(const char* what, std::size_t min) {
    if (pos_ >= tokens_.size()) fail(std::string("missing ") + what);
    const std::string_view token = tokens_[pos_++];
    std::size_t value = 0;
    const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || end != token.data() + token.size()) {
      fail(std::string("expected an integer ") + what + ", got '" + std::string(token) + "'");
    }
    if (value < min) fail(std::string(what) + " must be >= " + std::to_string(min));
    return value;
  }

  // Consumes `word` if it is next; it is optional in the grammar.
  void keyword(std::string_view word) {
    if (pos_ < tokens_.size() && tokens_[pos_] == word) ++pos_;
  }

  bool flag(std::string_view word) {
    if (pos_ < tokens_.size() && tokens_[pos_] == word) {
      ++pos_;
      return true;
    }
    return false;
  }

  void finish() {
    if (pos_ < tokens_.size()) fail("unexpected token '" + std::string(tokens_[pos_]) + "'");
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(ErrorCode::ParseError, line_, std::string(directive()) + ": " + message);
  }

 private:
  std::vector<std::string_view> tokens_;
  std::size_t line_;
  std::size_t pos_ = 1;
};

[[noreturn]] void shape_error(std::size_t index, const LayerSpec& layer, const std::string& message) {
  throw Error(ErrorCode::ShapeError,
              "layer " + std::to_string(index) + " (" + std::string(layer_kind(layer)) + "): " + message);
}

}  // namespace

std::string_view layer_kind(const LayerSpec& layer) noexcept {
  return std::visit(overloaded{
                        [](const ConvLayer&) { return std::string_view("conv"); },
                        [](const FcLayer&) { return std::string_view("fc"); },
                        [](const ReluLayer&) { return std::string_view("relu"); },
                        [](const MaxPoolLayer&) { return std::string_view("maxpool"); },
                        [](const AvgPoolAdaptiveLayer&) { return std::string_view("avgpool_adaptive"); },
                        [](const FlattenLayer&) { return std::string_view("flatten"); },
                        [](const SoftmaxLayer&) { return std::string_view("softmax"); },
                    },
                    layer);
}

ModelSpec parse_manifest(std::string_view text) {
  ModelSpec model;
  bool have_input = false;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto tokens = tokenize(line);
    if (tokens.empty()) continue;

    LineParser p(std::move(tokens), line_no);
    const std::string_view kind = p.directive();
    if (kind == "input") {
      if (have_input) p.fail("duplicate input directive");
      if (!model.layers.empty()) p.fail("input must precede all layers");
      model.input_h = p.number("height", 1);
      model.input_w = p.number("width", 1);
      model.input_c = p.number("channels", 1);
      have_input = true;
    } else if (kind == "conv") {
      ConvLayer conv;
      conv.weight_name = p.name("weight name");
      conv.bias_name = p.name("bias name");
      p.keyword("stride");
      conv.stride_h = p.number("stride_h", 1);
      conv.stride_w = p.number("stride_w", 1);
      p.keyword("pad");
      conv.pad_h = p.number("pad_h", 0);
      conv.pad_w = p.number("pad_w", 0);
      conv.patch_embed = p.flag("patch_embed");
      model.layers.emplace_back(std::move(conv));
    } else if (kind == "fc") {
      FcLayer fc;
      fc.weight_name = p.name("weight name");
      fc.bias_name = p.name("bias name");
      p.keyword("spatial");
      fc.spatial_channels = p.number("spatial channels", 0);
      model.layers.emplace_back(std::move(fc));
    } else if (kind == "relu") {
      model.layers.emplace_back(ReluLayer{});
    } else if (kind == "maxpool") {
      MaxPoolLayer pool;
      pool.window = p.number("window", 1);
      pool.stride = p.number("stride", 1);
      model.layers.emplace_back(pool);
    } else if (kind == "avgpool_adaptive") {
      AvgPoolAdaptiveLayer pool;
      pool.out_h = p.number("out_h", 1);
      pool.out_w = p.number("out_w", 1);
      model.layers.emplace_back(pool);
    } else if (kind == "flatten") {
      model.layers.emplace_back(FlattenLayer{});
    } else if (kind == "softmax") {
      model.layers.emplace_back(SoftmaxLayer{});
    } else {
      throw ParseError(ErrorCode::UnknownLayerKind, line_no, "unknown directive '" + std::string(kind) + "'");
    }
    p.finish();
  }
  if (!have_input) throw ParseError(ErrorCode::ParseError, 0, "manifest has no input directive");
  return model;
}

std::string format_manifest(const ModelSpec& model) {
  std::ostringstream out;
  out << "input " << model.input_h << ' ' << model.input_w << ' ' << model.input_c << '\n';
  for (const auto& layer : model.layers) {
    std::visit(overloaded{
                   [&](const ConvLayer& l) {
                     out << "conv " << l.weight_name << ' ' << l.bias_name << " stride " << l.stride_h << ' '
                         << l.stride_w << " pad " << l.pad_h << ' ' << l.pad_w;
                     if (l.patch_embed) out << " patch_embed";
                   },
                   [&](const FcLayer& l) {
                     out << "fc " << l.weight_name << ' ' << l.bias_name << " spatial " << l.spatial_channels;
                   },
                   [&](const ReluLayer&) { out << "relu"; },
                   [&](const MaxPoolLayer& l) { out << "maxpool " << l.window << ' ' << l.stride; },
                   [&](const AvgPoolAdaptiveLayer& l) { out << "avgpool_adaptive " << l.out_h << ' ' << l.out_w; },
                   [&](const FlattenLayer&) { out << "flatten"; },
                   [&](const SoftmaxLayer&) { out << "softmax"; },
               },
               layer);
    out << '\n';
  }
  return out.str();
}

ShapeMap shapes_of(const TensorMap& weights) {
  ShapeMap shapes;
  for (const auto& [name, tensor] : weights) shapes.emplace(name, tensor.shape());
  return shapes;
}

ShapeTrace validate_model(const ModelSpec& model, const TensorMap& weights) {
  return validate_model(model, shapes_of(weights));
}

ShapeTrace validate_model(const ModelSpec& model, const ShapeMap& weights) {
  Shape current{model.input_h, model.input_w, model.input_c};
  for (std::size_t extent : current) {
    if (extent < 1) throw Error(ErrorCode::ShapeError, "input dimensions must be >= 1");
  }
  // Pre-flatten (H, W, C) of the vector currently flowing, if it came
  // straight from a flatten.
  std::optional<Shape> flattened_from;
  ShapeTrace trace;

  for (std::size_t index = 0; index < model.layers.size(); ++index) {
    const LayerSpec& layer = model.layers[index];
    auto lookup = [&](const std::string& name) -> const Shape& {
      const auto it = weights.find(name);
      if (it == weights.end()) shape_error(index, layer, "tensor '" + name + "' is missing from the archive");
      return it->second;
    };
    auto require_spatial = [&] {
      if (current.size() != 3) shape_error(index, layer, "expects an (H, W, C) map, got " + shape_to_string(current));
    };

    std::visit(
        overloaded{
            [&](const ConvLayer& l) {
              require_spatial();
              const Shape& w = lookup(l.weight_name);
              if (w.size() != 4) shape_error(index, layer, "weight must be rank 4, got " + shape_to_string(w));
              if (w[1] != current[2]) {
                shape_error(index, layer, "weight expects " + std::to_string(w[1]) + " input channels, got " +
                                              std::to_string(current[2]));
              }
              const Shape& b = lookup(l.bias_name);
              if (b != Shape{w[0]}) shape_error(index, layer, "bias shape " + shape_to_string(b) + " != " + std::to_string(w[0]));
              if (l.stride_h < 1 || l.stride_w < 1) shape_error(index, layer, "stride must be >= 1");
              const std::size_t oh = conv_output_extent(current[0], w[2], l.pad_h, l.stride_h);
              const std::size_t ow = conv_output_extent(current[1], w[3], l.pad_w, l.stride_w);
              if (oh == 0 || ow == 0) shape_error(index, layer, "kernel larger than padded input");
              current = {oh, ow, w[0]};
              flattened_from.reset();
            },
            [&](const FcLayer& l) {
              if (current.size() != 1) shape_error(index, layer, "expects a flattened vector, got " + shape_to_string(current));
              const Shape& w = lookup(l.weight_name);
              if (w.size() != 2) shape_error(index, layer, "weight must be rank 2, got " + shape_to_string(w));
              if (w[1] != current[0]) {
                shape_error(index, layer, "in_features " + std::to_string(w[1]) + " != incoming " +
                                              std::to_string(current[0]));
              }
              const Shape& b = lookup(l.bias_name);
              if (b != Shape{w[0]}) shape_error(index, layer, "bias shape " + shape_to_string(b) + " != " + std::to_string(w[0]));
              if (l.spatial_channels > 0) {
                if (!flattened_from) shape_error(index, layer, "spatial fc must directly follow flatten");
                if ((*flattened_from)[2] != l.spatial_channels) {
                  shape_error(index, layer, "spatial channels " + std::to_string(l.spatial_channels) +
                                                " != flattened map channels " + std::to_string((*flattened_from)[2]));
                }
              }
              current = {w[0]};
              flattened_from.reset();
            },
            [&](const ReluLayer&) {},
            [&](const MaxPoolLayer& l) {
              require_spatial();
              if (l.window < 1 || l.stride < 1) shape_error(index, layer, "window and stride must be >= 1");
              const std::size_t oh = conv_output_extent(current[0], l.window, 0, l.stride);
              const std::size_t ow = conv_output_extent(current[1], l.window, 0, l.stride);
              if (oh == 0 || ow == 0) shape_error(index, layer, "window larger than input");
              current = {oh, ow, current[2]};
            },
            [&](const AvgPoolAdaptiveLayer& l) {
              require_spatial();
              if (l.out_h < 1 || l.out_w < 1) shape_error(index, layer, "output size must be >= 1");
              current = {l.out_h, l.out_w, current[2]};
            },
            [&](const FlattenLayer&) {
              require_spatial();
              flattened_from = current;
              current = {element_count(current)};
            },
            [&](const SoftmaxLayer&) { flattened_from.reset(); },
        },
        layer);
    trace.push_back(current);
  }
  return trace;
}

}  // namespace krescale
