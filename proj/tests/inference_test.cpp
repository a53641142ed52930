#include <gtest/gtest.h>

#include <cstdio>
#include <sstream>

#include "krescale/inference.hpp"
#include "krescale/model_zoo.hpp"
#include "krescale/surgery.hpp"
#include "support.hpp"

namespace krescale {
namespace {

using test::expect_golden;
using test::model_path;

const TensorMap& bundled_toy_weights() {
  static const TensorMap weights = load_archive(model_path("toy_cnn.kta"));
  return weights;
}

std::vector<double> values(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

Tensor ramp_image(std::size_t h, std::size_t w, std::size_t c) {
  std::vector<double> data(h * w * c);
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < w; ++j)
      for (std::size_t k = 0; k < c; ++k)
        data[(i * w + j) * c + k] = static_cast<double>(i) + 2.0 * static_cast<double>(j) - static_cast<double>(k);
  return Tensor({h, w, c}, std::move(data));
}

// conv 1x1 (w = 2, b = -1) -> relu -> flatten -> fc 2x4, worked by hand:
// [1, 0, 0.25, 2] -> [1, -1, -0.5, 3] -> [1, 0, 0, 3] -> [4.5, -3].
TEST(Forward, HandComputedNetwork) {
  const ModelSpec model = parse_manifest("input 2 2 1\nconv w b 1 1 0 0\nrelu\nflatten\nfc f g 0\n");
  const TensorMap weights{
      {"w", Tensor({1, 1, 1, 1}, {2.0})},
      {"b", Tensor({1}, {-1.0})},
      {"f", Tensor({2, 4}, {1, 1, 1, 1, 0, 0, 0, -1})},
      {"g", Tensor({2}, {0.5, 0.0})},
  };
  const Tensor logits = forward(model, weights, Tensor({2, 2, 1}, {1.0, 0.0, 0.25, 2.0}));
  ASSERT_EQ(logits.shape(), Shape{2});
  EXPECT_EQ(logits[0], 4.5);
  EXPECT_EQ(logits[1], -3.0);
}

TEST(Forward, SoftmaxOfEqualLogitsIsUniform) {
  const ModelSpec model = parse_manifest("input 1 1 2\nflatten\nsoftmax\n");
  const Tensor p = forward(model, {}, Tensor::zeros({1, 1, 2}));
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  EXPECT_DOUBLE_EQ(p[1], 0.5);
}

TEST(Forward, SoftmaxSurvivesLargeLogits) {
  const ModelSpec model = parse_manifest("input 1 1 3\nflatten\nsoftmax\n");
  const Tensor p = forward(model, {}, Tensor({1, 1, 3}, {1000.0, 1000.0, -1000.0}));
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  EXPECT_DOUBLE_EQ(p[1], 0.5);
  EXPECT_EQ(p[2], 0.0);
}

TEST(Forward, DeltaKernelIsIdentity) {
  const ModelSpec model = parse_manifest("input 5 4 2\nconv w b 1 1 1 1\n");
  std::vector<double> w(2 * 2 * 3 * 3, 0.0);
  w[((0 * 2 + 0) * 3 + 1) * 3 + 1] = 1.0;
  w[((1 * 2 + 1) * 3 + 1) * 3 + 1] = 1.0;
  const TensorMap weights{{"w", Tensor({2, 2, 3, 3}, std::move(w))}, {"b", Tensor::zeros({2})}};
  Rng rng(3);
  const Tensor x = test::random_tensor(rng, {5, 4, 2});
  EXPECT_TRUE(forward(model, weights, x).identical(x));
}

TEST(Forward, MaxPoolTakesWindowMaxima) {
  const ModelSpec model = parse_manifest("input 4 4 1\nmaxpool 2 2\n");
  std::vector<double> data(16);
  for (std::size_t i = 0; i < 16; ++i) data[i] = static_cast<double>((i * 7) % 16);
  const Tensor y = forward(model, {}, Tensor({4, 4, 1}, std::move(data)));
  // rows: [0 7 14 5] [12 3 10 1] [8 15 6 13] [4 11 2 9]
  EXPECT_EQ(values(y), (std::vector<double>{12, 14, 15, 13}));
}

// 3x3 -> 2x2 cells overlap: rows/cols [0, 2) and [1, 3).
TEST(Forward, AdaptiveAvgPoolCells) {
  const ModelSpec model = parse_manifest("input 3 3 1\navgpool_adaptive 2 2\n");
  const Tensor y = forward(model, {}, Tensor({3, 3, 1}, {0, 1, 2, 3, 4, 5, 6, 7, 8}));
  EXPECT_EQ(values(y), (std::vector<double>{2, 3, 5, 6}));
}

TEST(Forward, FlattenIsChannelMajor) {
  const ModelSpec model = parse_manifest("input 1 2 2\nflatten\n");
  const Tensor y = forward(model, {}, Tensor({1, 2, 2}, {1, 2, 3, 4}));
  EXPECT_EQ(values(y), (std::vector<double>{1, 3, 2, 4}));
}

TEST(Forward, RejectsWrongInputShape) {
  const ModelSpec model = parse_manifest(zoo::toy_cnn_manifest());
  EXPECT_KRESCALE_ERROR(forward(model, bundled_toy_weights(), Tensor::zeros({16, 16, 3})), ErrorCode::ShapeError);
}

TEST(Forward, ToyCnnLogitsGolden) {
  const ModelSpec model = parse_manifest(zoo::toy_cnn_manifest());
  const auto samples = synth_dataset(7, 4, 32, 32, 3, zoo::kToyClasses);
  std::string text;
  std::vector<double> actual;
  for (const Sample& s : samples) {
    const Tensor logits = forward(model, bundled_toy_weights(), s.image);
    for (double v : logits.data()) {
      char line[64];
      std::snprintf(line, sizeof line, "%.17g\n", v);
      text += line;
      actual.push_back(v);
    }
  }
  if (std::getenv("KRESCALE_UPDATE_GOLDEN") != nullptr) {
    expect_golden("toy_cnn_logits.txt", text);
    return;
  }
  std::istringstream golden(test::read_file(test::golden_path("toy_cnn_logits.txt")));
  std::vector<double> expected;
  for (double v; golden >> v;) expected.push_back(v);
  ASSERT_EQ(expected.size(), actual.size());
  for (std::size_t i = 0; i < actual.size(); ++i) EXPECT_NEAR(actual[i], expected[i], 1e-10) << i;
}

TEST(UpsampleInput, IdentityFactor) {
  Rng rng(5);
  const Tensor x = test::random_tensor(rng, {6, 7, 3});
  for (auto method : {InterpMethod::Nearest, InterpMethod::Bilinear, InterpMethod::Bicubic}) {
    EXPECT_TRUE(upsample_input(x, 1, 1, method).identical(x));
  }
}

TEST(UpsampleInput, ConstantStaysConstant) {
  const Tensor x({4, 4, 2}, std::vector<double>(32, 0.375));
  for (auto method : {InterpMethod::Nearest, InterpMethod::Bilinear, InterpMethod::Bicubic}) {
    const Tensor y = upsample_input(x, 3, 2, method);
    ASSERT_EQ(y.shape(), (Shape{12, 8, 2}));
    for (double v : y.data()) EXPECT_NEAR(v, 0.375, 1e-14);
  }
}

// Align-corners: output (i, j) samples the source at i (H-1)/(mH-1).
TEST(UpsampleInput, RampIsReproduced) {
  const std::size_t h = 5, w = 4, c = 2, m = 2, n = 3;
  const Tensor x = ramp_image(h, w, c);
  for (auto method : {InterpMethod::Bilinear, InterpMethod::Bicubic}) {
    const Tensor y = upsample_input(x, m, n, method);
    for (std::size_t i = 0; i < m * h; ++i)
      for (std::size_t j = 0; j < n * w; ++j)
        for (std::size_t k = 0; k < c; ++k) {
          const double sy = static_cast<double>(i) * (h - 1) / (m * h - 1);
          const double sx = static_cast<double>(j) * (w - 1) / (n * w - 1);
          EXPECT_NEAR(y(i, j, k), sy + 2.0 * sx - static_cast<double>(k), 1e-12);
        }
  }
}

TEST(UpsampleInput, Errors) {
  const Tensor x = Tensor::zeros({4, 4, 1});
  EXPECT_KRESCALE_ERROR(upsample_input(x, 2, 2, InterpMethod::Dilation), ErrorCode::BadMethod);
  EXPECT_KRESCALE_ERROR(upsample_input(x, 0, 2, InterpMethod::Bicubic), ErrorCode::BadScale);
  EXPECT_KRESCALE_ERROR(upsample_input(Tensor::zeros({4, 4}), 2, 2, InterpMethod::Bicubic), ErrorCode::BadRank);
}

TEST(CosineSimilarity, Cases) {
  EXPECT_DOUBLE_EQ(cosine_similarity(Tensor({2}, {1, 0}), Tensor({2}, {3, 0})), 1.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(Tensor({2}, {1, 0}), Tensor({2}, {0, 2})), 0.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(Tensor({2}, {1, 1}), Tensor({2}, {-1, -1})), -1.0);
  EXPECT_EQ(cosine_similarity(Tensor::zeros({2}), Tensor::zeros({2})), 1.0);
  EXPECT_KRESCALE_ERROR(cosine_similarity(Tensor::zeros({2}), Tensor::zeros({3})), ErrorCode::ShapeError);
}

TEST(Agreement, IdenticalModelsAgreeFully) {
  const ModelSpec model = parse_manifest(zoo::toy_cnn_manifest());
  std::vector<Tensor> inputs;
  for (Sample& s : synth_dataset(11, 5, 32, 32, 3, zoo::kToyClasses)) inputs.push_back(std::move(s.image));
  const AgreementReport r =
      logit_agreement(model, bundled_toy_weights(), model, bundled_toy_weights(), inputs, InterpMethod::Bicubic);
  EXPECT_EQ(r.argmax_match_rate, 1.0);
  EXPECT_NEAR(r.mean_cosine_sim, 1.0, 1e-15);
}

TEST(Agreement, SurgeredToyCnnTracksBase) {
  const ModelSpec model = parse_manifest(zoo::toy_cnn_manifest());
  const SurgeredModel fine = supersample_model(model, bundled_toy_weights(), {2, 2, InterpMethod::Bicubic, true});
  std::vector<Tensor> inputs;
  for (Sample& s : synth_dataset(13, 40, 32, 32, 3, zoo::kToyClasses)) inputs.push_back(std::move(s.image));
  const AgreementReport r =
      logit_agreement(model, bundled_toy_weights(), fine.model, fine.weights, inputs, InterpMethod::Bicubic);
  EXPECT_GE(r.argmax_match_rate, 0.9);
  EXPECT_GE(r.mean_cosine_sim, 0.95);
}

TEST(Agreement, NonIntegerRatioIsRejected) {
  const ModelSpec base = parse_manifest("input 4 4 1\nflatten\n");
  const ModelSpec other = parse_manifest("input 6 6 1\nflatten\n");
  EXPECT_KRESCALE_ERROR(logit_agreement(base, {}, other, {}, {Tensor::zeros({4, 4, 1})}, InterpMethod::Bicubic),
                        ErrorCode::ShapeError);
}

TEST(SynthDataset, DeterministicAndBounded) {
  const auto a = synth_dataset(21, 30, 12, 10, 3, 4);
  const auto b = synth_dataset(21, 30, 12, 10, 3, 4);
  ASSERT_EQ(a.size(), 30u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_TRUE(a[i].image.identical(b[i].image));
    EXPECT_EQ(a[i].label, b[i].label);
    EXPECT_LT(a[i].label, 4u);
    EXPECT_EQ(a[i].image.shape(), (Shape{12, 10, 3}));
    for (double v : a[i].image.data()) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
  EXPECT_FALSE(synth_dataset(22, 1, 12, 10, 3, 4)[0].image.identical(a[0].image));
}

TEST(SynthDataset, Errors) {
  EXPECT_KRESCALE_ERROR(synth_dataset(1, 0, 8, 8, 3, 2), ErrorCode::EmptyShape);
  EXPECT_KRESCALE_ERROR(synth_dataset(1, 4, 8, 8, 3, 0), ErrorCode::EmptyShape);
}

TEST(ModelZoo, BundledFilesMatchGenerator) {
  EXPECT_EQ(test::read_file(model_path("toy_cnn.manifest")), zoo::toy_cnn_manifest());
  EXPECT_EQ(test::read_file(model_path("vgg16.manifest")), zoo::vgg16_manifest());
  const TensorMap fresh = zoo::toy_cnn_weights(zoo::kToySeed);
  ASSERT_EQ(fresh.size(), bundled_toy_weights().size());
  for (const auto& [name, tensor] : fresh) EXPECT_TRUE(bundled_toy_weights().at(name).identical(tensor)) << name;
}

TEST(ModelZoo, RandomWeightsFollowShapes) {
  const TensorMap w = zoo::random_weights(zoo::toy_cnn_shapes(), 4);
  EXPECT_EQ(shapes_of(w), zoo::toy_cnn_shapes());
  EXPECT_NO_THROW(validate_model(parse_manifest(zoo::toy_cnn_manifest()), w));
}

}  // namespace
}  // namespace krescale
