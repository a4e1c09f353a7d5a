/*
 * Copyright 2026 The rfxg Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "linear_scorer.hpp"
#include "rfxg/convnet.hpp"
#include "rfxg/error.hpp"
#include "rfxg/explainers.hpp"
#include "rfxg/query.hpp"
#include "rfxg/random.hpp"

namespace rfxg {
namespace {

using testing::LinearSoftmaxScorer;

ImageTensor random_image(std::size_t h, std::size_t w, std::size_t c, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> data(h * w * c);
  for (double& v : data) v = rng.uniform();
  return ImageTensor(h, w, c, std::move(data));
}

// Input gradient of sum_c w_c z_c for the linear scorer.
std::vector<double> linear_direction(const LinearSoftmaxScorer& s, std::span<const double> w) {
  std::vector<double> g(s.dim(), 0.0);
  for (std::size_t c = 0; c < s.class_count(); ++c) {
    for (std::size_t j = 0; j < s.dim(); ++j) g[j] += w[c] * s.weight(c, j);
  }
  return g;
}

// Scorer that only exposes probabilities.
class ProbabilityOnly : public Scorer {
 public:
  explicit ProbabilityOnly(const Scorer& inner) : inner_(inner) {}
  std::size_t class_count() const override { return inner_.class_count(); }
  std::vector<double> probabilities(const ImageTensor& x) const override {
    return inner_.probabilities(x);
  }

 private:
  const Scorer& inner_;
};

ToyConvNet small_net(std::uint64_t seed) {
  Architecture a;
  a.height = a.width = 8;
  a.channels = 3;
  a.classes = 4;
  a.stages = {{4, 3, false}, {3, 3, true}};
  ToyConvNet net = ToyConvNet::initialized(a, seed);
  Rng rng(seed + 1);
  net.mutable_parameters().for_each_tensor([&](std::vector<double>& t) {
    for (double& v : t) v += rng.uniform(-0.2, 0.2);
  });
  return net;
}

TEST(GradientMap, ChannelMeanOfAbsoluteGradient) {
  const auto s = LinearSoftmaxScorer::random(3, 4 * 4 * 3, 1);
  const auto img = random_image(4, 4, 3, 2);
  const ObjectiveVector obj({1.0, -1.0, 0.0});
  const auto g = linear_direction(s, obj.weights());
  const auto map = explain_gradient(s, img, obj);
  for (std::size_t p = 0; p < 16; ++p) {
    const double expected = (std::abs(g[3 * p]) + std::abs(g[3 * p + 1]) + std::abs(g[3 * p + 2])) / 3;
    EXPECT_NEAR(map.values()[p], expected, 1e-14);
  }
}

TEST(IntegratedGradients, ExactForLinearLogits) {
  const auto s = LinearSoftmaxScorer::random(4, 3 * 3 * 3, 3);
  const auto img = random_image(3, 3, 3, 4);
  const auto base = random_image(3, 3, 3, 5);
  const ObjectiveVector obj({0.0, 1.0, -1.0, -1.0});
  const auto g = linear_direction(s, obj.weights());
  const auto attr = integrated_gradients(s, img, obj, base, 8);
  for (std::size_t j = 0; j < attr.size(); ++j) {
    EXPECT_NEAR(attr[j], (img.data()[j] - base.data()[j]) * g[j], 1e-13);
  }
  const auto map = explain_integrated_gradients(s, img, obj, base, 8);
  EXPECT_NEAR(map.values()[4], attr[12] + attr[13] + attr[14], 1e-14);
}

TEST(IntegratedGradients, CompletenessInProbabilitySpace) {
  const auto s = LinearSoftmaxScorer::random(4, 4 * 4 * 3, 6, 0.3);
  const auto img = random_image(4, 4, 3, 7);
  const ImageTensor base(4, 4, 3, 0.0);
  const auto obj = ObjectiveVector::single(4, 2);
  const auto attr = integrated_gradients(s, img, obj, base, 512, ScoreSpace::kProbabilities);
  double total = 0.0;
  for (double v : attr) total += v;
  const double delta = s.objective(img, obj.weights(), ScoreSpace::kProbabilities) -
                       s.objective(base, obj.weights(), ScoreSpace::kProbabilities);
  EXPECT_NEAR(total, delta, 1e-4 * std::abs(delta) + 1e-9);
}

TEST(IntegratedGradients, Preconditions) {
  const auto s = LinearSoftmaxScorer::random(2, 12, 8);
  const auto img = random_image(2, 2, 3, 9);
  const auto obj = ObjectiveVector::single(2, 0);
  EXPECT_THROW(integrated_gradients(s, img, obj, img, 4), InvalidArgument);
  EXPECT_THROW(integrated_gradients(s, img, obj, ImageTensor(2, 2, 1), 16), DimensionError);
}

TEST(GradCam, GridIsWeightedActivationSum) {
  const ToyConvNet net = small_net(10);
  const auto img = random_image(8, 8, 3, 11);
  const auto obj = ObjectiveVector::single(4, 1);
  const auto cam = gradcam_grid(net, img, obj, false);
  const auto act = net.forward(img).activations;
  const auto grad = net.backward_activations(img, obj.weights(), ScoreSpace::kLogits);
  ASSERT_EQ(cam.channel_weights.size(), 3u);
  ASSERT_EQ(cam.grid.height(), 8u);
  for (std::size_t k = 0; k < 3; ++k) {
    double mean = 0.0;
    for (std::size_t p = 0; p < 64; ++p) mean += grad.values[k * 64 + p] / 64;
    EXPECT_NEAR(cam.channel_weights[k], mean, 1e-14);
  }
  for (std::size_t i = 0; i < 8; ++i) {
    for (std::size_t j = 0; j < 8; ++j) {
      double v = 0.0;
      for (std::size_t k = 0; k < 3; ++k) v += cam.channel_weights[k] * act.at(k, i, j);
      EXPECT_NEAR(cam.grid.at(i, j), v, 1e-14);
    }
  }
  const auto rectified = gradcam_grid(net, img, obj, true);
  for (std::size_t p = 0; p < 64; ++p) {
    EXPECT_EQ(rectified.grid.values()[p], std::max(0.0, cam.grid.values()[p]));
  }
}

TEST(GradCam, ContrastiveMapIsDifferenceOfClassMaps) {
  const ToyConvNet net = small_net(12);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto img = random_image(8, 8, 3, 20 + seed);
    const auto a = ObjectiveVector::single(4, 0), b = ObjectiveVector::single(4, 3);
    const auto both = explain_gradcam(net, img, a - b, false);
    const auto ma = explain_gradcam(net, img, a, false);
    const auto mb = explain_gradcam(net, img, b, false);
    for (std::size_t p = 0; p < both.size(); ++p) {
      EXPECT_NEAR(both.values()[p], ma.values()[p] - mb.values()[p], 1e-12);
    }
  }
}

TEST(GradCam, DispatchRectifiesOnlyPointwiseQueries) {
  const ToyConvNet net = small_net(13);
  const auto img = random_image(8, 8, 3, 14);
  const ExplainerSettings settings;
  const auto pointwise = explain(ExplainerKind::kGradCam, net, img, PointwiseClass{2}, settings);
  EXPECT_GE(*std::min_element(pointwise.values().begin(), pointwise.values().end()), 0.0);
  const auto contrast = explain(ExplainerKind::kGradCam, net, img, ContrastiveClass{2, 0}, settings);
  EXPECT_EQ(contrast, explain_gradcam(net, img, query_to_objective(ContrastiveClass{2, 0}, 4), false));
  const auto s = LinearSoftmaxScorer::random(4, 8 * 8 * 3, 1);
  EXPECT_THROW(explain(ExplainerKind::kGradCam, s, img, PointwiseClass{0}, settings), InvalidArgument);
  EXPECT_THROW(gradcam_grid(ToyConvNet(Architecture{8, 8, 3, 4, {}}), img,
                            ObjectiveVector::single(4, 0), false),
               InvalidArgument);
}

TEST(Occlusion, Origins) {
  EXPECT_EQ(occlusion_origins(8, 4, 2), (std::vector<std::size_t>{0, 2, 4}));
  EXPECT_EQ(occlusion_origins(10, 4, 3), (std::vector<std::size_t>{0, 3, 6}));
  EXPECT_EQ(occlusion_origins(11, 4, 3), (std::vector<std::size_t>{0, 3, 6, 7}));
  EXPECT_EQ(occlusion_origins(4, 4, 2), (std::vector<std::size_t>{0}));
  EXPECT_EQ(occlusion_origins(32, 4, 2).size(), 15u);
  EXPECT_THROW(occlusion_origins(3, 4, 1), InvalidArgument);
  EXPECT_THROW(occlusion_origins(8, 2, 0), InvalidArgument);
}

TEST(Occlusion, DisjointPatchesOnLinearLogits) {
  const auto s = LinearSoftmaxScorer::random(3, 4 * 4 * 3, 15);
  const auto img = random_image(4, 4, 3, 16);
  const ObjectiveVector obj({1.0, 0.0, -1.0});
  const auto g = linear_direction(s, obj.weights());
  OcclusionOptions opts;
  opts.patch = 2;
  opts.stride = 2;
  opts.space = ScoreSpace::kLogits;
  const auto map = explain_occlusion(s, img, obj, opts);
  for (std::size_t y = 0; y < 4; ++y) {
    for (std::size_t x = 0; x < 4; ++x) {
      double drop = 0.0;
      for (std::size_t py = y / 2 * 2; py < y / 2 * 2 + 2; ++py) {
        for (std::size_t px = x / 2 * 2; px < x / 2 * 2 + 2; ++px) {
          for (std::size_t c = 0; c < 3; ++c) drop += g[(py * 4 + px) * 3 + c] * img.at(py, px, c);
        }
      }
      EXPECT_NEAR(map.at(y, x), drop, 1e-12);
    }
  }
}

TEST(Occlusion, OverlappingPatchesAverageCoverage) {
  const auto s = LinearSoftmaxScorer::random(2, 2 * 3 * 1, 17);
  const ImageTensor img(2, 3, 1, std::vector<double>{0.2, 0.6, 1.0, 0.4, 0.8, 0.3});
  const ObjectiveVector obj({1.0, 0.0});
  const auto g = linear_direction(s, obj.weights());
  OcclusionOptions opts;
  opts.patch = 2;
  opts.stride = 1;
  opts.space = ScoreSpace::kLogits;
  const auto map = explain_occlusion(s, img, obj, opts);
  // Column contributions; both patches span the two rows.
  double col[3];
  for (std::size_t c = 0; c < 3; ++c) col[c] = g[c] * img.at(0, c, 0) + g[3 + c] * img.at(1, c, 0);
  const double d0 = col[0] + col[1], d1 = col[1] + col[2];
  for (std::size_t r = 0; r < 2; ++r) {
    EXPECT_NEAR(map.at(r, 0), d0, 1e-14);
    EXPECT_NEAR(map.at(r, 1), (d0 + d1) / 2, 1e-14);
    EXPECT_NEAR(map.at(r, 2), d1, 1e-14);
  }
}

TEST(Occlusion, SharedSweepMatchesSingleObjectives) {
  const auto s = LinearSoftmaxScorer::random(4, 6 * 6 * 3, 18);
  const auto img = random_image(6, 6, 3, 19);
  const std::vector<ObjectiveVector> objs = {ObjectiveVector::single(4, 0),
                                             ObjectiveVector({1.0, -1.0, 0.0, 0.0})};
  OcclusionOptions opts;
  opts.patch = 3;
  opts.stride = 2;
  opts.fill = MaskFill::mean_color();
  const auto maps = explain_occlusion(s, img, objs, opts);
  ASSERT_EQ(maps.size(), 2u);
  EXPECT_EQ(maps[0], explain_occlusion(s, img, objs[0], opts));
  EXPECT_EQ(maps[1], explain_occlusion(s, img, objs[1], opts));
  opts.space = ScoreSpace::kLogits;
  const ProbabilityOnly probs_only(s);
  EXPECT_THROW(explain_occlusion(probs_only, img, objs[0], opts), InvalidArgument);
}

TEST(RandomMap, SeededUniform) {
  const auto a = explain_random(5, 7, 3);
  EXPECT_EQ(a, explain_random(5, 7, 3));
  EXPECT_NE(a, explain_random(5, 7, 4));
  for (double v : a.values()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
}

TEST(Explain, DispatchAndNames) {
  for (auto kind : {ExplainerKind::kGradient, ExplainerKind::kIntegratedGradients,
                    ExplainerKind::kGradCam, ExplainerKind::kOcclusion, ExplainerKind::kRandom}) {
    EXPECT_EQ(parse_explainer(to_string(kind)), kind);
  }
  EXPECT_THROW(parse_explainer("lime"), InvalidArgument);

  const auto s = LinearSoftmaxScorer::random(3, 4 * 4 * 3, 21);
  const auto img = random_image(4, 4, 3, 22);
  ExplainerSettings settings;
  settings.ig_steps = 16;
  settings.occlusion.patch = 2;
  const Query q = ContrastiveClass{0, 2};
  const auto obj = query_to_objective(q, 3);
  EXPECT_EQ(explain(ExplainerKind::kGradient, s, img, q, settings), explain_gradient(s, img, obj));
  EXPECT_EQ(explain(ExplainerKind::kIntegratedGradients, s, img, q, settings),
            explain_integrated_gradients(s, img, obj, ImageTensor(4, 4, 3), 16));
  EXPECT_EQ(explain(ExplainerKind::kOcclusion, s, img, q, settings),
            explain_occlusion(s, img, obj, settings.occlusion));
  EXPECT_EQ(explain(ExplainerKind::kRandom, s, img, q, settings, 5), explain_random(4, 4, 5));

  const ProbabilityOnly probs_only(s);
  EXPECT_THROW(explain(ExplainerKind::kGradient, probs_only, img, q, settings), InvalidArgument);
  EXPECT_THROW(explain(ExplainerKind::kIntegratedGradients, probs_only, img, q, settings),
               InvalidArgument);
  EXPECT_NO_THROW(explain(ExplainerKind::kOcclusion, probs_only, img, q, settings));
  EXPECT_THROW(explain(ExplainerKind::kGradient, s, img, ContrastiveClass{1, 1}, settings),
               InvalidArgument);
}

}  // namespace
}  // namespace rfxg
