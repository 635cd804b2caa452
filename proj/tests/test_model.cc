// Copyright 2026 The mrcp Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include "mrcp/errors.h"
#include "mrcp/model.h"
#include "mrcp/ops.h"
#include "model_fixtures.h"
#include "test_util.h"

namespace mrcp {
namespace {

using testing::random_tensor;
using testing::tiny_batch;
using testing::tiny_config;
using testing::values;

constexpr Variant kGraphVariants[] = {Variant::kMp, Variant::kMpPose, Variant::kMpAtt};
constexpr Variant kAllVariants[] = {Variant::kBaseline, Variant::kBaselineMp, Variant::kMp, Variant::kMpPose,
                                    Variant::kMpAtt};

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("mrcp_test_" + name)).string();
}

void zero_all(ParamStore& params) {
  for (auto& [name, entry] : params.entries()) entry.value = Tensor::zeros(entry.value.shape());
}

// Node features as 1x1x1 tensors so plain aggregation can be read directly.
std::vector<Tensor> scalars(std::initializer_list<double> xs) {
  std::vector<Tensor> out;
  for (double x : xs) out.push_back(Tensor({1, 1, 1}, {x}));
  return out;
}

TEST(ModelConfig, RejectsInvalidSettings) {
  ModelConfig cfg;
  cfg.levels = 3;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = ModelConfig{};
  cfg.height = 60;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = ModelConfig{};
  cfg.heads = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = ModelConfig{};
  cfg.task = Task::kSegmentation;
  cfg.class_count = 1;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_NO_THROW(ModelConfig{}.validate());
}

TEST(ModelConfig, VariantNamesRoundTrip) {
  for (Variant v : kAllVariants) EXPECT_EQ(parse_variant(to_string(v)), v);
  EXPECT_THROW(parse_variant("mp-film"), ConfigError);
  EXPECT_EQ(parse_task("segmentation"), Task::kSegmentation);
}

TEST(Encoder, DefaultShapeContract) {
  const PerceptionModel model(ModelConfig{}, 1);
  std::mt19937_64 gen(1);
  const Tensor h = model.encode(random_tensor({3, 64, 64}, gen, 0, 1));
  EXPECT_EQ(h.shape(), (Shape{32, 8, 8}));
  EXPECT_THROW(model.encode(Tensor::zeros({3, 32, 64})), DimensionError);
  EXPECT_THROW(model.encode(Tensor::zeros({4, 64, 64})), DimensionError);
}

TEST(Encoder, ZeroWeightsGiveZeroFeature) {
  PerceptionModel model(tiny_config(Variant::kMp), 2);
  zero_all(model.params());
  std::mt19937_64 gen(2);
  const Tensor h = model.encode(random_tensor({3, 16, 16}, gen, 0, 1));
  EXPECT_EQ(values(h), std::vector<double>(h.numel(), 0.0));
}

TEST(Encoder, IdenticalImagesGiveIdenticalFeatures) {
  const PerceptionModel model(tiny_config(Variant::kMp), 3);
  std::mt19937_64 gen(3);
  const Tensor x = random_tensor({3, 16, 16}, gen, 0, 1);
  EXPECT_EQ(values(model.encode(x)), values(model.encode(x.detach())));
}

TEST(Decoder, DefaultShapeAndPositiveDepth) {
  const PerceptionModel model(ModelConfig{}, 4);
  std::mt19937_64 gen(4);
  const Tensor h0 = random_tensor({32, 8, 8}, gen, -2, 2), hl = random_tensor({32, 8, 8}, gen, -2, 2);
  const Tensor y = model.decode(h0, hl);
  EXPECT_EQ(y.shape(), (Shape{64, 64}));
  EXPECT_GT(*std::min_element(y.data().begin(), y.data().end()), 0.0);
  EXPECT_THROW(model.decode(h0, Tensor::zeros({32, 4, 4})), DimensionError);
}

TEST(Decoder, ZeroWeightsGiveLnTwo) {
  PerceptionModel model(tiny_config(Variant::kMp), 5);
  zero_all(model.params());
  std::mt19937_64 gen(5);
  const Tensor y = model.decode(random_tensor({8, 2, 2}, gen), random_tensor({8, 2, 2}, gen));
  for (double v : y.data()) EXPECT_DOUBLE_EQ(v, std::log(2.0));
}

TEST(Decoder, SegmentationEmitsLogitsPerClass) {
  const PerceptionModel model(tiny_config(Variant::kMp, Task::kSegmentation), 6);
  std::mt19937_64 gen(6);
  const Tensor y = model.decode(random_tensor({8, 2, 2}, gen), random_tensor({8, 2, 2}, gen));
  EXPECT_EQ(y.shape(), (Shape{3, 16, 16}));
}

TEST(MessagePassing, TwoNodesSwapFeatures) {
  ModelConfig cfg = tiny_config(Variant::kMp);
  const PerceptionModel model(cfg, 7);
  const auto next = model.message_passing_round(CommGraph(2, {{0, 1}}), scalars({1.5, -4.0}), 0);
  EXPECT_EQ(next[0].item(), -4.0);
  EXPECT_EQ(next[1].item(), 1.5);
}

TEST(MessagePassing, PathGraphAverages) {
  const PerceptionModel model(tiny_config(Variant::kMp), 8);
  const auto next = model.message_passing_round(CommGraph(3, {{0, 1}, {1, 2}}), scalars({1, 2, 3}), 0);
  EXPECT_EQ(next[0].item(), 2.0);
  EXPECT_EQ(next[1].item(), 2.0);
  EXPECT_EQ(next[2].item(), 2.0);
}

TEST(MessagePassing, IsolatedNodeKeepsFeature) {
  const PerceptionModel model(tiny_config(Variant::kMp), 9);
  const auto next = model.message_passing_round(CommGraph(3, {{0, 1}}), scalars({1, 2, 7}), 0);
  EXPECT_EQ(next[2].item(), 7.0);
}

TEST(MessagePassing, RejectsMismatchedFeatures) {
  const PerceptionModel model(tiny_config(Variant::kMp), 10);
  std::vector<Tensor> f = scalars({1, 2});
  f[1] = Tensor::zeros({1, 1, 2});
  EXPECT_THROW(model.message_passing_round(CommGraph(2, {{0, 1}}), f, 0), DimensionError);
  EXPECT_THROW(model.message_passing_round(CommGraph(3, {{0, 1}}), scalars({1, 2}), 0), DimensionError);
}

TEST(MessagePassing, PoseVariantNeedsPoses) {
  const PerceptionModel model(tiny_config(Variant::kMpPose), 11);
  std::mt19937_64 gen(11);
  const std::vector<Tensor> f{random_tensor({8, 2, 2}, gen), random_tensor({8, 2, 2}, gen)};
  EXPECT_THROW(model.message_passing_round(CommGraph(2, {{0, 1}}), f, 0), ConfigError);
  const auto batch = tiny_batch(tiny_config(Variant::kMpPose), 11);
  EXPECT_THROW(model.forward(batch.graph, batch.images), ConfigError);
}

TEST(Forward, ShapesForEveryVariantAndTask) {
  for (Variant v : kAllVariants) {
    for (Task t : {Task::kDepth, Task::kSegmentation}) {
      const ModelConfig cfg = tiny_config(v, t);
      const PerceptionModel model(cfg, 12);
      const auto batch = tiny_batch(cfg, 12);
      const auto out = model.forward(batch.graph, batch.images, batch.poses);
      ASSERT_EQ(out.size(), 3u) << to_string(v);
      const Shape expected = t == Task::kDepth ? Shape{16, 16} : Shape{3, 16, 16};
      for (const Tensor& y : out) EXPECT_EQ(y.shape(), expected) << to_string(v) << " " << to_string(t);
    }
  }
}

TEST(Forward, SingleNodeEqualsBaseline) {
  for (Variant v : kGraphVariants) {
    ModelConfig cfg = tiny_config(v, Task::kDepth, 1);
    const PerceptionModel model(cfg, 13);
    const auto batch = tiny_batch(cfg, 13);
    const auto out = model.forward(CommGraph(1, {}), batch.images, batch.poses);
    EXPECT_EQ(values(out[0]), values(model.baseline_forward(batch.images[0]))) << to_string(v);
  }
}

TEST(Forward, TwoNodeMpMatchesHandAssembledPipeline) {
  const ModelConfig cfg = tiny_config(Variant::kMp, Task::kDepth, 2);
  const PerceptionModel model(cfg, 14);
  const auto batch = tiny_batch(cfg, 14);
  const CommGraph g(2, {{0, 1}});
  const auto out = model.forward(g, batch.images);
  const Tensor h0 = model.encode(batch.images[0]), h1 = model.encode(batch.images[1]);
  EXPECT_EQ(values(out[0]), values(model.decode(h0, h1)));
  EXPECT_EQ(values(out[1]), values(model.decode(h1, h0)));
}

TEST(Forward, PermutationEquivariantBitwise) {
  for (Variant v : kGraphVariants) {
    for (int levels : {1, 2}) {
      ModelConfig cfg = tiny_config(v, Task::kDepth, 4);
      cfg.levels = levels;
      const PerceptionModel model(cfg, 15);
      auto batch = tiny_batch(cfg, 15);
      const CommGraph g(4, {{0, 1}, {0, 2}, {1, 2}, {2, 3}});
      const std::array<int, 4> perm{2, 0, 3, 1};  // node i becomes perm[i]
      std::vector<std::pair<int, int>> edges;
      for (auto [a, b] : g.edges()) edges.emplace_back(perm[a], perm[b]);
      std::vector<Tensor> images(4);
      std::vector<RobotPose> poses(4);
      for (int i = 0; i < 4; ++i) {
        images[perm[i]] = batch.images[i];
        poses[perm[i]] = batch.poses[i];
      }
      const auto a = model.forward(g, batch.images, batch.poses);
      const auto b = model.forward(CommGraph(4, edges), images, poses);
      for (int i = 0; i < 4; ++i) {
        EXPECT_EQ(values(a[i]), values(b[perm[i]])) << to_string(v) << " L=" << levels << " node " << i;
      }
    }
  }
}

TEST(Forward, InformationTravelsAtMostLHops) {
  for (int levels : {1, 2}) {
    ModelConfig cfg = tiny_config(Variant::kMp, Task::kDepth, 5);
    cfg.levels = levels;
    const PerceptionModel model(cfg, 16);
    auto batch = tiny_batch(cfg, 16);
    const CommGraph path(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}});
    const auto before = model.forward(path, batch.images);
    for (int k = 0; k < 5; ++k) {
      auto changed = batch.images;
      changed[k] = Tensor::zeros(changed[k].shape());
      const auto after = model.forward(path, changed);
      for (int i = 0; i < 5; ++i) {
        const bool differs = values(before[i]) != values(after[i]);
        const int d = path.distance(i, k);
        if (d > levels) EXPECT_FALSE(differs) << "L=" << levels << " k=" << k << " i=" << i;
        // Plain averaging on a bipartite path only reaches exactly L hops away.
        if (d == 0 || d == levels) EXPECT_TRUE(differs) << "L=" << levels << " k=" << k << " i=" << i;
      }
    }
  }
}

TEST(Forward, DeterministicForFixedSeed) {
  const ModelConfig cfg = tiny_config(Variant::kMpAtt);
  const PerceptionModel a(cfg, 17), b(cfg, 17);
  const auto batch = tiny_batch(cfg, 17);
  const auto ya = a.forward(batch.graph, batch.images);
  const auto yb = b.forward(batch.graph, batch.images);
  for (std::size_t i = 0; i < ya.size(); ++i) EXPECT_EQ(values(ya[i]), values(yb[i]));
}

TEST(Forward, UnsharedLevelsCreateSeparateParameters) {
  ModelConfig cfg = tiny_config(Variant::kMpPose);
  cfg.levels = 2;
  cfg.share_levels = false;
  const PerceptionModel model(cfg, 18);
  EXPECT_TRUE(model.params().contains("film.l0.fc1.weight"));
  EXPECT_TRUE(model.params().contains("film.l1.fc1.weight"));
  cfg.share_levels = true;
  EXPECT_TRUE(PerceptionModel(cfg, 18).params().contains("film.fc1.weight"));
}

TEST(Forward, GradientReachesEveryParameter) {
  for (Variant v : kAllVariants) {
    for (Task t : {Task::kDepth, Task::kSegmentation}) {
      const ModelConfig cfg = tiny_config(v, t);
      PerceptionModel model(cfg, 19);
      const auto batch = tiny_batch(cfg, 19);
      for (auto& [name, entry] : model.params().entries()) entry.value.set_requires_grad(true);
      model.params().zero_grad();
      Tape tape;
      Tensor loss;
      {
        TapeScope scope(tape);
        loss = testing::batch_loss(model, batch);
      }
      backward(loss, tape);
      for (const auto& [name, entry] : model.params().entries()) {
        const auto g = entry.value.grad();
        const bool any = std::any_of(g.begin(), g.end(), [](double x) { return x != 0.0; });
        EXPECT_TRUE(any) << to_string(v) << " " << to_string(t) << " " << name;
      }
    }
  }
}

TEST(Forward, EndToEndGradientCheck) {
  for (Variant v : kAllVariants) {
    for (Task t : {Task::kDepth, Task::kSegmentation}) {
      const auto r = testing::end_to_end_grad_check(tiny_config(v, t), 20, 12);
      EXPECT_GT(r.checked, 100u);
      EXPECT_LT(r.max_relative_error, 1e-4) << to_string(v) << " " << to_string(t) << " worst in "
                                            << r.worst_tensor;
    }
  }
}

TEST(BaselineMp, OutputsOnePredictionPerAgent) {
  const ModelConfig cfg = tiny_config(Variant::kBaselineMp, Task::kDepth, 4);
  const PerceptionModel model(cfg, 21);
  EXPECT_EQ(model.params().get("encoder.conv0.weight").dim(1), 12);
  const auto batch = tiny_batch(cfg, 21);
  const auto out = model.baseline_mp_forward(batch.images);
  ASSERT_EQ(out.size(), 4u);
  for (const Tensor& y : out) {
    EXPECT_EQ(y.shape(), (Shape{16, 16}));
    EXPECT_GT(*std::min_element(y.data().begin(), y.data().end()), 0.0);
  }
  const std::vector<Tensor> three(batch.images.begin(), batch.images.begin() + 3);
  EXPECT_THROW(model.baseline_mp_forward(three), DimensionError);
  EXPECT_THROW(model.baseline_forward(batch.images[0]), ConfigError);
}

TEST(BaselineMp, SingleAgentHasBaselineArchitecture) {
  const PerceptionModel stacked(tiny_config(Variant::kBaselineMp, Task::kDepth, 1), 22);
  const PerceptionModel single(tiny_config(Variant::kBaseline), 22);
  EXPECT_EQ(stacked.params().names(), single.params().names());
  std::mt19937_64 gen(22);
  const Tensor x = random_tensor({3, 16, 16}, gen, 0, 1);
  EXPECT_EQ(values(stacked.baseline_mp_forward(std::vector<Tensor>{x})[0]), values(single.baseline_forward(x)));
}

TEST(BaselineMp, InputOrderIsBakedIntoChannels) {
  const ModelConfig cfg = tiny_config(Variant::kBaselineMp, Task::kDepth, 3);
  const PerceptionModel model(cfg, 23);
  const auto batch = tiny_batch(cfg, 23);
  const auto a = model.baseline_mp_forward(batch.images);
  const std::vector<Tensor> swapped{batch.images[1], batch.images[0], batch.images[2]};
  const auto b = model.baseline_mp_forward(swapped);
  EXPECT_NE(values(a[0]), values(b[1]));
}

TEST(Checkpoint, RoundTripRestoresOutputsBitwise) {
  const ModelConfig cfg = tiny_config(Variant::kMpAtt);
  const PerceptionModel trained(cfg, 24);
  const std::string path = temp_path("roundtrip.mrcp");
  save_checkpoint(trained.params(), path);
  PerceptionModel fresh(cfg, 99);
  load_checkpoint(fresh.params(), path);
  const auto batch = tiny_batch(cfg, 24);
  const auto a = trained.forward(batch.graph, batch.images);
  const auto b = fresh.forward(batch.graph, batch.images);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(values(a[i]), values(b[i]));
  std::remove(path.c_str());
}

TEST(Checkpoint, CorruptedAndTruncatedFilesAreRejected) {
  const ModelConfig cfg = tiny_config(Variant::kMp);
  const PerceptionModel model(cfg, 25);
  const std::string path = temp_path("corrupt.mrcp");
  save_checkpoint(model.params(), path);
  const auto size = std::filesystem::file_size(path);
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(static_cast<std::streamoff>(size / 2));
    f.put('\x5a');
  }
  EXPECT_THROW(read_checkpoint(path), FormatError);
  save_checkpoint(model.params(), path);
  std::filesystem::resize_file(path, size - 9);
  EXPECT_THROW(read_checkpoint(path), FormatError);
  EXPECT_THROW(read_checkpoint(temp_path("missing.mrcp")), FormatError);
  std::remove(path.c_str());
}

TEST(Checkpoint, ArchitectureMismatchIsConfigError) {
  const std::string path = temp_path("mismatch.mrcp");
  save_checkpoint(PerceptionModel(tiny_config(Variant::kMp), 26).params(), path);
  PerceptionModel att(tiny_config(Variant::kMpAtt), 26);
  EXPECT_THROW(load_checkpoint(att.params(), path), ConfigError);
  ModelConfig wide = tiny_config(Variant::kMp);
  wide.channels = 16;
  PerceptionModel other(wide, 26);
  EXPECT_THROW(load_checkpoint(other.params(), path), ConfigError);
  std::remove(path.c_str());
}

}  // namespace
}  // namespace mrcp
