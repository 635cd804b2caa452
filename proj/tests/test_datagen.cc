// Copyright 2026 The mrcp Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "mrcp/dataset.h"
#include "mrcp/errors.h"
#include "mrcp/noise.h"
#include "mrcp/scene.h"
#include "test_util.h"

namespace mrcp {
namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("mrcp_test_" + name)).string();
}

// Camera on the -z axis looking along +z at the origin.
RobotPose camera_below(double distance) {
  RobotPose p;
  p.position = Vec3(0, 0, -distance);
  p.rotation.col(0) = Vec3::UnitZ();
  p.rotation.col(1) = Vec3::UnitY();
  p.rotation.col(2) = Vec3(-1, 0, 0);
  return p;
}

SceneSpec single_sphere(double radius) {
  SceneSpec scene;
  scene.ground_height = std::nullopt;
  scene.objects.push_back(Primitive::sphere(Vec3::Zero(), radius, kClassSphere, Vec3(0.8, 0.2, 0.2)));
  return scene;
}

CameraIntrinsics square_camera(int size) {
  CameraIntrinsics cam;
  cam.width = cam.height = size;
  return cam;
}

Tensor constant_image(double v, int size = 64) { return Tensor::full({3, size, size}, v); }

std::pair<double, double> mean_std(const Tensor& t) {
  double m = 0, s = 0;
  for (double v : t.data()) m += v;
  m /= static_cast<double>(t.numel());
  for (double v : t.data()) s += (v - m) * (v - m);
  return {m, std::sqrt(s / static_cast<double>(t.numel()))};
}

TEST(Render, SphereCenterDepthAndClass) {
  const double d = 7.0, r = 1.5;
  const CameraIntrinsics cam = square_camera(33);
  const FrameSample f = render_views(single_sphere(r), {camera_below(d)}, cam);
  const std::size_t center = 16 * 33 + 16;
  // d - r is exact in single precision, so the stored value must match it.
  EXPECT_EQ(f.agents[0].depth[center], static_cast<float>(d - r));
  EXPECT_EQ(f.agents[0].seg[center], kClassSphere);
}

TEST(Render, EmptySceneIsAllBackground) {
  SceneSpec scene;
  scene.ground_height = std::nullopt;
  const FrameSample f = render_views(scene, {camera_below(3.0)}, square_camera(16));
  for (std::size_t i = 0; i < 256; ++i) {
    EXPECT_EQ(f.agents[0].seg[i], kClassBackground);
    EXPECT_EQ(f.agents[0].depth[i], static_cast<float>(scene.max_depth));
  }
}

TEST(Render, SphereCoverageMatchesProjectedSolidAngle) {
  const double d = 8.0, r = 2.0;
  const CameraIntrinsics cam = square_camera(128);
  const FrameSample f = render_views(single_sphere(r), {camera_below(d)}, cam);
  const auto covered = std::count(f.agents[0].seg.begin(), f.agents[0].seg.end(), kClassSphere);
  const double disc = cam.fx() * std::tan(std::asin(r / d));
  const double expected = std::numbers::pi * disc * disc / (128.0 * 128.0);
  const double measured = static_cast<double>(covered) / (128.0 * 128.0);
  EXPECT_NEAR(measured / expected, 1.0, 0.02);
}

TEST(Render, DepthConsistentWithSegmentation) {
  Rng rng(5);
  const SceneSpec scene = random_scene(rng);
  const auto poses = formation_preset(FormationPreset::kCircleInward, 3, 4.0, 4.0, 1);
  const FrameSample f = render_views(scene, poses, square_camera(32));
  for (const AgentView& v : f.agents) {
    for (std::size_t i = 0; i < v.seg.size(); ++i) {
      EXPECT_LT(v.seg[i], scene.class_count);
      EXPECT_GT(v.depth[i], 0.0f);
      if (v.seg[i] == scene.background_class) {
        EXPECT_EQ(v.depth[i], static_cast<float>(scene.max_depth));
      } else {
        EXPECT_LT(v.depth[i], scene.max_depth);
      }
    }
    for (float c : v.rgb) {
      EXPECT_GE(c, 0.0f);
      EXPECT_LE(c, 1.0f);
    }
  }
}

TEST(Render, DeterministicAndRejectsBadIntrinsics) {
  Rng rng(6);
  const SceneSpec scene = random_scene(rng);
  const auto poses = formation_preset(FormationPreset::kCircleInward, 2, 4.0, 4.0, 1);
  const FrameSample a = render_views(scene, poses, square_camera(16));
  const FrameSample b = render_views(scene, poses, square_camera(16));
  EXPECT_EQ(a.agents[1].rgb, b.agents[1].rgb);
  EXPECT_EQ(a.agents[1].depth, b.agents[1].depth);
  CameraIntrinsics bad = square_camera(16);
  bad.hfov = std::numbers::pi;
  EXPECT_THROW(render_views(scene, poses, bad), InputError);
}

TEST(Formation, InwardAxesPassThroughCenter) {
  const auto poses = formation_preset(FormationPreset::kCircleInward, 5, 4.0, 3.0, 1);
  for (const RobotPose& p : poses) {
    const Vec3 to_center = -p.position;
    EXPECT_LT(to_center.cross(p.optical_axis()).norm(), 1e-9);
    EXPECT_GT(to_center.dot(p.optical_axis()), 0.0);
    EXPECT_NEAR(p.position.z(), 3.0, 1e-12);
  }
}

TEST(Formation, OutwardAxesPointAway) {
  const auto poses = formation_preset(FormationPreset::kCircleOutward, 5, 4.0, 4.0, 1);
  for (const RobotPose& p : poses) EXPECT_GT(p.optical_axis().dot(p.position), 0.0);
}

TEST(Formation, EquallySpacedOnCircle) {
  const auto poses = formation_preset(FormationPreset::kCircleOutward, 6, 5.0, 2.0, 1);
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const Vec3& a = poses[i].position;
    const Vec3& b = poses[(i + 1) % poses.size()].position;
    EXPECT_NEAR(a.head<2>().norm(), 5.0, 1e-12);
    EXPECT_NEAR((a - b).norm(), 5.0, 1e-12);  // hexagon side equals radius
  }
}

TEST(Formation, PoseVariedIsSeededAndBounded) {
  const auto a = formation_preset(FormationPreset::kPoseVaried, 5, 4.0, 4.0, 3);
  const auto b = formation_preset(FormationPreset::kPoseVaried, 5, 4.0, 4.0, 3);
  const auto c = formation_preset(FormationPreset::kPoseVaried, 5, 4.0, 4.0, 4);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].position, b[i].position);
    EXPECT_GE(a[i].position.z(), 3.0);
    EXPECT_LE(a[i].position.z(), 5.0);
    EXPECT_NO_THROW(a[i].validate());
    differs = differs || a[i].position != c[i].position;
  }
  EXPECT_TRUE(differs);
  EXPECT_THROW(formation_preset(FormationPreset::kCircleInward, 1, 4.0, 4.0, 1), InputError);
  EXPECT_EQ(parse_formation(to_string(FormationPreset::kPoseVaried)), FormationPreset::kPoseVaried);
}

TEST(Noise, GaussianStatistics) {
  NoiseSpec spec;
  spec.gaussian_sigma = 0.1;
  Rng rng(7);
  const auto [m, s] = mean_std(corrupt(constant_image(0.5), NoiseKind::kGaussian, spec, rng));
  EXPECT_NEAR(m, 0.5, 0.02);
  EXPECT_NEAR(s, 0.1, 0.01);
}

TEST(Noise, ZeroSigmaLeavesImageUnchanged) {
  NoiseSpec spec;
  spec.gaussian_sigma = 0.0;
  Rng rng(8);
  std::mt19937_64 gen(8);
  const Tensor img = testing::random_tensor({3, 16, 16}, gen, 0, 1);
  EXPECT_EQ(testing::values(corrupt(img, NoiseKind::kGaussian, spec, rng)), testing::values(img));
}

TEST(Noise, ImpulseWithCertainFlipIsBinary) {
  NoiseSpec spec;
  spec.impulse_probability = 1.0;
  Rng rng(9);
  const Tensor out = corrupt(constant_image(0.37, 32), NoiseKind::kImpulse, spec, rng);
  for (double v : out.data()) EXPECT_TRUE(v == 0.0 || v == 1.0);
}

TEST(Noise, EveryKindStaysInUnitRange) {
  std::mt19937_64 gen(10);
  const Tensor img = testing::random_tensor({3, 32, 32}, gen, 0, 1);
  const NoiseSpec spec;
  for (NoiseKind k : {NoiseKind::kGaussian, NoiseKind::kShot, NoiseKind::kImpulse, NoiseKind::kGaussianBlur,
                      NoiseKind::kMotionBlur, NoiseKind::kSevere}) {
    Rng rng(10);
    const Tensor out = corrupt(img, k, spec, rng);
    EXPECT_EQ(out.shape(), img.shape());
    for (double v : out.data()) {
      EXPECT_GE(v, 0.0) << to_string(k);
      EXPECT_LE(v, 1.0) << to_string(k);
    }
    EXPECT_NE(testing::values(out), testing::values(img)) << to_string(k);
  }
}

TEST(Noise, ShotNoiseScalesWithIntensity) {
  NoiseSpec spec;
  spec.shot_scale = 50.0;
  Rng rng(11);
  const auto [m, s] = mean_std(corrupt(constant_image(0.5), NoiseKind::kShot, spec, rng));
  EXPECT_NEAR(m, 0.5, 0.02);
  EXPECT_NEAR(s, std::sqrt(0.5 / 50.0), 0.01);
}

TEST(Noise, BlursPreserveConstantImages) {
  const Tensor img = constant_image(0.42, 16);
  for (double v : testing::values(gaussian_blur(img, 9))) EXPECT_NEAR(v, 0.42, 1e-14);
  for (double v : testing::values(motion_blur(img, 7, 0.6))) EXPECT_NEAR(v, 0.42, 1e-14);
  std::mt19937_64 gen(12);
  const Tensor r = testing::random_tensor({3, 8, 8}, gen, 0, 1);
  EXPECT_EQ(testing::values(gaussian_blur(r, 1)), testing::values(r));
}

TEST(Noise, CorruptionTouchesOnlySelectedCameras) {
  std::mt19937_64 gen(13);
  std::vector<Tensor> clean;
  for (int i = 0; i < 5; ++i) clean.push_back(testing::random_tensor({3, 16, 16}, gen, 0, 1));
  for (CameraSelection sel : {CameraSelection::kFirst, CameraSelection::kRandom}) {
    NoiseSpec spec;
    spec.n_corrupt = 2;
    spec.selection = sel;
    std::vector<Tensor> images = clean;
    Rng rng(14);
    const std::vector<int> hit = corrupt_cameras(images, spec, rng);
    ASSERT_EQ(hit.size(), 2u);
    EXPECT_TRUE(std::is_sorted(hit.begin(), hit.end()));
    if (sel == CameraSelection::kFirst) EXPECT_EQ(hit, (std::vector<int>{0, 1}));
    for (int i = 0; i < 5; ++i) {
      const bool selected = std::find(hit.begin(), hit.end(), i) != hit.end();
      EXPECT_EQ(testing::values(images[i]) != testing::values(clean[i]), selected) << i;
    }
  }
  NoiseSpec too_many;
  too_many.n_corrupt = 6;
  std::vector<Tensor> images = clean;
  Rng rng(15);
  EXPECT_THROW(corrupt_cameras(images, too_many, rng), ConfigError);
}

TEST(Noise, SameSeedSameCorruption) {
  const Tensor img = constant_image(0.5, 16);
  const NoiseSpec spec;
  Rng a(16), b(16);
  EXPECT_EQ(testing::values(corrupt(img, NoiseKind::kSevere, spec, a)),
            testing::values(corrupt(img, NoiseKind::kSevere, spec, b)));
}

TEST(NoiseSpec, DescribeParseRoundTrip) {
  NoiseSpec spec;
  spec.kinds = {NoiseKind::kGaussian, NoiseKind::kMotionBlur};
  spec.gaussian_sigma = 0.07;
  spec.severe_min_kernel = 3;
  spec.severe_max_kernel = 31;
  spec.n_corrupt = 2;
  spec.selection = CameraSelection::kRandom;
  const NoiseSpec back = NoiseSpec::parse(spec.describe());
  EXPECT_EQ(back.describe(), spec.describe());
  EXPECT_EQ(back.gaussian_sigma, 0.07);
  EXPECT_THROW(NoiseSpec::parse("kinds=snow"), ConfigError);
  EXPECT_THROW(NoiseSpec::parse("sigma=abc"), ConfigError);
  EXPECT_THROW(NoiseSpec::parse("color=red"), ConfigError);
}

TEST(NoiseSpec, ValidationRejectsBadRanges) {
  NoiseSpec spec;
  spec.impulse_probability = 1.5;
  EXPECT_THROW(spec.validate(), ConfigError);
  spec = NoiseSpec{};
  spec.kinds.clear();
  EXPECT_THROW(spec.validate(), ConfigError);
  spec = NoiseSpec{};
  spec.severe_max_kernel = 0;
  EXPECT_THROW(spec.validate(), ConfigError);
}

DatasetSpec small_spec() {
  DatasetSpec spec;
  spec.frames = 3;
  spec.agents = 3;
  spec.intrinsics = square_camera(16);
  spec.seed = 21;
  return spec;
}

void expect_same(const Dataset& a, const Dataset& b) {
  ASSERT_EQ(a.frames.size(), b.frames.size());
  for (std::size_t f = 0; f < a.frames.size(); ++f) {
    ASSERT_EQ(a.frames[f].agents.size(), b.frames[f].agents.size());
    for (std::size_t i = 0; i < a.frames[f].agents.size(); ++i) {
      const AgentView& x = a.frames[f].agents[i];
      const AgentView& y = b.frames[f].agents[i];
      EXPECT_EQ(x.pose.position, y.pose.position);
      EXPECT_EQ(x.pose.rotation, y.pose.rotation);
      EXPECT_EQ(x.rgb, y.rgb);
      EXPECT_EQ(x.depth, y.depth);
      EXPECT_EQ(x.seg, y.seg);
    }
  }
}

TEST(Dataset, WriteReadRoundTripIsBitExact) {
  const Dataset ds = generate_dataset(small_spec());
  const std::string path = temp_path("roundtrip.mrcpdata");
  const DatasetManifest m = write_dataset(ds, path);
  EXPECT_EQ(m.frame_count, 3u);
  ASSERT_EQ(m.frame_offsets.size(), 3u);
  EXPECT_TRUE(std::is_sorted(m.frame_offsets.begin(), m.frame_offsets.end()));
  EXPECT_LT(m.frame_offsets[0], m.frame_offsets[1]);
  const Dataset back = read_dataset(path);
  expect_same(ds, back);
  EXPECT_EQ(back.manifest.preset, "circle_inward");
  EXPECT_EQ(back.manifest.noise, ds.manifest.noise);
  const DatasetManifest side = read_manifest_sidecar(path);
  EXPECT_EQ(side.frame_count, 3u);
  EXPECT_EQ(side.frame_offsets, m.frame_offsets);
  std::filesystem::remove(path);
  std::filesystem::remove(path + ".manifest");
}

TEST(Dataset, TruncatedOrCorruptFilesAreFormatErrors) {
  const Dataset ds = generate_dataset(small_spec());
  const std::string path = temp_path("truncated.mrcpdata");
  write_dataset(ds, path);
  const auto size = std::filesystem::file_size(path);
  std::filesystem::resize_file(path, size - 100);
  EXPECT_THROW(read_dataset(path), FormatError);
  std::filesystem::resize_file(path, 6);
  EXPECT_THROW(read_dataset(path), FormatError);
  write_dataset(ds, path);
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.put('X');
  }
  try {
    read_dataset(path);
    FAIL() << "bad magic accepted";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("magic"), std::string::npos);
  }
  std::filesystem::remove(path);
  std::filesystem::remove(path + ".manifest");
}

TEST(Dataset, GenerationIsDeterministicPerSeed) {
  const Dataset a = generate_dataset(small_spec());
  const Dataset b = generate_dataset(small_spec());
  expect_same(a, b);
  DatasetSpec other = small_spec();
  other.seed = 22;
  EXPECT_NE(generate_dataset(other).frames[0].agents[0].rgb, a.frames[0].agents[0].rgb);
}

TEST(Dataset, StoredPosesAreUsableRotations) {
  const Dataset ds = generate_dataset(small_spec());
  for (const FrameSample& f : ds.frames) {
    for (const AgentView& v : f.agents) {
      EXPECT_EQ(v.pose.position.cast<float>().cast<double>(), v.pose.position);
      EXPECT_NO_THROW(usable_pose(v.pose).validate());
    }
  }
}

}  // namespace
}  // namespace mrcp
