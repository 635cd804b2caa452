// Copyright 2026 The mrcp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Ray-cast rendering of simple synthetic scenes and robot formations.
//
// Depth is the distance along the viewing ray, not the z coordinate. Pixels
// whose first hit lies beyond max_depth, or that hit nothing, are background.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mrcp/geometry.h"
#include "mrcp/rng.h"

namespace mrcp {

struct Primitive {
  enum class Kind { kSphere, kBox };
  Kind kind = Kind::kSphere;
  Vec3 center = Vec3::Zero();  // sphere
  double radius = 1.0;         // sphere
  Vec3 lo = Vec3::Zero();      // box
  Vec3 hi = Vec3::Ones();      // box
  int class_id = 2;
  Vec3 color = Vec3::Constant(0.7);

  static Primitive sphere(const Vec3& center, double radius, int class_id, const Vec3& color);
  static Primitive box(const Vec3& lo, const Vec3& hi, int class_id, const Vec3& color);
};

struct SceneSpec {
  std::vector<Primitive> objects;
  std::optional<double> ground_height = 0.0;
  int ground_class = 1;
  Vec3 ground_color = Vec3(0.45, 0.42, 0.38);
  int background_class = 0;
  Vec3 background_color = Vec3(0.62, 0.74, 0.88);
  int class_count = 4;
  double max_depth = 20.0;
  Vec3 light_direction = Vec3(0.4, 0.3, 1.0);  // towards the light
  double ambient = 0.25;

  // Throws InputError on invalid class ids, primitives or depth range.
  void validate() const;
};

// Classes used by random_scene.
inline constexpr int kClassBackground = 0;
inline constexpr int kClassGround = 1;
inline constexpr int kClassSphere = 2;
inline constexpr int kClassBox = 3;
inline constexpr int kSceneClassCount = 4;

struct AgentView {
  RobotPose pose;
  std::vector<float> rgb;           // 3 x H x W in [0, 1]
  std::vector<float> depth;         // H x W metres, in (0, max_depth]
  std::vector<std::uint16_t> seg;   // H x W class ids
};

struct FrameSample {
  std::vector<AgentView> agents;
};

FrameSample render_views(const SceneSpec& scene, const std::vector<RobotPose>& poses,
                         const CameraIntrinsics& intrinsics);

struct SceneGenConfig {
  double area_radius = 10.0;
  int min_objects = 8;
  int max_objects = 14;
  double max_depth = 20.0;
};

// Spheres and boxes resting on the ground inside a disk around the origin.
SceneSpec random_scene(Rng& rng, const SceneGenConfig& cfg = {});

enum class FormationPreset { kCircleInward, kCircleOutward, kPoseVaried };

std::string to_string(FormationPreset p);
FormationPreset parse_formation(const std::string& name);

// Robots equally spaced on a circle of `radius` at `altitude` above the
// formation center, which sits on the ground at the origin. Inward cameras
// look at the center; outward cameras look radially away from it, pitched
// down by three quarters of the inward pitch. pose_varied starts from the
// inward layout and perturbs altitude and yaw per robot using `seed`.
std::vector<RobotPose> formation_preset(FormationPreset preset, int agents, double radius,
                                        double altitude, std::uint64_t seed);

// Rotates every pose about the vertical axis through the origin.
std::vector<RobotPose> rotate_formation(const std::vector<RobotPose>& poses, double yaw);

}  // namespace mrcp
