// Copyright 2026 The mrcp Authors
// SPDX-License-Identifier: Apache-2.0

#include "mrcp/scene.h"

#include <Eigen/Geometry>
#include <cmath>
#include <limits>
#include <numbers>

#include "mrcp/errors.h"

namespace mrcp {
namespace {

constexpr double kHitEpsilon = 1e-9;
constexpr double kNoHit = std::numeric_limits<double>::infinity();

struct Hit {
  double t = kNoHit;
  Vec3 normal = Vec3::UnitZ();
  int class_id = 0;
  Vec3 color = Vec3::Zero();
};

// Nearest positive root of |o + t d - c|^2 = r^2 for unit d.
double intersect_sphere(const Vec3& o, const Vec3& d, const Vec3& c, double r) {
  const Vec3 oc = o - c;
  const double b = oc.dot(d);
  const double disc = b * b - (oc.squaredNorm() - r * r);
  if (disc < 0.0) return kNoHit;
  const double s = std::sqrt(disc);
  const double t0 = -b - s;
  if (t0 > kHitEpsilon) return t0;
  const double t1 = -b + s;
  return t1 > kHitEpsilon ? t1 : kNoHit;
}

double intersect_box(const Vec3& o, const Vec3& d, const Vec3& lo, const Vec3& hi, Vec3& normal) {
  double t_near = -kNoHit;
  double t_far = kNoHit;
  int axis_near = 0;
  double sign_near = -1.0;
  for (int a = 0; a < 3; ++a) {
    if (d[a] == 0.0) {
      if (o[a] < lo[a] || o[a] > hi[a]) return kNoHit;
      continue;
    }
    double t0 = (lo[a] - o[a]) / d[a];
    double t1 = (hi[a] - o[a]) / d[a];
    double sign = -1.0;
    if (t0 > t1) {
      std::swap(t0, t1);
      sign = 1.0;
    }
    if (t0 > t_near) {
      t_near = t0;
      axis_near = a;
      sign_near = sign;
    }
    t_far = std::min(t_far, t1);
  }
  if (t_near > t_far || t_far <= kHitEpsilon) return kNoHit;
  if (t_near <= kHitEpsilon) return kNoHit;  // camera inside the box
  normal = Vec3::Zero();
  normal[axis_near] = sign_near;
  return t_near;
}

Hit trace(const SceneSpec& scene, const Vec3& o, const Vec3& d) {
  Hit best;
  for (const Primitive& p : scene.objects) {
    double t = kNoHit;
    Vec3 n;
    if (p.kind == Primitive::Kind::kSphere) {
      t = intersect_sphere(o, d, p.center, p.radius);
      if (t < best.t) n = (o + t * d - p.center) / p.radius;
    } else {
      t = intersect_box(o, d, p.lo, p.hi, n);
    }
    if (t < best.t) best = {t, n, p.class_id, p.color};
  }
  if (scene.ground_height && d.z() != 0.0) {
    const double t = (*scene.ground_height - o.z()) / d.z();
    if (t > kHitEpsilon && t < best.t) best = {t, Vec3::UnitZ(), scene.ground_class, scene.ground_color};
  }
  return best;
}

}  // namespace

Primitive Primitive::sphere(const Vec3& center, double radius, int class_id, const Vec3& color) {
  Primitive p;
  p.kind = Kind::kSphere;
  p.center = center;
  p.radius = radius;
  p.class_id = class_id;
  p.color = color;
  return p;
}

Primitive Primitive::box(const Vec3& lo, const Vec3& hi, int class_id, const Vec3& color) {
  Primitive p;
  p.kind = Kind::kBox;
  p.lo = lo;
  p.hi = hi;
  p.class_id = class_id;
  p.color = color;
  return p;
}

void SceneSpec::validate() const {
  auto check_class = [&](int c, const char* what) {
    if (c < 0 || c >= class_count) {
      throw InputError(std::string(what) + " class " + std::to_string(c) + " outside [0," +
                       std::to_string(class_count) + ")");
    }
  };
  if (class_count < 1 || class_count > 65535) throw InputError("scene class count out of range");
  if (!(max_depth > 0.0) || !std::isfinite(max_depth)) throw InputError("scene max_depth must be positive");
  check_class(background_class, "background");
  check_class(ground_class, "ground");
  if (ground_height && !std::isfinite(*ground_height)) throw InputError("ground height must be finite");
  if (!(light_direction.norm() > 0.0)) throw InputError("light direction must be non-zero");
  for (const Primitive& p : objects) {
    check_class(p.class_id, "object");
    if (p.kind == Primitive::Kind::kSphere) {
      if (!(p.radius > 0.0) || !p.center.allFinite()) throw InputError("sphere needs a finite center and positive radius");
    } else if (!(p.lo.array() < p.hi.array()).all()) {
      throw InputError("box needs lo < hi on every axis");
    }
  }
}

FrameSample render_views(const SceneSpec& scene, const std::vector<RobotPose>& poses,
                         const CameraIntrinsics& intrinsics) {
  intrinsics.validate();
  scene.validate();
  const int w = intrinsics.width;
  const int h = intrinsics.height;
  const std::size_t plane = static_cast<std::size_t>(w) * h;
  const Vec3 light = scene.light_direction.normalized();

  FrameSample frame;
  for (const RobotPose& pose : poses) {
    pose.validate();
    AgentView view;
    view.pose = pose;
    view.rgb.resize(3 * plane);
    view.depth.resize(plane);
    view.seg.resize(plane);
    for (int v = 0; v < h; ++v) {
      for (int u = 0; u < w; ++u) {
        const Vec3 dir = (pose.rotation * intrinsics.ray(u + 0.5, v + 0.5)).normalized();
        const Hit hit = trace(scene, pose.position, dir);
        const std::size_t i = static_cast<std::size_t>(v) * w + u;
        Vec3 color;
        if (hit.t <= scene.max_depth) {
          const double lambert = std::max(0.0, hit.normal.dot(light));
          color = hit.color * (scene.ambient + (1.0 - scene.ambient) * lambert);
          view.depth[i] = static_cast<float>(hit.t);
          view.seg[i] = static_cast<std::uint16_t>(hit.class_id);
        } else {
          color = scene.background_color;
          view.depth[i] = static_cast<float>(scene.max_depth);
          view.seg[i] = static_cast<std::uint16_t>(scene.background_class);
        }
        for (int c = 0; c < 3; ++c) view.rgb[c * plane + i] = static_cast<float>(std::clamp(color[c], 0.0, 1.0));
      }
    }
    frame.agents.push_back(std::move(view));
  }
  return frame;
}

SceneSpec random_scene(Rng& rng, const SceneGenConfig& cfg) {
  if (cfg.min_objects < 0 || cfg.max_objects < cfg.min_objects) throw InputError("random_scene: bad object count range");
  SceneSpec scene;
  scene.max_depth = cfg.max_depth;
  scene.class_count = kSceneClassCount;
  const double g = rng.uniform(0.3, 0.55);
  scene.ground_color = Vec3(g, g * rng.uniform(0.85, 1.0), g * rng.uniform(0.75, 0.95));
  const int count = rng.uniform_int(cfg.min_objects, cfg.max_objects);
  for (int k = 0; k < count; ++k) {
    const double r = cfg.area_radius * std::sqrt(rng.uniform());
    const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const Vec3 base(r * std::cos(phi), r * std::sin(phi), 0.0);
    const Vec3 color(rng.uniform(0.2, 1.0), rng.uniform(0.2, 1.0), rng.uniform(0.2, 1.0));
    if (rng.uniform() < 0.5) {
      const double radius = rng.uniform(0.4, 1.2);
      scene.objects.push_back(Primitive::sphere(base + Vec3(0, 0, radius), radius, kClassSphere, color));
    } else {
      const Vec3 half(rng.uniform(0.25, 0.8), rng.uniform(0.25, 0.8), 0.0);
      const double height = rng.uniform(0.5, 2.5);
      scene.objects.push_back(Primitive::box(base - half, base + half + Vec3(0, 0, height), kClassBox, color));
    }
  }
  return scene;
}

std::string to_string(FormationPreset p) {
  switch (p) {
    case FormationPreset::kCircleInward: return "circle_inward";
    case FormationPreset::kCircleOutward: return "circle_outward";
    case FormationPreset::kPoseVaried: return "pose_varied";
  }
  return "?";
}

FormationPreset parse_formation(const std::string& name) {
  for (auto p : {FormationPreset::kCircleInward, FormationPreset::kCircleOutward, FormationPreset::kPoseVaried}) {
    if (to_string(p) == name) return p;
  }
  throw ConfigError("unknown formation preset '" + name + "' (expected circle_inward, circle_outward, pose_varied)");
}

std::vector<RobotPose> formation_preset(FormationPreset preset, int agents, double radius, double altitude,
                                        std::uint64_t seed) {
  if (agents < 2) throw InputError("formation_preset: need at least 2 agents");
  if (!(radius > 0.0) || !(altitude > 0.0)) throw InputError("formation_preset: radius and altitude must be positive");
  Rng rng(seed);
  const double inward_pitch = std::atan2(altitude, radius);
  std::vector<RobotPose> poses;
  for (int i = 0; i < agents; ++i) {
    const double phi = 2.0 * std::numbers::pi * i / agents;
    const Vec3 radial(std::cos(phi), std::sin(phi), 0.0);
    RobotPose pose;
    pose.position = radius * radial + Vec3(0, 0, altitude);
    switch (preset) {
      case FormationPreset::kCircleInward:
        pose.rotation = look_rotation(-pose.position);
        break;
      case FormationPreset::kCircleOutward: {
        const double pitch = 0.75 * inward_pitch;
        pose.rotation = look_rotation(std::cos(pitch) * radial - std::sin(pitch) * Vec3::UnitZ());
        break;
      }
      case FormationPreset::kPoseVaried: {
        pose.position.z() = altitude * rng.uniform(0.75, 1.25);
        const double yaw = rng.uniform(-0.35, 0.35);
        const Vec3 forward = Eigen::AngleAxisd(yaw, Vec3::UnitZ()) * (-pose.position);
        pose.rotation = look_rotation(forward);
        break;
      }
    }
    poses.push_back(pose);
  }
  return poses;
}

std::vector<RobotPose> rotate_formation(const std::vector<RobotPose>& poses, double yaw) {
  const Mat3 r = Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
  std::vector<RobotPose> out;
  out.reserve(poses.size());
  for (const RobotPose& p : poses) out.push_back({r * p.position, r * p.rotation});
  return out;
}

}  // namespace mrcp
