// Copyright 2026 The mrcp Authors
// SPDX-License-Identifier: Apache-2.0

#include "mrcp/geometry.h"

#include <Eigen/Geometry>
#include <Eigen/SVD>
#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <queue>
#include <string>

#include "mrcp/errors.h"

namespace mrcp {

void RobotPose::validate() const {
  if (!position.allFinite()) throw InputError("robot pose has a non-finite position");
  if (!rotation.allFinite()) throw InputError("robot pose has a non-finite rotation");
  const double ortho = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (ortho > 1e-9 || std::abs(rotation.determinant() - 1.0) > 1e-9) {
    throw InputError("robot pose rotation is not a proper rotation matrix");
  }
}

RelativePose relative_pose(const RobotPose& pose_i, const RobotPose& pose_j) {
  RelativePose rel;
  rel.rotation = pose_i.rotation.transpose() * pose_j.rotation;
  rel.translation = pose_i.rotation.transpose() * (pose_j.position - pose_i.position);
  return rel;
}

Mat3 look_rotation(const Vec3& forward) {
  const Vec3 x = forward.normalized();
  Vec3 y = Vec3::UnitZ().cross(x);
  if (y.norm() < 1e-12) throw GeometryError("look_rotation: forward axis is vertical");
  y.normalize();
  const Vec3 z = x.cross(y);
  Mat3 r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = z;
  return r;
}

Mat3 nearest_rotation(const Mat3& m) {
  if (!m.allFinite()) throw GeometryError("nearest_rotation: non-finite matrix");
  const Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0 ? -1.0 : 1.0;
  return svd.matrixU() * d * svd.matrixV().transpose();
}

CommGraph::CommGraph(int node_count, std::vector<std::pair<int, int>> edges)
    : node_count_(node_count), neighbors_(static_cast<std::size_t>(node_count)) {
  if (node_count < 0) throw InputError("graph node count must be non-negative");
  for (auto& [a, b] : edges) {
    if (a < 0 || b < 0 || a >= node_count || b >= node_count) {
      throw InputError("edge (" + std::to_string(a) + ", " + std::to_string(b) + ") out of range");
    }
    if (a == b) throw InputError("self-loop on node " + std::to_string(a));
    if (a > b) std::swap(a, b);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);
  for (const auto& [a, b] : edges_) {
    neighbors_[static_cast<std::size_t>(a)].push_back(b);
    neighbors_[static_cast<std::size_t>(b)].push_back(a);
  }
  for (auto& list : neighbors_) std::sort(list.begin(), list.end());
}

CommGraph CommGraph::complete(int node_count) {
  std::vector<std::pair<int, int>> edges;
  for (int a = 0; a < node_count; ++a)
    for (int b = a + 1; b < node_count; ++b) edges.emplace_back(a, b);
  return CommGraph(node_count, std::move(edges));
}

bool CommGraph::has_edge(int a, int b) const {
  if (a > b) std::swap(a, b);
  return std::binary_search(edges_.begin(), edges_.end(), std::make_pair(a, b));
}

int CommGraph::distance(int from, int to) const {
  std::vector<int> dist(static_cast<std::size_t>(node_count_), -1);
  std::queue<int> frontier;
  dist[static_cast<std::size_t>(from)] = 0;
  frontier.push(from);
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (int v : neighbors(u)) {
      if (dist[static_cast<std::size_t>(v)] < 0) {
        dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
        frontier.push(v);
      }
    }
  }
  return dist.at(static_cast<std::size_t>(to));
}

CommGraph build_graph(std::span<const RobotPose> poses, double distance_threshold) {
  if (poses.empty()) throw InputError("build_graph: no poses");
  if (!(distance_threshold > 0.0)) throw InputError("build_graph: threshold must be positive");
  for (const auto& p : poses) {
    if (!p.position.allFinite()) throw InputError("build_graph: non-finite robot position");
  }
  std::vector<std::pair<int, int>> edges;
  const int n = static_cast<int>(poses.size());
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      const double d = (poses[static_cast<std::size_t>(a)].position - poses[static_cast<std::size_t>(b)].position).norm();
      if (d <= distance_threshold) edges.emplace_back(a, b);
    }
  return CommGraph(n, std::move(edges));
}

void CameraIntrinsics::validate() const {
  if (!(hfov > 0.0 && hfov < std::numbers::pi) || !(vfov > 0.0 && vfov < std::numbers::pi)) {
    throw InputError("camera field of view must lie in (0, pi)");
  }
  if (width <= 0 || height <= 0) throw InputError("camera image dimensions must be positive");
}

double CameraIntrinsics::fx() const { return 0.5 * width / std::tan(0.5 * hfov); }
double CameraIntrinsics::fy() const { return 0.5 * height / std::tan(0.5 * vfov); }

Vec3 CameraIntrinsics::ray(double u, double v) const {
  return Vec3(1.0, -(u - 0.5 * width) / fx(), -(v - 0.5 * height) / fy());
}

namespace {

using Quad = std::array<Eigen::Vector2d, 4>;

Quad ground_footprint(const RobotPose& pose, const CameraIntrinsics& cam, double ground) {
  const std::array<Eigen::Vector2d, 4> corners = {
      Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(cam.width, 0.0),
      Eigen::Vector2d(cam.width, cam.height), Eigen::Vector2d(0.0, cam.height)};
  Quad quad;
  for (std::size_t i = 0; i < 4; ++i) {
    const Vec3 dir = pose.rotation * cam.ray(corners[i].x(), corners[i].y());
    const double dz = ground - pose.position.z();
    if (std::abs(dir.z()) < 1e-12 || dz / dir.z() <= 0.0) {
      throw GeometryError("camera frustum does not intersect the ground plane");
    }
    const Vec3 hit = pose.position + (dz / dir.z()) * dir;
    quad[i] = hit.head<2>();
  }
  return quad;
}

bool inside(const Quad& q, double x, double y) {
  int sign = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& a = q[i];
    const auto& b = q[(i + 1) % 4];
    const double cross = (b.x() - a.x()) * (y - a.y()) - (b.y() - a.y()) * (x - a.x());
    const int s = cross > 0.0 ? 1 : (cross < 0.0 ? -1 : 0);
    if (s == 0) continue;
    if (sign == 0) {
      sign = s;
    } else if (s != sign) {
      return false;
    }
  }
  return true;
}

}  // namespace

double fov_overlap_ratio(std::span<const RobotPose> poses, const CameraIntrinsics& intrinsics,
                         double ground_height, double grid_resolution) {
  if (poses.empty()) throw InputError("fov_overlap_ratio: no poses");
  if (!(grid_resolution > 0.0)) throw InputError("fov_overlap_ratio: grid resolution must be positive");
  intrinsics.validate();
  std::vector<Quad> quads;
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& pose : poses) {
    quads.push_back(ground_footprint(pose, intrinsics, ground_height));
    for (const auto& c : quads.back()) {
      xmin = std::min(xmin, c.x());
      xmax = std::max(xmax, c.x());
      ymin = std::min(ymin, c.y());
      ymax = std::max(ymax, c.y());
    }
  }
  const auto nx = static_cast<long>(std::ceil((xmax - xmin) / grid_resolution)) + 1;
  const auto ny = static_cast<long>(std::ceil((ymax - ymin) / grid_resolution)) + 1;
  std::size_t union_cells = 0;
  std::size_t summed_cells = 0;
  for (long iy = 0; iy < ny; ++iy) {
    const double y = ymin + (static_cast<double>(iy) + 0.5) * grid_resolution;
    for (long ix = 0; ix < nx; ++ix) {
      const double x = xmin + (static_cast<double>(ix) + 0.5) * grid_resolution;
      std::size_t hits = 0;
      for (const auto& q : quads) hits += inside(q, x, y) ? 1 : 0;
      summed_cells += hits;
      union_cells += hits > 0 ? 1 : 0;
    }
  }
  if (summed_cells == 0) throw GeometryError("camera footprints are smaller than one grid cell");
  return static_cast<double>(union_cells) / static_cast<double>(summed_cells);
}

double fov_overlap_share(std::span<const RobotPose> poses, const CameraIntrinsics& intrinsics,
                         double ground_height, double grid_resolution) {
  return 1.0 - fov_overlap_ratio(poses, intrinsics, ground_height, grid_resolution);
}

}  // namespace mrcp
