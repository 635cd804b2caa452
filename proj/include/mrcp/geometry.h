// Copyright 2026 The mrcp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Robot poses, the communication graph, relative poses and camera footprints.
//
// Body frame convention: +x is the camera's optical axis, +y points left and
// +z up. RobotPose::rotation maps body coordinates to world coordinates.

#pragma once

#include <Eigen/Core>
#include <span>
#include <utility>
#include <vector>

namespace mrcp {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct RobotPose {
  Vec3 position = Vec3::Zero();
  Mat3 rotation = Mat3::Identity();

  Vec3 optical_axis() const { return rotation.col(0); }
  // Throws InputError unless rotation is orthonormal with det +1 (tol 1e-9)
  // and the position is finite.
  void validate() const;
};

// Pose of robot j expressed in robot i's body frame.
struct RelativePose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
};

RelativePose relative_pose(const RobotPose& pose_i, const RobotPose& pose_j);

// Rotation whose +x axis is `forward` and whose +y axis is horizontal.
Mat3 look_rotation(const Vec3& forward);

// Closest proper rotation in the Frobenius sense, e.g. to repair a rotation
// stored at single precision.
Mat3 nearest_rotation(const Mat3& m);

// Undirected graph over robots; neighbor lists are sorted ascending.
class CommGraph {
 public:
  CommGraph() = default;
  CommGraph(int node_count, std::vector<std::pair<int, int>> edges);

  static CommGraph complete(int node_count);

  int node_count() const { return node_count_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  std::span<const int> neighbors(int node) const { return neighbors_.at(static_cast<std::size_t>(node)); }
  bool has_edge(int a, int b) const;
  std::size_t directed_link_count() const { return 2 * edges_.size(); }
  // Hop count, or -1 when unreachable.
  int distance(int from, int to) const;

 private:
  int node_count_ = 0;
  std::vector<std::pair<int, int>> edges_;  // (lo, hi), sorted
  std::vector<std::vector<int>> neighbors_;
};

// Edge (i, j) iff |p_i - p_j| <= threshold.
CommGraph build_graph(std::span<const RobotPose> poses, double distance_threshold);

struct CameraIntrinsics {
  double hfov = 1.0471975511965976;  // 60 degrees
  double vfov = 1.0471975511965976;
  int width = 64;
  int height = 64;

  void validate() const;
  double fx() const;
  double fy() const;
  // Unnormalized body-frame ray through continuous image coordinates (u, v),
  // origin at the top-left corner.
  Vec3 ray(double u, double v) const;
};

// Ground-plane footprints of every camera rasterized at `grid_resolution`;
// returns area(union) / sum(area). Throws GeometryError if any frustum edge
// ray fails to reach the ground plane.
double fov_overlap_ratio(std::span<const RobotPose> poses, const CameraIntrinsics& intrinsics,
                         double ground_height, double grid_resolution = 0.05);

// 1 - fov_overlap_ratio: the share of summed footprint area that is covered
// more than once.
double fov_overlap_share(std::span<const RobotPose> poses, const CameraIntrinsics& intrinsics,
                         double ground_height, double grid_resolution = 0.05);

}  // namespace mrcp
