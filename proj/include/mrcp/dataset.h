// Copyright 2026 The mrcp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Multi-robot dataset generation and the MRCPDATA file format.
//
// Layout (little endian): "MRCPDATA", u32 version, u32 frame_count,
// u32 agent_count, u32 height, u32 width, u32 class_count, u64 seed,
// f64 max_depth, f64 hfov, f64 vfov, preset and noise descriptor as
// (u32 length, bytes); then per frame per agent: 12 f32 pose values
// (rotation row-major, then position), f32 rgb[3HW], f32 depth[HW],
// u16 seg[HW]; finally a CRC32 of every preceding byte. A `key = value`
// sidecar named "<path>.manifest" mirrors the header.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mrcp/geometry.h"
#include "mrcp/noise.h"
#include "mrcp/scene.h"

namespace mrcp {

struct DatasetManifest {
  std::uint32_t frame_count = 0;
  std::uint32_t agent_count = 0;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint32_t class_count = 0;
  std::uint64_t seed = 0;
  double max_depth = 20.0;
  double hfov = 0.0;
  double vfov = 0.0;
  std::string preset;
  std::string noise;                        // NoiseSpec::describe()
  std::vector<std::uint64_t> frame_offsets;  // byte offset of each frame

  CameraIntrinsics intrinsics() const;
};

struct Dataset {
  DatasetManifest manifest;
  std::vector<FrameSample> frames;
};

// Writes `dataset` and its sidecar. Frame counts, dims and offsets in the
// returned manifest are recomputed from the frames.
DatasetManifest write_dataset(const Dataset& dataset, const std::string& path);
Dataset read_dataset(const std::string& path);
// Reads only the sidecar.
DatasetManifest read_manifest_sidecar(const std::string& path);

struct DatasetSpec {
  int frames = 200;
  int agents = 5;
  FormationPreset preset = FormationPreset::kCircleInward;
  double radius = 4.0;
  double altitude = 4.0;
  CameraIntrinsics intrinsics;
  SceneGenConfig scene;
  NoiseSpec noise;  // recorded in the manifest, applied at train/eval time
  std::uint64_t seed = 1;
};

// Each frame draws a fresh scene and a random yaw of the formation from its
// own substream. Poses are rounded to single precision before rendering so
// the stored pose is exactly the one used.
Dataset generate_dataset(const DatasetSpec& spec);

// Pose as stored on disk, with its rotation re-orthonormalized.
RobotPose usable_pose(const RobotPose& stored);

}  // namespace mrcp
