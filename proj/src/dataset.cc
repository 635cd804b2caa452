// Copyright 2026 The mrcp Authors
// SPDX-License-Identifier: Apache-2.0

#include "mrcp/dataset.h"

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "binary_io.h"
#include "mrcp/errors.h"

namespace mrcp {
namespace {

constexpr std::string_view kDataMagic = "MRCPDATA";
constexpr std::uint32_t kDataVersion = 1;

std::size_t agent_record_bytes(std::size_t plane) {
  return 12 * sizeof(float) + 4 * plane * sizeof(float) + plane * sizeof(std::uint16_t);
}

RobotPose rounded(const RobotPose& p) {
  RobotPose out;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) out.rotation(r, c) = static_cast<float>(p.rotation(r, c));
    out.position[r] = static_cast<float>(p.position[r]);
  }
  return out;
}

void write_sidecar(const DatasetManifest& m, const std::string& path) {
  std::ofstream out(path + ".manifest");
  if (!out) throw std::runtime_error("cannot write " + path + ".manifest");
  out.precision(17);
  out << "format = MRCPDATA\nversion = " << kDataVersion << "\nframe_count = " << m.frame_count
      << "\nagent_count = " << m.agent_count << "\nheight = " << m.height << "\nwidth = " << m.width
      << "\nclass_count = " << m.class_count << "\nseed = " << m.seed << "\nmax_depth = " << m.max_depth
      << "\nhfov = " << m.hfov << "\nvfov = " << m.vfov << "\npreset = " << m.preset << "\nnoise = " << m.noise
      << "\nframe_offsets = ";
  for (std::size_t i = 0; i < m.frame_offsets.size(); ++i) out << (i ? "," : "") << m.frame_offsets[i];
  out << "\n";
}

}  // namespace

CameraIntrinsics DatasetManifest::intrinsics() const {
  CameraIntrinsics c;
  c.hfov = hfov;
  c.vfov = vfov;
  c.width = static_cast<int>(width);
  c.height = static_cast<int>(height);
  return c;
}

DatasetManifest write_dataset(const Dataset& dataset, const std::string& path) {
  DatasetManifest m = dataset.manifest;
  m.frame_count = static_cast<std::uint32_t>(dataset.frames.size());
  if (m.frame_count == 0) throw InputError("write_dataset: no frames");
  m.agent_count = static_cast<std::uint32_t>(dataset.frames[0].agents.size());
  if (m.agent_count == 0) throw InputError("write_dataset: frames have no agents");
  const std::size_t plane = static_cast<std::size_t>(m.height) * m.width;
  if (plane == 0) throw InputError("write_dataset: manifest image dims are zero");

  io::Writer w;
  w.bytes(kDataMagic.data(), kDataMagic.size());
  w.put<std::uint32_t>(kDataVersion);
  w.put(m.frame_count);
  w.put(m.agent_count);
  w.put(m.height);
  w.put(m.width);
  w.put(m.class_count);
  w.put(m.seed);
  w.put(m.max_depth);
  w.put(m.hfov);
  w.put(m.vfov);
  w.string(m.preset);
  w.string(m.noise);

  m.frame_offsets.clear();
  for (std::size_t f = 0; f < dataset.frames.size(); ++f) {
    const FrameSample& frame = dataset.frames[f];
    if (frame.agents.size() != m.agent_count) {
      throw InputError("write_dataset: frame " + std::to_string(f) + " has " + std::to_string(frame.agents.size()) +
                       " agents, expected " + std::to_string(m.agent_count));
    }
    m.frame_offsets.push_back(w.size());
    for (const AgentView& a : frame.agents) {
      if (a.rgb.size() != 3 * plane || a.depth.size() != plane || a.seg.size() != plane) {
        throw InputError("write_dataset: frame " + std::to_string(f) + " has inconsistent image dims");
      }
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) w.put(static_cast<float>(a.pose.rotation(r, c)));
      }
      for (int r = 0; r < 3; ++r) w.put(static_cast<float>(a.pose.position[r]));
      w.bytes(a.rgb.data(), a.rgb.size() * sizeof(float));
      w.bytes(a.depth.data(), a.depth.size() * sizeof(float));
      w.bytes(a.seg.data(), a.seg.size() * sizeof(std::uint16_t));
    }
  }
  w.finish(path);
  write_sidecar(m, path);
  return m;
}

Dataset read_dataset(const std::string& path) {
  io::Reader r(path, kDataMagic, kDataVersion);
  Dataset ds;
  DatasetManifest& m = ds.manifest;
  m.frame_count = r.get<std::uint32_t>();
  m.agent_count = r.get<std::uint32_t>();
  m.height = r.get<std::uint32_t>();
  m.width = r.get<std::uint32_t>();
  m.class_count = r.get<std::uint32_t>();
  m.seed = r.get<std::uint64_t>();
  m.max_depth = r.get<double>();
  m.hfov = r.get<double>();
  m.vfov = r.get<double>();
  m.preset = r.string();
  m.noise = r.string();

  const std::size_t plane = static_cast<std::size_t>(m.height) * m.width;
  if (plane == 0 || m.agent_count == 0) throw FormatError(path + ": header declares empty frames");
  const std::size_t frame_bytes = agent_record_bytes(plane) * m.agent_count;
  if (r.remaining() != frame_bytes * m.frame_count) {
    throw FormatError(path + ": payload holds " + std::to_string(r.remaining()) + " bytes, header implies " +
                      std::to_string(frame_bytes * m.frame_count));
  }
  ds.frames.resize(m.frame_count);
  for (auto& frame : ds.frames) {
    m.frame_offsets.push_back(r.position());
    frame.agents.resize(m.agent_count);
    for (AgentView& a : frame.agents) {
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) a.pose.rotation(i, j) = r.get<float>();
      }
      for (int i = 0; i < 3; ++i) a.pose.position[i] = r.get<float>();
      a.rgb.resize(3 * plane);
      a.depth.resize(plane);
      a.seg.resize(plane);
      std::memcpy(a.rgb.data(), r.take(a.rgb.size() * sizeof(float)), a.rgb.size() * sizeof(float));
      std::memcpy(a.depth.data(), r.take(a.depth.size() * sizeof(float)), a.depth.size() * sizeof(float));
      std::memcpy(a.seg.data(), r.take(a.seg.size() * sizeof(std::uint16_t)), a.seg.size() * sizeof(std::uint16_t));
      for (std::uint16_t s : a.seg) {
        if (s >= m.class_count) throw FormatError(path + ": segmentation id " + std::to_string(s) + " out of range");
      }
    }
  }
  return ds;
}

DatasetManifest read_manifest_sidecar(const std::string& path) {
  std::ifstream in(path + ".manifest");
  if (!in) throw FormatError(path + ".manifest: cannot open");
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    kv[line.substr(0, eq)] = line.substr(eq + 3);
  }
  auto need = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw FormatError(path + ".manifest: missing key " + key);
    return it->second;
  };
  DatasetManifest m;
  try {
    m.frame_count = static_cast<std::uint32_t>(std::stoul(need("frame_count")));
    m.agent_count = static_cast<std::uint32_t>(std::stoul(need("agent_count")));
    m.height = static_cast<std::uint32_t>(std::stoul(need("height")));
    m.width = static_cast<std::uint32_t>(std::stoul(need("width")));
    m.class_count = static_cast<std::uint32_t>(std::stoul(need("class_count")));
    m.seed = std::stoull(need("seed"));
    m.max_depth = std::stod(need("max_depth"));
    m.hfov = std::stod(need("hfov"));
    m.vfov = std::stod(need("vfov"));
  } catch (const std::logic_error&) {
    throw FormatError(path + ".manifest: malformed numeric field");
  }
  m.preset = need("preset");
  m.noise = need("noise");
  std::istringstream offs(need("frame_offsets"));
  std::string item;
  while (std::getline(offs, item, ',')) m.frame_offsets.push_back(std::stoull(item));
  return m;
}

Dataset generate_dataset(const DatasetSpec& spec) {
  if (spec.frames < 1) throw InputError("generate_dataset: frame count must be positive");
  spec.intrinsics.validate();
  spec.noise.validate();
  if (spec.noise.n_corrupt > spec.agents) throw ConfigError("noisy camera count exceeds agent count");
  Dataset ds;
  DatasetManifest& m = ds.manifest;
  m.agent_count = static_cast<std::uint32_t>(spec.agents);
  m.height = static_cast<std::uint32_t>(spec.intrinsics.height);
  m.width = static_cast<std::uint32_t>(spec.intrinsics.width);
  m.class_count = kSceneClassCount;
  m.seed = spec.seed;
  m.max_depth = spec.scene.max_depth;
  m.hfov = spec.intrinsics.hfov;
  m.vfov = spec.intrinsics.vfov;
  m.preset = to_string(spec.preset);
  m.noise = spec.noise.describe();

  const Rng root(spec.seed);
  for (int f = 0; f < spec.frames; ++f) {
    Rng rng = root.substream(static_cast<std::uint64_t>(f));
    const SceneSpec scene = random_scene(rng, spec.scene);
    const auto base = formation_preset(spec.preset, spec.agents, spec.radius, spec.altitude, rng.next_u64());
    const auto posed = rotate_formation(base, rng.uniform(0.0, 2.0 * std::numbers::pi));
    std::vector<RobotPose> stored;
    std::vector<RobotPose> used;
    for (const RobotPose& p : posed) {
      stored.push_back(rounded(p));
      used.push_back(usable_pose(stored.back()));
    }
    FrameSample frame = render_views(scene, used, spec.intrinsics);
    for (std::size_t a = 0; a < stored.size(); ++a) frame.agents[a].pose = stored[a];
    ds.frames.push_back(std::move(frame));
  }
  m.frame_count = static_cast<std::uint32_t>(ds.frames.size());
  return ds;
}

RobotPose usable_pose(const RobotPose& stored) {
  RobotPose p;
  p.position = stored.position;
  p.rotation = nearest_rotation(stored.rotation);
  return p;
}

}  // namespace mrcp
