#include "toolmimic/bundle.hpp"

#include <algorithm>

#include "toolmimic/kernels.hpp"

namespace toolmimic {

namespace {

std::int64_t depth_key(int u, int v) { return (std::int64_t(v) << 32) | std::uint32_t(u); }

CameraIntrinsics intrinsics_from_json(const Json& j, const std::string& what) {
  CameraIntrinsics intr;
  intr.fx = require_field(j, "fx", what).get<double>();
  intr.fy = require_field(j, "fy", what).get<double>();
  intr.cx = require_field(j, "cx", what).get<double>();
  intr.cy = require_field(j, "cy", what).get<double>();
  intr.width = require_field(j, "width", what).get<int>();
  intr.height = require_field(j, "height", what).get<int>();
  if (intr.fx <= 0 || intr.fy <= 0 || intr.width <= 0 || intr.height <= 0) {
    throw SchemaError(what + ": intrinsics need positive focal lengths and image size");
  }
  return intr;
}

Json intrinsics_to_json(const CameraIntrinsics& intr) {
  return Json{{"fx", intr.fx}, {"fy", intr.fy}, {"cx", intr.cx},
              {"cy", intr.cy}, {"width", intr.width}, {"height", intr.height}};
}

Json cloud_to_json(const Cloud& c) {
  return Json{{"x", c.x}, {"y", c.y}, {"z", c.z}};
}

Cloud cloud_from_json(const Json& j, const std::string& what) {
  Cloud c;
  for (auto [key, vecp] : {std::pair{"x", &c.x}, {"y", &c.y}, {"z", &c.z}}) {
    const Json& arr = require_field(j, key, what);
    if (!arr.is_array()) throw SchemaError(what + "." + key + ": expected an array");
    vecp->reserve(arr.size());
    for (const auto& e : arr) {
      if (!e.is_number()) throw SchemaError(what + "." + key + ": expected numbers");
      vecp->push_back(e.get<double>());
    }
  }
  if (c.x.size() != c.y.size() || c.x.size() != c.z.size()) {
    throw SchemaError(what + ": x/y/z arrays differ in length");
  }
  return c;
}

Json target_frame_to_json(const TargetFrame& f) {
  return Json{{"point", to_json(f.point)}, {"quat", to_json(f.orientation)}};
}

TargetFrame target_frame_from_json(const Json& j, const std::string& what) {
  TargetFrame f;
  f.point = vec3_from_json(require_field(j, "point", what), what + ".point");
  f.orientation = rotation_from_json(require_field(j, "quat", what), what + ".quat");
  return f;
}

void check_schema_version(const Json& j, const std::string& what) {
  const Json& v = require_field(j, "schema_version", what);
  if (!v.is_number_integer() || v.get<int>() != 1) {
    throw SchemaError(what + ": unsupported schema_version (expected 1)");
  }
}

}  // namespace

void DepthMap::set(int u, int v, double z) {
  if (z <= 0.0) throw NonPositiveDepth("depth values must be positive");
  vals_[depth_key(u, v)] = z;
}

std::optional<double> DepthMap::at(int u, int v) const {
  auto it = vals_.find(depth_key(u, v));
  if (it == vals_.end()) return std::nullopt;
  return it->second;
}

Json DepthMap::to_json() const {
  std::vector<std::int64_t> keys;
  keys.reserve(vals_.size());
  for (const auto& [k, _] : vals_) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  std::vector<int> us, vs;
  std::vector<double> zs;
  us.reserve(keys.size());
  vs.reserve(keys.size());
  zs.reserve(keys.size());
  for (std::int64_t k : keys) {
    us.push_back(int(std::uint32_t(k & 0xffffffff)));
    vs.push_back(int(k >> 32));
    zs.push_back(vals_.at(k));
  }
  return Json{{"u", us}, {"v", vs}, {"z", zs}};
}

DepthMap DepthMap::from_json(const Json& j, const std::string& what) {
  const Json& ju = require_field(j, "u", what);
  const Json& jv = require_field(j, "v", what);
  const Json& jz = require_field(j, "z", what);
  if (!ju.is_array() || !jv.is_array() || !jz.is_array() || ju.size() != jv.size() ||
      ju.size() != jz.size()) {
    throw SchemaError(what + ": u/v/z must be arrays of equal length");
  }
  DepthMap d;
  for (std::size_t i = 0; i < ju.size(); ++i) {
    double z = jz[i].get<double>();
    if (z <= 0.0) throw SchemaError(what + ": depth entries must be positive");
    d.set(ju[i].get<int>(), jv[i].get<int>(), z);
  }
  return d;
}

void KeyframeSet::validate(std::size_t n_frames) const {
  bool ok = 0 < t_grasp && t_grasp < t_prefunction && t_prefunction < t_function &&
            t_function < int(n_frames) - 1;
  if (!ok) {
    throw BadKeyframeOrder("keyframes must satisfy 0 < grasp < prefunction < function < " +
                           std::to_string(n_frames) + " - 1 (got " + std::to_string(t_grasp) + ", " +
                           std::to_string(t_prefunction) + ", " + std::to_string(t_function) + ")");
  }
}

void DemoBundle::validate() const {
  std::size_t n = n_frames();
  if (n < 4) throw SchemaError("bundle needs at least 4 frames, got " + std::to_string(n));
  for (std::size_t t = 1; t < n; ++t) {
    if (!(timestamps[t] > timestamps[t - 1])) {
      throw SchemaError("bundle timestamps must be strictly increasing");
    }
  }
  if (tracks.size() != n || tool_masks.size() != n || target_masks.size() != n ||
      hand_masks.size() != n || depth.size() != n) {
    throw SchemaError("bundle per-frame arrays must all have " + std::to_string(n) + " entries");
  }
  std::size_t n_points = tracks.empty() ? 0 : tracks[0].size();
  if (n_points < 3) throw SchemaError("bundle tracks need at least 3 points per frame");
  for (const Cloud& c : tracks) {
    if (c.size() != n_points) throw SchemaError("bundle tracks must have equal point counts per frame");
  }
  for (const auto* masks : {&tool_masks, &target_masks, &hand_masks}) {
    for (const Mask& m : *masks) {
      if (m.width != intrinsics.width || m.height != intrinsics.height) {
        throw SchemaError("bundle masks must match the intrinsics image size");
      }
    }
  }
  if (keyframes) keyframes->validate(n);
}

Json DemoBundle::to_json(const std::string& cfg_hash) const {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["config_hash"] = cfg_hash;
  j["task"] = toolmimic::to_json(task);
  j["intrinsics"] = intrinsics_to_json(intrinsics);
  j["timestamps"] = timestamps;
  Json jt = Json::array();
  for (const Cloud& c : tracks) jt.push_back(cloud_to_json(c));
  j["tracks"] = std::move(jt);
  for (auto [key, masks] : {std::pair{"tool", &tool_masks}, {"target", &target_masks}, {"hand", &hand_masks}}) {
    Json jm = Json::array();
    for (const Mask& m : *masks) jm.push_back(toolmimic::to_json(m));
    j["masks"][key] = std::move(jm);
  }
  Json jd = Json::array();
  for (const DepthMap& d : depth) jd.push_back(d.to_json());
  j["depth"] = std::move(jd);
  if (target_frame) j["target_frame"] = target_frame_to_json(*target_frame);
  if (keyframes) {
    j["keyframes"] = Json{{"t_grasp", keyframes->t_grasp},
                          {"t_prefunction", keyframes->t_prefunction},
                          {"t_function", keyframes->t_function}};
  }
  return j;
}

DemoBundle DemoBundle::from_json(const Json& j) {
  check_schema_version(j, "bundle");
  DemoBundle b;
  b.task = task_from_json(require_field(j, "task", "bundle"), "bundle.task");
  b.intrinsics = intrinsics_from_json(require_field(j, "intrinsics", "bundle"), "bundle.intrinsics");
  const Json& ts = require_field(j, "timestamps", "bundle");
  if (!ts.is_array()) throw SchemaError("bundle.timestamps: expected an array");
  for (const auto& e : ts) b.timestamps.push_back(e.get<double>());
  const Json& tracks = require_field(j, "tracks", "bundle");
  if (!tracks.is_array()) throw SchemaError("bundle.tracks: expected an array");
  for (std::size_t t = 0; t < tracks.size(); ++t) {
    b.tracks.push_back(cloud_from_json(tracks[t], "bundle.tracks[" + std::to_string(t) + "]"));
  }
  const Json& masks = require_field(j, "masks", "bundle");
  for (auto [key, out] : {std::pair{"tool", &b.tool_masks}, {"target", &b.target_masks}, {"hand", &b.hand_masks}}) {
    const Json& arr = require_field(masks, key, "bundle.masks");
    if (!arr.is_array()) throw SchemaError(std::string("bundle.masks.") + key + ": expected an array");
    for (std::size_t t = 0; t < arr.size(); ++t) {
      out->push_back(mask_from_json(arr[t], std::string("bundle.masks.") + key + "[" + std::to_string(t) + "]"));
    }
  }
  const Json& depth = require_field(j, "depth", "bundle");
  if (!depth.is_array()) throw SchemaError("bundle.depth: expected an array");
  for (std::size_t t = 0; t < depth.size(); ++t) {
    b.depth.push_back(DepthMap::from_json(depth[t], "bundle.depth[" + std::to_string(t) + "]"));
  }
  if (j.contains("target_frame")) {
    b.target_frame = target_frame_from_json(j["target_frame"], "bundle.target_frame");
  }
  if (j.contains("keyframes")) {
    const Json& kf = j["keyframes"];
    KeyframeSet k;
    k.t_grasp = require_field(kf, "t_grasp", "bundle.keyframes").get<int>();
    k.t_prefunction = require_field(kf, "t_prefunction", "bundle.keyframes").get<int>();
    k.t_function = require_field(kf, "t_function", "bundle.keyframes").get<int>();
    b.keyframes = k;
  }
  b.validate();
  return b;
}

void TestScene::validate() const {
  if (tool_mask.width != intrinsics.width || tool_mask.height != intrinsics.height ||
      target_mask.width != intrinsics.width || target_mask.height != intrinsics.height) {
    throw SchemaError("scene masks must match the intrinsics image size");
  }
  if (tool_mask.count() == 0) throw SchemaError("scene tool mask is empty");
  if (target_mask.count() == 0) throw SchemaError("scene target mask is empty");
}

Json TestScene::to_json(const std::string& cfg_hash) const {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["config_hash"] = cfg_hash;
  j["task"] = toolmimic::to_json(task);
  j["intrinsics"] = intrinsics_to_json(intrinsics);
  j["tool_mask"] = toolmimic::to_json(tool_mask);
  j["target_mask"] = toolmimic::to_json(target_mask);
  j["depth"] = depth.to_json();
  if (target_frame) j["target_frame"] = target_frame_to_json(*target_frame);
  j["grasp_in_tool"] = toolmimic::to_json(grasp_in_tool);
  j["target_to_base"] = toolmimic::to_json(target_to_base);
  return j;
}

TestScene TestScene::from_json(const Json& j) {
  check_schema_version(j, "scene");
  TestScene s;
  s.task = task_from_json(require_field(j, "task", "scene"), "scene.task");
  s.intrinsics = intrinsics_from_json(require_field(j, "intrinsics", "scene"), "scene.intrinsics");
  s.tool_mask = mask_from_json(require_field(j, "tool_mask", "scene"), "scene.tool_mask");
  s.target_mask = mask_from_json(require_field(j, "target_mask", "scene"), "scene.target_mask");
  s.depth = DepthMap::from_json(require_field(j, "depth", "scene"), "scene.depth");
  if (j.contains("target_frame")) {
    s.target_frame = target_frame_from_json(j["target_frame"], "scene.target_frame");
  }
  s.grasp_in_tool = pose_from_json(require_field(j, "grasp_in_tool", "scene"), "scene.grasp_in_tool");
  s.target_to_base = pose_from_json(require_field(j, "target_to_base", "scene"), "scene.target_to_base");
  s.validate();
  return s;
}

Cloud lift_masked_cloud(const CameraIntrinsics& intr, const Mask& mask, const DepthMap& depth) {
  std::vector<double> us, vs, zs;
  for (int v = 0; v < mask.height; ++v) {
    for (int u = 0; u < mask.width; ++u) {
      if (!mask.at(u, v)) continue;
      if (auto z = depth.at(u, v)) {
        us.push_back(double(u));
        vs.push_back(double(v));
        zs.push_back(*z);
      }
    }
  }
  Cloud c;
  c.x.resize(us.size());
  c.y.resize(us.size());
  c.z = zs;
  kern::active().lift_points(intr.fx, intr.fy, intr.cx, intr.cy, us.data(), vs.data(), zs.data(),
                             us.size(), c.x.data(), c.y.data());
  return c;
}

TargetFrame resolve_target_frame(const std::optional<TargetFrame>& supplied,
                                 const CameraIntrinsics& intr, const Mask& target_mask,
                                 const DepthMap& depth0) {
  if (supplied) return *supplied;
  Cloud cloud = lift_masked_cloud(intr, target_mask, depth0);
  if (cloud.size() == 0) {
    throw MissingDepth("cannot place the target frame: no depth under the target mask");
  }
  return TargetFrame{compute_center(cloud), Rotation::identity()};
}

}  // namespace toolmimic
