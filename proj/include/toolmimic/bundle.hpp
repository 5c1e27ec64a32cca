#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "toolmimic/jsonio.hpp"
#include "toolmimic/keypoints.hpp"
#include "toolmimic/mask.hpp"
#include "toolmimic/task.hpp"

namespace toolmimic {

/// Sparse per-frame depth: values (meters, > 0) at a subset of pixels,
/// typically those covered by the object masks.
class DepthMap {
public:
  void set(int u, int v, double z);
  std::optional<double> at(int u, int v) const;
  std::size_t size() const { return vals_.size(); }

  Json to_json() const;  // {"u": [...], "v": [...], "z": [...]}, sorted by (v, u)
  static DepthMap from_json(const Json& j, const std::string& what);

private:
  std::unordered_map<std::int64_t, double> vals_;
};

/// Keyframe indices of a demonstration: grasp, pre-function, function.
/// Valid when 0 < t_grasp < t_prefunction < t_function < n_frames - 1.
struct KeyframeSet {
  int t_grasp = 0;
  int t_prefunction = 0;
  int t_function = 0;

  void validate(std::size_t n_frames) const;
};

/// One recorded demonstration. Tracked keypoints are camera-frame 3D points
/// (meters); masks and depth are per frame and share the intrinsics size.
struct DemoBundle {
  static constexpr int kSchemaVersion = 1;

  TaskTriple task;
  CameraIntrinsics intrinsics;
  std::vector<double> timestamps;       // seconds, strictly increasing, >= 4 frames
  std::vector<Cloud> tracks;            // per frame, equal point counts
  std::vector<Mask> tool_masks;
  std::vector<Mask> target_masks;
  std::vector<Mask> hand_masks;
  std::vector<DepthMap> depth;          // per frame
  std::optional<TargetFrame> target_frame;
  std::optional<KeyframeSet> keyframes;

  std::size_t n_frames() const { return timestamps.size(); }
  void validate() const;

  Json to_json(const std::string& cfg_hash) const;
  static DemoBundle from_json(const Json& j);
};

/// The test-time scene a plan is synthesized for.
struct TestScene {
  static constexpr int kSchemaVersion = 1;

  TaskTriple task;
  CameraIntrinsics intrinsics;
  Mask tool_mask;
  Mask target_mask;
  DepthMap depth;
  std::optional<TargetFrame> target_frame;
  Pose grasp_in_tool;    // gripper pose expressed in the tool frame
  Pose target_to_base;   // target frame -> robot base

  void validate() const;

  Json to_json(const std::string& cfg_hash) const;
  static TestScene from_json(const Json& j);
};

/// Lift every masked pixel that has depth into a camera-frame cloud.
Cloud lift_masked_cloud(const CameraIntrinsics& intr, const Mask& mask, const DepthMap& depth);

/// The scene's target frame: supplied, or camera-aligned at the bbox center
/// of the lifted target cloud.
TargetFrame resolve_target_frame(const std::optional<TargetFrame>& supplied,
                                 const CameraIntrinsics& intr, const Mask& target_mask,
                                 const DepthMap& depth0);

}  // namespace toolmimic
