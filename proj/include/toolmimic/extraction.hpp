#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "toolmimic/bundle.hpp"
#include "toolmimic/keypoints.hpp"
#include "toolmimic/ports.hpp"

namespace toolmimic {

struct ExtractionConfig {
  int n_tracking_keypoints = 32;
  int n_boundary_candidates = 8;
  double changepoint_penalty = 0.0;  // 0 selects 3 * log(N) * var(signal)
  double iou_threshold = 0.05;
  std::uint64_t seed = 0;

  Json to_json() const;
  static ExtractionConfig from_json(const Json& j);
};

/// Pixels to track on the tool: regular grid over the mask bbox intersected
/// with the mask, topped up by seeded uniform draws from the mask. Returns
/// exactly n distinct pixels; MaskTooSmall when the mask has fewer than n.
std::vector<std::pair<int, int>> sample_tracking_keypoints(const Mask& mask, int n,
                                                           std::uint64_t seed);

/// Per-step rigid transforms: result[t] maps frame-t points onto frame-t+1
/// points (least squares). Throws DegenerateConfiguration via estimate_rigid.
std::vector<Pose> transforms_from_tracks(const std::vector<Cloud>& frames);

/// Mean tracked-keypoint speed between consecutive frames (m/s); length N-1.
std::vector<double> mean_speed_signal(const std::vector<Cloud>& frames,
                                      const std::vector<double>& timestamps);

/// PELT changepoint detection with piecewise-constant-mean L2 segment cost.
/// Returns ascending interior change indices (a change at k starts a new
/// segment [k, ...)). `penalty` is the per-change cost.
std::vector<int> detect_changepoints(const std::vector<double>& signal, double penalty);

/// The function keyframe: last change index of the speed signal. A change at
/// speed index k means the motion regime starting at frame k, so the frame
/// index equals the signal index. Throws NoChangeDetected.
int detect_function_keyframe(const std::vector<double>& speed_signal, double penalty);

/// Earliest frame whose hand and tool masks intersect, plus the centroid
/// pixel of the intersection. Throws NoGraspContact.
struct GraspDetection {
  int t_grasp = 0;
  Vec2 pixel{0.0, 0.0};
};
GraspDetection detect_grasp_keyframe(const std::vector<Mask>& hand_masks,
                                     const std::vector<Mask>& tool_masks);

/// Largest t with t_grasp < t < t_function and IoU(tool, target) below the
/// threshold. Throws NoPrefunctionFrame.
int find_prefunction_keyframe(const std::vector<Mask>& tool_masks,
                              const std::vector<Mask>& target_masks, int t_function,
                              double iou_threshold, int t_grasp = 0);

/// Farthest-point sampling over the mask boundary, seeded at the boundary
/// pixel nearest the mask centroid; deterministic (ties break by pixel
/// order). Throws BoundaryTooSmall when the boundary has fewer than n pixels.
std::vector<Vec2> sample_boundary_candidates(const Mask& mask, int n);

struct FunctionPointContext {
  PortImage annotated_frame;  // pre-function frame with candidate markers
  TaskTriple task;
  CameraIntrinsics intrinsics;
  const DepthMap* depth = nullptr;  // pre-function frame depth
  TargetFrame target_frame;
};

/// Ask the selector port for the function point among the candidates; lift it
/// into the target frame. Throws SelectorOutOfRange / MissingDepth.
struct FunctionPointDetection {
  Vec2 pixel{0.0, 0.0};
  Vec3 point_target{0.0, 0.0, 0.0};
};
FunctionPointDetection detect_function_point(const std::vector<Vec2>& candidates,
                                             const FunctionPointContext& context,
                                             FunctionPointSelector& selector);

/// A keypoint observed at one frame, to be transported across the recording.
struct AnchoredPoint {
  Vec3 point{0.0, 0.0, 0.0};  // target frame
  int frame = 0;              // detection frame
};

/// Transport func/grasp/center through the per-step rigid transforms, forward
/// and backward from their detection frames, assembling a full keypoint
/// trajectory.
KeypointTrajectory propagate_keypoints(const AnchoredPoint& func, const AnchoredPoint& grasp,
                                       const AnchoredPoint& center,
                                       const std::vector<Pose>& step_poses,
                                       const std::vector<double>& timestamps);

struct ExtractionResult {
  static constexpr int kSchemaVersion = 1;

  TaskTriple task;
  CameraIntrinsics intrinsics;
  TargetFrame target_frame;
  KeyframeSet keyframes;
  KeypointTrajectory trajectory;      // target frame
  std::vector<Pose> step_poses;       // target frame, N-1
  Vec3 effect_point{0.0, 0.0, 0.0};   // function point at t_function
  Vec3 demo_target_dims{0.0, 0.0, 0.0};
  Vec2 function_pixel{0.0, 0.0};      // in the pre-function frame
  Vec2 grasp_pixel{0.0, 0.0};         // in the grasp frame
  Vec2 demo_func_pixel0{0.0, 0.0};    // keypoints projected into frame 0
  Vec2 demo_grasp_pixel0{0.0, 0.0};

  /// Tool pose trajectory implied by the keypoints (pose_from_keypoints per
  /// frame).
  std::vector<Pose> tool_poses() const;

  Json to_json(const std::string& cfg_hash) const;
  static ExtractionResult from_json(const Json& j);
};

/// Full extraction pass over a demonstration bundle.
ExtractionResult run_extraction(const DemoBundle& bundle, const ExtractionConfig& config,
                                FunctionPointSelector& selector);

}  // namespace toolmimic
