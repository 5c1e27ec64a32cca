#pragma once

#include <optional>
#include <string>
#include <vector>

#include "toolmimic/bundle.hpp"
#include "toolmimic/keypoints.hpp"
#include "toolmimic/ports.hpp"

namespace toolmimic {

struct CorrespondenceConfig {
  // candidate in-plane rotation offsets presented to the axis refiner
  std::vector<double> offsets_rad = default_offsets();
  std::string render_dir;  // when set, axis candidate renders are dumped here as PGM

  static std::vector<double> default_offsets();

  Json to_json() const;
  static CorrespondenceConfig from_json(const Json& j);
};

/// Projection context for rendering axis candidates; without one the refiner
/// sees descriptor-only candidates (empty renders).
struct RenderScene {
  Cloud tool_cloud;            // test tool at its initial pose, target frame
  CameraIntrinsics intrinsics;
  TargetFrame target_frame;    // maps target-frame points back to the camera
  PortImage demo_function_frame;  // shown to the refiner alongside the renders
  TaskTriple task;
};

/// Rotation carrying `from` onto `to` (unit vectors) about their mutual
/// perpendicular. Identity when parallel; a half turn about `fallback_axis`
/// when antiparallel.
Rotation align_plane(const Vec3& from, const Vec3& to, const Vec3& fallback_axis);

/// Signed angle about `normal` carrying unit in-plane vector `from` onto
/// `to`; both must be perpendicular to `normal`.
double align_axis(const Vec3& from, const Vec3& to, const Vec3& normal);

/// Function-centric correspondence: the rigid transform carrying the test
/// tool from its initial pose into function position, factored into the
/// translation, plane-alignment, and in-plane-rotation stages.
struct FunctionCorrespondence {
  static constexpr int kSchemaVersion = 1;

  Pose t_point;   // translates the test function point onto the effect point
  Pose t_plane;   // aligns the test function plane normal with the demo normal
  Pose t_axis;    // in-plane rotation about the test normal (pivot: test function point)
  double chosen_offset_rad = 0.0;
  Pose t_func;    // t_point * t_plane * t_axis
  // test keypoints mapped through t_func (placeholder triple until composed)
  FunctionalKeypoints k_test_at_tf{Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 0)};

  Json to_json(const std::string& cfg_hash) const;
  static FunctionCorrespondence from_json(const Json& j);
};

/// Build the full correspondence. `k_demo_tf` is the demo tool's keypoint
/// triple at the function keyframe, `k_test0` the test tool's triple at its
/// initial pose, `effect_point` the (already dimension-adjusted) point the
/// test function point must reach. The refiner picks among the configured
/// in-plane offsets; when `scene` is non-null each candidate is rendered.
FunctionCorrespondence compose_function_correspondence(const FunctionalKeypoints& k_demo_tf,
                                                       const FunctionalKeypoints& k_test0,
                                                       const Vec3& effect_point,
                                                       const CorrespondenceConfig& config,
                                                       AxisRefiner& refiner,
                                                       const RenderScene* scene = nullptr);

/// Demo-side inputs for transferring the function and grasp pixels onto the
/// test frame through the region-proposal and dense-correspondence ports.
struct TransferContext {
  Mask demo_tool_mask0;     // demo tool mask at the initial frame
  Vec2 demo_func_pixel0{0.0, 0.0};
  Vec2 demo_grasp_pixel0{0.0, 0.0};
  TaskTriple task;
};

/// Test-tool keypoints from ports: function and grasp pixels are matched on
/// the test frame, lifted through the depth map into the target frame; the
/// center is the lifted tool cloud's bounding-box center. Throws
/// RegionOutsideMask when a proposed region misses the tool mask,
/// CorrespondenceFailed when a match comes back empty, MissingDepth when the
/// matched pixel has no depth.
FunctionalKeypoints transfer_keypoints(const TransferContext& ctx, const TestScene& scene,
                                       const TargetFrame& target_frame, RegionProposer& proposer,
                                       DenseCorrespondence& correspondence);

}  // namespace toolmimic
