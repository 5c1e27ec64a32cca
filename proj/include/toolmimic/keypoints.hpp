#pragma once

#include <vector>

#include "toolmimic/geometry.hpp"

namespace toolmimic {

/// The three functional keypoints of a tool observation, in the target frame.
/// The triple is non-collinear by construction:
/// ||(func - center) x (grasp - func)|| > 1e-6 m^2.
class FunctionalKeypoints {
public:
  FunctionalKeypoints(const Vec3& func, const Vec3& grasp, const Vec3& center);

  const Vec3& func() const { return func_; }
  const Vec3& grasp() const { return grasp_; }
  const Vec3& center() const { return center_; }

private:
  Vec3 func_, grasp_, center_;
};

/// Orthonormal in-plane axes and normal of the function plane through the
/// keypoint triple: u points center -> func, v points func -> grasp (unit),
/// n = u x v normalized. Origin is the function point.
struct PlaneAxes {
  Vec3 u, v, n;
};
PlaneAxes plane_axes(const Vec3& func, const Vec3& grasp, const Vec3& center);

/// Target-centric reference frame; world<->target conversions.
struct TargetFrame {
  Vec3 point{0.0, 0.0, 0.0};     // frame origin in camera coordinates
  Rotation orientation;           // camera-aligned unless supplied

  Vec3 to_target(const Vec3& p_cam) const { return orientation.inverse() * (p_cam - point); }
  Vec3 from_target(const Vec3& p_tgt) const { return orientation * p_tgt + point; }
};

/// Structure-of-arrays point cloud, kernel-friendly.
struct Cloud {
  std::vector<double> x, y, z;

  std::size_t size() const { return x.size(); }
  void push_back(const Vec3& p) {
    x.push_back(p.x());
    y.push_back(p.y());
    z.push_back(p.z());
  }
  Vec3 point(std::size_t i) const { return Vec3(x[i], y[i], z[i]); }
  static Cloud from_points(const std::vector<Vec3>& pts);
  std::vector<Vec3> to_points() const;
};

/// cloud' = R * cloud + t via the active kernel set.
Cloud transform_cloud(const Pose& pose, const Cloud& cloud);

/// Convert camera-frame cloud into the target frame.
Cloud to_target_frame(const Cloud& cloud, const TargetFrame& frame);

/// Axis-aligned bounding-box center. Throws EmptyCloud.
Vec3 compute_center(const Cloud& cloud);

/// Axis-aligned extents (max - min per axis). Throws EmptyCloud.
Vec3 cloud_dims(const Cloud& cloud);

/// Tool pose encoding a keypoint triple: rotation columns [u, n x u, n] from
/// the function-plane axes, translation at the function point. Applying the
/// pose to the triple expressed in its own tool frame reproduces the triple.
Pose pose_from_keypoints(const FunctionalKeypoints& k);

/// Timestamped per-frame keypoint triples (target frame).
struct KeypointTrajectory {
  std::vector<double> timestamps;            // strictly increasing, seconds
  std::vector<FunctionalKeypoints> frames;   // same length as timestamps

  std::size_t size() const { return frames.size(); }
};

/// Function-point position at the function keyframe. Throws IndexOutOfRange.
Vec3 extract_effect_point(const KeypointTrajectory& traj, std::size_t t_function);

/// Componentwise rescale of an effect point by test/demo target extents.
/// Throws NonPositiveDimension if any extent is <= 0.
Vec3 scale_effect_point(const Vec3& effect, const Vec3& demo_target_dims, const Vec3& test_target_dims);

}  // namespace toolmimic
