#pragma once

#include <Eigen/Dense>
#include <vector>

#include "toolmimic/errors.hpp"

namespace toolmimic {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Mat3 = Eigen::Matrix3d;

/// Unit quaternion with canonical sign (w >= 0). All constructors normalize
/// and canonicalize, so two Rotations representing the same physical rotation
/// compare bit-equal.
class Rotation {
public:
  Rotation() : q_(1.0, 0.0, 0.0, 0.0) {}
  explicit Rotation(const Eigen::Quaterniond& q) : q_(q.normalized()) { canonicalize(); }
  Rotation(double w, double x, double y, double z) : q_(w, x, y, z) {
    q_.normalize();
    canonicalize();
  }
  explicit Rotation(const Mat3& m) : q_(m) {
    q_.normalize();
    canonicalize();
  }

  static Rotation identity() { return Rotation(); }

  /// Exponential map: rotation vector (axis * angle, radians) to rotation.
  static Rotation exp(const Vec3& w);

  /// Log map: rotation vector with magnitude in [0, pi].
  Vec3 log() const;

  Rotation operator*(const Rotation& rhs) const { return Rotation(q_ * rhs.q_); }
  Vec3 operator*(const Vec3& p) const { return q_ * p; }
  Rotation inverse() const { return Rotation(q_.conjugate()); }

  Mat3 matrix() const { return q_.toRotationMatrix(); }
  const Eigen::Quaterniond& quat() const { return q_; }
  double angle() const { return log().norm(); }
  double angle_to(const Rotation& other) const { return (inverse() * other).log().norm(); }

private:
  void canonicalize() {
    if (q_.w() < 0.0 || (q_.w() == 0.0 && (q_.x() < 0.0 || (q_.x() == 0.0 && (q_.y() < 0.0 || (q_.y() == 0.0 && q_.z() < 0.0)))))) {
      q_.coeffs() = -q_.coeffs();
    }
  }
  Eigen::Quaterniond q_;
};

/// Rigid transform: p' = R * p + t.
struct Pose {
  Rotation rotation;
  Vec3 translation{0.0, 0.0, 0.0};

  static Pose identity() { return Pose{}; }

  Vec3 operator*(const Vec3& p) const { return rotation * p + translation; }
  Pose operator*(const Pose& rhs) const {
    return Pose{rotation * rhs.rotation, rotation * rhs.translation + translation};
  }
  Pose inverse() const {
    Rotation ri = rotation.inverse();
    return Pose{ri, -(ri * translation)};
  }
};

/// Rotation about `axis` (unit) by `angle`, leaving `pivot` fixed.
Pose rotation_about(const Vec3& axis, double angle, const Vec3& pivot);

/// Spherical interpolation between rotations along the shorter arc.
/// Falls back to normalized linear interpolation when the arc angle is
/// below 1e-6 rad. u in [0, 1].
Rotation slerp(const Rotation& a, const Rotation& b, double u);

/// Pose interpolation: slerp on rotation, lerp on translation.
Pose interpolate_pose(const Pose& a, const Pose& b, double u);

struct CameraIntrinsics {
  double fx = 0.0, fy = 0.0, cx = 0.0, cy = 0.0;
  int width = 0, height = 0;
};

/// Pinhole projection of camera-frame points (z forward, meters) to pixels.
/// Throws PointBehindCamera if any z <= 0.
std::vector<Vec2> project_pinhole(const CameraIntrinsics& intr, const std::vector<Vec3>& pts);
Vec2 project_pinhole(const CameraIntrinsics& intr, const Vec3& pt);

/// Inverse projection of a pixel at the given depth (z > 0, else NonPositiveDepth).
Vec3 lift_to_3d(const CameraIntrinsics& intr, const Vec2& pixel, double depth);

/// Least-squares rigid transform T with to[i] ~= T * from[i] (SVD / Kabsch with
/// reflection correction). Throws DegenerateConfiguration for fewer than three
/// points or collinear point sets.
Pose estimate_rigid(const std::vector<Vec3>& from, const std::vector<Vec3>& to);

}  // namespace toolmimic
