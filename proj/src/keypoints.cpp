#include "toolmimic/keypoints.hpp"

#include <limits>

#include "toolmimic/kernels.hpp"

namespace toolmimic {

FunctionalKeypoints::FunctionalKeypoints(const Vec3& func, const Vec3& grasp, const Vec3& center)
    : func_(func), grasp_(grasp), center_(center) {
  double cross = (func - center).cross(grasp - func).norm();
  if (!(cross > 1e-6)) {
    throw DegenerateKeypoints("keypoint triple is collinear (cross norm " + std::to_string(cross) +
                              " m^2)");
  }
}

PlaneAxes plane_axes(const Vec3& func, const Vec3& grasp, const Vec3& center) {
  Vec3 du = func - center;
  Vec3 dv = grasp - func;
  double nu = du.norm();
  double nv = dv.norm();
  if (nu <= 0.0 || nv <= 0.0) {
    throw DegenerateKeypoints("coincident keypoints leave the plane axes undefined");
  }
  PlaneAxes axes;
  axes.u = du / nu;
  axes.v = dv / nv;
  Vec3 c = axes.u.cross(axes.v);
  double nc = c.norm();
  if (nc < 1e-6) {
    throw DegenerateKeypoints("keypoint triple is collinear (unit cross norm " + std::to_string(nc) + ")");
  }
  axes.n = c / nc;
  return axes;
}

Cloud Cloud::from_points(const std::vector<Vec3>& pts) {
  Cloud c;
  c.x.reserve(pts.size());
  c.y.reserve(pts.size());
  c.z.reserve(pts.size());
  for (const Vec3& p : pts) c.push_back(p);
  return c;
}

std::vector<Vec3> Cloud::to_points() const {
  std::vector<Vec3> pts(size());
  for (std::size_t i = 0; i < size(); ++i) pts[i] = point(i);
  return pts;
}

Cloud transform_cloud(const Pose& pose, const Cloud& cloud) {
  Cloud out;
  const std::size_t n = cloud.size();
  out.x.resize(n);
  out.y.resize(n);
  out.z.resize(n);
  Mat3 m = pose.rotation.matrix();
  double r[9] = {m(0, 0), m(0, 1), m(0, 2), m(1, 0), m(1, 1), m(1, 2), m(2, 0), m(2, 1), m(2, 2)};
  double t[3] = {pose.translation.x(), pose.translation.y(), pose.translation.z()};
  kern::active().transform_points(r, t, cloud.x.data(), cloud.y.data(), cloud.z.data(), n,
                                  out.x.data(), out.y.data(), out.z.data());
  return out;
}

Cloud to_target_frame(const Cloud& cloud, const TargetFrame& frame) {
  Pose inv{frame.orientation.inverse(), frame.orientation.inverse() * (-frame.point)};
  return transform_cloud(inv, cloud);
}

Vec3 compute_center(const Cloud& cloud) {
  if (cloud.size() == 0) throw EmptyCloud("compute_center: empty cloud");
  Vec3 lo(std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    Vec3 p = cloud.point(i);
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return 0.5 * (lo + hi);
}

Vec3 cloud_dims(const Cloud& cloud) {
  if (cloud.size() == 0) throw EmptyCloud("cloud_dims: empty cloud");
  Vec3 lo(std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    Vec3 p = cloud.point(i);
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return hi - lo;
}

Pose pose_from_keypoints(const FunctionalKeypoints& k) {
  PlaneAxes axes = plane_axes(k.func(), k.grasp(), k.center());
  Mat3 r;
  r.col(0) = axes.u;
  r.col(1) = axes.n.cross(axes.u);
  r.col(2) = axes.n;
  return Pose{Rotation(r), k.func()};
}

Vec3 extract_effect_point(const KeypointTrajectory& traj, std::size_t t_function) {
  if (t_function >= traj.frames.size()) {
    throw IndexOutOfRange("effect point frame " + std::to_string(t_function) +
                          " out of range for trajectory of length " + std::to_string(traj.frames.size()));
  }
  return traj.frames[t_function].func();
}

Vec3 scale_effect_point(const Vec3& effect, const Vec3& demo_target_dims, const Vec3& test_target_dims) {
  for (int i = 0; i < 3; ++i) {
    if (!(demo_target_dims[i] > 0.0) || !(test_target_dims[i] > 0.0)) {
      throw NonPositiveDimension("target extents must be positive to rescale the effect point");
    }
  }
  return Vec3(effect.x() * test_target_dims.x() / demo_target_dims.x(),
              effect.y() * test_target_dims.y() / demo_target_dims.y(),
              effect.z() * test_target_dims.z() / demo_target_dims.z());
}

}  // namespace toolmimic
