#include "toolmimic/geometry.hpp"

#include <cmath>

#include "toolmimic/kernels.hpp"

namespace toolmimic {

Rotation Rotation::exp(const Vec3& w) {
  double theta = w.norm();
  double half = 0.5 * theta;
  double scale;
  if (theta < 1e-12) {
    // sin(t/2)/t ~ 1/2 - t^2/48
    scale = 0.5 - theta * theta / 48.0;
  } else {
    scale = std::sin(half) / theta;
  }
  return Rotation(Eigen::Quaterniond(std::cos(half), scale * w.x(), scale * w.y(), scale * w.z()));
}

Vec3 Rotation::log() const {
  // w >= 0 after canonicalization, so the angle 2*atan2(|v|, w) lies in [0, pi].
  Vec3 v(q_.x(), q_.y(), q_.z());
  double vn = v.norm();
  double w = q_.w();
  double theta = 2.0 * std::atan2(vn, w);
  if (vn < 1e-12) {
    // theta/sin(theta/2) ~ 2/w for small angles (w ~ 1)
    return v * (2.0 / std::max(w, 1e-300));
  }
  return v * (theta / vn);
}

Pose rotation_about(const Vec3& axis, double angle, const Vec3& pivot) {
  Rotation r = Rotation::exp(axis.normalized() * angle);
  return Pose{r, pivot - r * pivot};
}

Rotation slerp(const Rotation& a, const Rotation& b, double u) {
  Eigen::Quaterniond qa = a.quat();
  Eigen::Quaterniond qb = b.quat();
  double dot = qa.dot(qb);
  if (dot < 0.0) {  // shorter arc
    qb.coeffs() = -qb.coeffs();
    dot = -dot;
  }
  dot = std::min(dot, 1.0);
  double omega = std::acos(dot);
  Eigen::Quaterniond out;
  if (omega < 1e-6) {
    out.coeffs() = (1.0 - u) * qa.coeffs() + u * qb.coeffs();
  } else {
    double s = std::sin(omega);
    out.coeffs() = (std::sin((1.0 - u) * omega) / s) * qa.coeffs() + (std::sin(u * omega) / s) * qb.coeffs();
  }
  return Rotation(out);
}

Pose interpolate_pose(const Pose& a, const Pose& b, double u) {
  return Pose{slerp(a.rotation, b.rotation, u), (1.0 - u) * a.translation + u * b.translation};
}

Vec2 project_pinhole(const CameraIntrinsics& intr, const Vec3& pt) {
  if (pt.z() <= 0.0) {
    throw PointBehindCamera("cannot project point with z <= 0 (z = " + std::to_string(pt.z()) + ")");
  }
  return Vec2(intr.fx * pt.x() / pt.z() + intr.cx, intr.fy * pt.y() / pt.z() + intr.cy);
}

std::vector<Vec2> project_pinhole(const CameraIntrinsics& intr, const std::vector<Vec3>& pts) {
  for (const Vec3& p : pts) {
    if (p.z() <= 0.0) {
      throw PointBehindCamera("cannot project point with z <= 0 (z = " + std::to_string(p.z()) + ")");
    }
  }
  const std::size_t n = pts.size();
  std::vector<double> x(n), y(n), z(n), u(n), v(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = pts[i].x();
    y[i] = pts[i].y();
    z[i] = pts[i].z();
  }
  kern::active().project_points(intr.fx, intr.fy, intr.cx, intr.cy, x.data(), y.data(), z.data(), n,
                                u.data(), v.data());
  std::vector<Vec2> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = Vec2(u[i], v[i]);
  return out;
}

Vec3 lift_to_3d(const CameraIntrinsics& intr, const Vec2& pixel, double depth) {
  if (depth <= 0.0) {
    throw NonPositiveDepth("cannot lift pixel at depth " + std::to_string(depth));
  }
  return Vec3((pixel.x() - intr.cx) / intr.fx * depth, (pixel.y() - intr.cy) / intr.fy * depth, depth);
}

Pose estimate_rigid(const std::vector<Vec3>& from, const std::vector<Vec3>& to) {
  if (from.size() != to.size()) {
    throw LengthMismatch("estimate_rigid: point lists differ in length");
  }
  const std::size_t n = from.size();
  if (n < 3) {
    throw DegenerateConfiguration("estimate_rigid needs at least 3 points, got " + std::to_string(n));
  }
  Vec3 cf = Vec3::Zero();
  Vec3 ct = Vec3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    cf += from[i];
    ct += to[i];
  }
  cf /= double(n);
  ct /= double(n);

  // Collinearity check on the centered scatter of the source set.
  Mat3 scatter = Mat3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    Vec3 d = from[i] - cf;
    scatter += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es(scatter);
  double l0 = es.eigenvalues()(2);  // largest
  double l1 = es.eigenvalues()(1);
  if (l1 <= 1e-15 + 1e-9 * l0) {
    throw DegenerateConfiguration("estimate_rigid: source points are collinear");
  }

  std::vector<double> fx(n), fy(n), fz(n), tx(n), ty(n), tz(n);
  for (std::size_t i = 0; i < n; ++i) {
    fx[i] = from[i].x();
    fy[i] = from[i].y();
    fz[i] = from[i].z();
    tx[i] = to[i].x();
    ty[i] = to[i].y();
    tz[i] = to[i].z();
  }
  double h[9];
  kern::active().cross_covariance(fx.data(), fy.data(), fz.data(), tx.data(), ty.data(), tz.data(),
                                  n, cf.data(), ct.data(), h);
  Mat3 H;
  H << h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8];

  Eigen::JacobiSVD<Mat3> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 U = svd.matrixU();
  Mat3 V = svd.matrixV();
  Mat3 R = V * U.transpose();
  if (R.determinant() < 0.0) {
    V.col(2) *= -1.0;
    R = V * U.transpose();
  }
  Rotation rot(R);
  return Pose{rot, ct - rot * cf};
}

}  // namespace toolmimic
