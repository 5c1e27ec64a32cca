#include <doctest.h>

#include <cmath>
#include <random>

#include "toolmimic/geometry.hpp"

using namespace toolmimic;

namespace {

Rotation random_rotation(std::mt19937& rng, double max_angle = 3.1) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Vec3 axis;
  do {
    axis = Vec3(unit(rng), unit(rng), unit(rng));
  } while (axis.norm() < 1e-3);
  std::uniform_real_distribution<double> ang(0.0, max_angle);
  return Rotation::exp(axis.normalized() * ang(rng));
}

Vec3 random_vec(std::mt19937& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> unit(-scale, scale);
  return Vec3(unit(rng), unit(rng), unit(rng));
}

}  // namespace

TEST_CASE("rotation exp/log round trip") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> ang(0.0, M_PI - 1e-6);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    Vec3 axis(unit(rng), unit(rng), unit(rng));
    if (axis.norm() < 1e-3) continue;
    Vec3 w = axis.normalized() * ang(rng);
    Vec3 back = Rotation::exp(w).log();
    CHECK((back - w).norm() < 1e-12);
  }
}

TEST_CASE("rotation log magnitude stays within pi and sign is canonical") {
  std::mt19937 rng(12);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    Eigen::Quaterniond q(unit(rng), unit(rng), unit(rng), unit(rng));
    if (q.norm() < 1e-3) continue;
    Rotation r(q);
    CHECK(r.quat().w() >= 0.0);
    CHECK(r.log().norm() <= M_PI + 1e-12);
  }
}

TEST_CASE("rotation near the half-turn boundary") {
  Vec3 w(0.0, 0.0, M_PI);
  Rotation r = Rotation::exp(w);
  CHECK(r.log().norm() == doctest::Approx(M_PI).epsilon(1e-12));
  Vec3 p = r * Vec3(1.0, 0.0, 0.0);
  CHECK((p - Vec3(-1.0, 0.0, 0.0)).norm() < 1e-12);
}

TEST_CASE("tiny rotations survive the small-angle branches") {
  Vec3 w(1e-9, -2e-9, 0.5e-9);
  Vec3 back = Rotation::exp(w).log();
  CHECK((back - w).norm() < 1e-15);
  CHECK(Rotation::exp(Vec3::Zero()).log().norm() == 0.0);
}

TEST_CASE("slerp endpoints, fraction, and shorter arc") {
  std::mt19937 rng(13);
  for (int i = 0; i < 100; ++i) {
    Rotation a = random_rotation(rng);
    Rotation b = random_rotation(rng);
    CHECK(a.angle_to(slerp(a, b, 0.0)) < 1e-12);
    CHECK(b.angle_to(slerp(a, b, 1.0)) < 1e-12);
    double full = a.angle_to(b);
    double u = 0.37;
    Rotation mid = slerp(a, b, u);
    CHECK(a.angle_to(mid) == doctest::Approx(u * full).epsilon(1e-9));
    CHECK(mid.angle_to(b) == doctest::Approx((1.0 - u) * full).epsilon(1e-9));
  }
}

TEST_CASE("slerp hand case: quarter turn about z") {
  Rotation a;
  Rotation b = Rotation::exp(Vec3(0.0, 0.0, M_PI_2));
  Rotation mid = slerp(a, b, 0.5);
  CHECK((mid.log() - Vec3(0.0, 0.0, M_PI_4)).norm() < 1e-12);
}

TEST_CASE("slerp nearly-identical rotations uses the linear fallback smoothly") {
  Rotation a = Rotation::exp(Vec3(0.1, 0.2, 0.3));
  Rotation b = a * Rotation::exp(Vec3(1e-9, 0.0, 0.0));
  Rotation mid = slerp(a, b, 0.5);
  CHECK(a.angle_to(mid) < 1e-9);
}

TEST_CASE("rotation_about leaves the pivot fixed") {
  Pose p = rotation_about(Vec3(0.0, 0.0, 1.0), M_PI_2, Vec3(1.0, 0.0, 0.0));
  CHECK((p * Vec3(1.0, 0.0, 0.0) - Vec3(1.0, 0.0, 0.0)).norm() < 1e-15);
  CHECK((p * Vec3(2.0, 0.0, 0.0) - Vec3(1.0, 1.0, 0.0)).norm() < 1e-12);
}

TEST_CASE("pose composition and inverse") {
  std::mt19937 rng(14);
  for (int i = 0; i < 50; ++i) {
    Pose a{random_rotation(rng), random_vec(rng)};
    Pose b{random_rotation(rng), random_vec(rng)};
    Vec3 p = random_vec(rng);
    CHECK(((a * b) * p - a * (b * p)).norm() < 1e-12);
    CHECK((a.inverse() * (a * p) - p).norm() < 1e-12);
  }
}

TEST_CASE("pinhole projection hand values") {
  CameraIntrinsics intr{500.0, 500.0, 640.0, 360.0, 1280, 720};
  Vec2 px = project_pinhole(intr, Vec3(0.1, 0.0, 1.0));
  CHECK(px.x() == 690.0);
  CHECK(px.y() == 360.0);
  Vec2 px2 = project_pinhole(intr, Vec3(0.1, 0.05, 2.0));
  CHECK(px2.x() == doctest::Approx(665.0).epsilon(1e-15));
  CHECK(px2.y() == doctest::Approx(372.5).epsilon(1e-15));
}

TEST_CASE("projection rejects points behind the camera") {
  CameraIntrinsics intr{500.0, 500.0, 640.0, 360.0, 1280, 720};
  CHECK_THROWS_AS(project_pinhole(intr, Vec3(0.0, 0.0, 0.0)), PointBehindCamera);
  CHECK_THROWS_AS(project_pinhole(intr, Vec3(0.1, 0.1, -0.5)), PointBehindCamera);
  std::vector<Vec3> batch = {Vec3(0.0, 0.0, 1.0), Vec3(0.0, 0.0, -1.0)};
  CHECK_THROWS_AS(project_pinhole(intr, batch), PointBehindCamera);
}

TEST_CASE("lift/project round trip") {
  CameraIntrinsics intr{430.0, 460.0, 320.0, 240.0, 640, 480};
  std::mt19937 rng(15);
  std::uniform_real_distribution<double> d(0.1, 5.0);
  std::uniform_real_distribution<double> s(-0.8, 0.8);
  for (int i = 0; i < 200; ++i) {
    Vec3 p(s(rng), s(rng), d(rng));
    Vec2 px = project_pinhole(intr, p);
    Vec3 back = lift_to_3d(intr, px, p.z());
    CHECK((back - p).norm() < 1e-12);
  }
  CHECK_THROWS_AS(lift_to_3d(intr, Vec2(10.0, 10.0), 0.0), NonPositiveDepth);
  CHECK_THROWS_AS(lift_to_3d(intr, Vec2(10.0, 10.0), -1.0), NonPositiveDepth);
}

TEST_CASE("rigid estimation recovers exact transforms") {
  std::mt19937 rng(16);
  for (int i = 0; i < 200; ++i) {
    Rotation r = random_rotation(rng);
    Vec3 t = random_vec(rng);
    std::vector<Vec3> from, to;
    for (int k = 0; k < 10; ++k) {
      Vec3 p = random_vec(rng);
      from.push_back(p);
      to.push_back(r * p + t);
    }
    Pose est = estimate_rigid(from, to);
    CHECK(est.rotation.angle_to(r) < 1e-8);
    CHECK((est.translation - t).norm() < 1e-9);
  }
}

TEST_CASE("rigid estimation is equivariant under a common rigid motion") {
  std::mt19937 rng(17);
  for (int i = 0; i < 50; ++i) {
    std::vector<Vec3> from, to;
    for (int k = 0; k < 8; ++k) {
      from.push_back(random_vec(rng));
      to.push_back(random_vec(rng));
    }
    Pose g{random_rotation(rng), random_vec(rng)};
    std::vector<Vec3> gfrom, gto;
    for (int k = 0; k < 8; ++k) {
      gfrom.push_back(g * from[k]);
      gto.push_back(g * to[k]);
    }
    Pose base = estimate_rigid(from, to);
    Pose moved = estimate_rigid(gfrom, gto);
    Pose expect = g * base * g.inverse();
    CHECK(moved.rotation.angle_to(expect.rotation) < 1e-8);
    CHECK((moved.translation - expect.translation).norm() < 1e-8);
  }
}

TEST_CASE("rigid estimation handles planar sets with a proper rotation") {
  std::mt19937 rng(18);
  Rotation r = random_rotation(rng);
  Vec3 t(0.2, -0.1, 0.4);
  std::vector<Vec3> from, to;
  std::uniform_real_distribution<double> s(-1.0, 1.0);
  for (int k = 0; k < 12; ++k) {
    Vec3 p(s(rng), s(rng), 0.0);  // planar source set
    from.push_back(p);
    to.push_back(r * p + t);
  }
  Pose est = estimate_rigid(from, to);
  CHECK(est.rotation.matrix().determinant() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(est.rotation.angle_to(r) < 1e-8);
}

TEST_CASE("rigid estimation rejects degenerate input") {
  std::vector<Vec3> two_from = {Vec3(0, 0, 0), Vec3(1, 0, 0)};
  std::vector<Vec3> two_to = {Vec3(0, 0, 0), Vec3(1, 0, 0)};
  CHECK_THROWS_AS(estimate_rigid(two_from, two_to), DegenerateConfiguration);

  std::vector<Vec3> line_from, line_to;
  for (int k = 0; k < 5; ++k) {
    line_from.push_back(Vec3(0.1 * k, 0.2 * k, -0.05 * k));
    line_to.push_back(Vec3(0.1 * k, 0.2 * k, -0.05 * k));
  }
  CHECK_THROWS_AS(estimate_rigid(line_from, line_to), DegenerateConfiguration);

  std::vector<Vec3> short_to = {Vec3(0, 0, 0)};
  CHECK_THROWS_AS(estimate_rigid(line_from, short_to), LengthMismatch);
}

TEST_CASE("pose interpolation blends translation linearly") {
  Pose a{Rotation(), Vec3(0.0, 0.0, 0.0)};
  Pose b{Rotation::exp(Vec3(0.0, 0.0, M_PI_2)), Vec3(1.0, 2.0, 3.0)};
  Pose mid = interpolate_pose(a, b, 0.5);
  CHECK((mid.translation - Vec3(0.5, 1.0, 1.5)).norm() < 1e-15);
  CHECK((mid.rotation.log() - Vec3(0.0, 0.0, M_PI_4)).norm() < 1e-12);
}
