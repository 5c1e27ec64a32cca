#include "toolmimic/fixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "toolmimic/controller.hpp"
#include "toolmimic/correspondence.hpp"
#include "toolmimic/errors.hpp"
#include "toolmimic/extraction.hpp"

namespace toolmimic {
namespace {

// Scene-layout jitter. Hand-rolled LCG so the same seed gives the same bytes
// on every platform; <random> distributions do not promise that.
struct LayoutRng {
  std::uint64_t state;
  explicit LayoutRng(std::uint64_t seed) : state(seed * 0x9e3779b97f4a7c15ull + 1ull) {}
  double unit() {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    return double(state >> 11) * (1.0 / 9007199254740992.0);
  }
  double jitter(double half_range) { return (2.0 * unit() - 1.0) * half_range; }
};

// L-shaped tool: handle along +x, head along +y, func tip at the head's end.
// Each bar station carries a small cross of offset points so the lattice is
// genuinely three dimensional (rigid fits need that).
struct ToolModel {
  std::vector<Vec3> lattice;
  Vec3 tip{0.0, 0.0, 0.0};
  Vec3 grasp{0.0, 0.0, 0.0};
};

ToolModel l_tool(double handle_len, double head_len, double grasp_x) {
  ToolModel m;
  const double step = 0.01, r = 0.008;
  auto cross_points = [&](const Vec3& at, int along) {
    m.lattice.push_back(at);
    for (int axis = 0; axis < 3; ++axis) {
      if (axis == along) continue;
      Vec3 off = Vec3::Zero();
      off[axis] = r;
      m.lattice.push_back(at + off);
      m.lattice.push_back(at - off);
    }
  };
  for (int i = 0; step * i <= handle_len + 1e-9; ++i) cross_points(Vec3(step * i, 0.0, 0.0), 0);
  for (int j = 1; step * j <= head_len + 1e-9; ++j) cross_points(Vec3(0.0, step * j, 0.0), 1);
  m.tip = Vec3(0.0, head_len, 0.0);
  m.grasp = Vec3(grasp_x, 0.0, 0.0);
  return m;
}

std::vector<Vec3> ball_lattice(double radius, double step) {
  std::vector<Vec3> pts;
  int n = int(std::floor(radius / step));
  for (int i = -n; i <= n; ++i)
    for (int j = -n; j <= n; ++j)
      for (int k = -n; k <= n; ++k) {
        Vec3 p(step * i, step * j, step * k);
        if (p.norm() <= radius + 1e-12) pts.push_back(p);
      }
  return pts;
}

std::vector<Vec3> box_lattice(const Vec3& half, double step) {
  std::vector<Vec3> pts;
  int nx = int(std::floor(half.x() / step)), ny = int(std::floor(half.y() / step)),
      nz = int(std::floor(half.z() / step));
  for (int i = -nx; i <= nx; ++i)
    for (int j = -ny; j <= ny; ++j)
      for (int k = -nz; k <= nz; ++k) pts.push_back(Vec3(step * i, step * j, step * k));
  return pts;
}

std::vector<Vec3> transformed(const Pose& pose, const std::vector<Vec3>& pts) {
  std::vector<Vec3> out;
  out.reserve(pts.size());
  for (const Vec3& p : pts) out.push_back(pose * p);
  return out;
}

// Disc splats (radius 2) into an object mask and a shared min-z buffer.
void splat(const CameraIntrinsics& intr, const std::vector<Vec3>& pts, Mask& mask,
           std::vector<double>& zbuf) {
  for (const Vec3& p : pts) {
    Vec2 px = project_pinhole(intr, p);
    int u0 = int(std::lround(px.x())), v0 = int(std::lround(px.y()));
    for (int dv = -2; dv <= 2; ++dv)
      for (int du = -2; du <= 2; ++du) {
        if (du * du + dv * dv > 4) continue;
        int u = u0 + du, v = v0 + dv;
        if (!mask.in_bounds(u, v)) continue;
        mask.set(u, v, 1);
        double& z = zbuf[std::size_t(v) * intr.width + u];
        z = std::min(z, p.z());
      }
  }
}

DepthMap depth_from_zbuf(const CameraIntrinsics& intr, const std::vector<double>& zbuf) {
  DepthMap d;
  for (int v = 0; v < intr.height; ++v)
    for (int u = 0; u < intr.width; ++u) {
      double z = zbuf[std::size_t(v) * intr.width + u];
      if (std::isfinite(z)) d.set(u, v, z);
    }
  return d;
}

// Rotation about a fixed world-frame pivot.
Pose pivot_rotation(const Rotation& r, const Vec3& pivot) { return Pose{r, pivot - r * pivot}; }

Pose target_to_camera(const TargetFrame& tf) { return Pose{tf.orientation, tf.point}; }

Pose true_tool_pose(const Pose& tool_cam, const ToolModel& tool, const Pose& cam_from_target) {
  Pose in_target = cam_from_target.inverse() * tool_cam;
  Cloud cloud = Cloud::from_points(transformed(in_target, tool.lattice));
  FunctionalKeypoints k(in_target * tool.tip, in_target * tool.grasp, compute_center(cloud));
  return pose_from_keypoints(k);
}

struct KindParams {
  TaskTriple task;
  double transport_rot = 0.0;  // rad, about the grasp while carrying
  Vec3 transport_axis{0.0, 0.0, 1.0};
};

KindParams kind_params(const std::string& kind, LayoutRng& rng) {
  KindParams p;
  if (kind == "pour") {
    p.task = {"tip the ladle to pour into the bowl", "ladle", "bowl"};
    p.transport_rot = 0.30 + rng.jitter(0.05);
    p.transport_axis = Vec3(0.15, 0.10, 1.0).normalized();
  } else if (kind == "pound") {
    p.task = {"strike the peg with the mallet", "mallet", "peg"};
    p.transport_rot = 0.10 + rng.jitter(0.03);
  } else if (kind == "linear") {
    p.task = {"push the block with the squeegee", "squeegee", "block"};
    p.transport_rot = 0.0;
  } else {
    throw UnknownTask("unknown fixture kind: " + kind);
  }
  return p;
}

}  // namespace

std::vector<double> fixture_home_posture() { return {0.0, 0.6, 0.0, 1.0, 0.0, 0.5, 0.0}; }

Fixture make_fixture(const std::string& kind, std::uint64_t seed) {
  LayoutRng rng(seed);
  KindParams params = kind_params(kind, rng);

  CameraIntrinsics intr;
  intr.fx = intr.fy = 120.0;
  intr.cx = 80.0;
  intr.cy = 60.0;
  intr.width = 160;
  intr.height = 120;

  const int n_frames = 48;
  const double frame_dt = 0.125;
  const int t_grasp_design = 12;   // hand reaches the handle
  const int t_carry = 17;          // first carry interval
  const int t_function = 37;       // carry ends staged at the target
  const int n_carry = t_function - t_carry;

  ToolModel tool = l_tool(0.16, 0.10, 0.06);

  Vec3 tool_pos0(-0.17 + rng.jitter(0.012), 0.10 + rng.jitter(0.012), 0.87 + rng.jitter(0.02));
  Vec3 box_center(0.22 + rng.jitter(0.008), 0.16 + rng.jitter(0.008), 0.92 + rng.jitter(0.015));
  Vec3 box_half(0.055, 0.045, 0.035);
  Vec3 staging_off(-0.015 + rng.jitter(0.004), -0.024 + rng.jitter(0.004),
                   -0.020 + rng.jitter(0.004));
  double tilt_total = 0.50 + rng.jitter(0.05);

  // Tool pose track, camera frame. Carrying rotates about the grasp and
  // advances the tip on a straight line to its staging point by the target;
  // the tip lands there exactly at the function keyframe.
  std::vector<Pose> tool_cam(n_frames);
  tool_cam[0] = Pose{Rotation::identity(), tool_pos0};
  Vec3 tip_goal = box_center + staging_off;
  Vec3 tip_step = (tip_goal - (tool_cam[0] * tool.tip)) / double(n_carry);
  Rotation carry_rot = Rotation::exp(params.transport_axis * (params.transport_rot / n_carry));
  for (int k = 0; k + 1 < n_frames; ++k) {
    const Pose& cur = tool_cam[k];
    if (k < t_carry) {
      tool_cam[k + 1] = cur;
    } else if (k < t_function) {
      Pose spun = pivot_rotation(carry_rot, cur * tool.grasp) * cur;
      tool_cam[k + 1] = Pose{spun.rotation, spun.translation + tip_step};
    } else if (kind == "pour") {
      Rotation tilt = Rotation::exp(Vec3(0.0, 0.0, tilt_total / 10.0));
      tool_cam[k + 1] = pivot_rotation(tilt, cur * tool.tip) * cur;
    } else if (kind == "pound") {
      tool_cam[k + 1] = Pose{cur.rotation, cur.translation + Vec3(0.0, 0.004, 0.0)};
    } else {
      tool_cam[k + 1] = Pose{cur.rotation, cur.translation + Vec3(0.005, 0.0, 0.0)};
    }
  }

  // Hand: straight-line approach from the upper right (clear of both bars)
  // that keeps pixel separation until the contact frame, then rides on the
  // handle.
  std::vector<Vec3> hand_centers(n_frames);
  Vec3 grasp0 = tool_cam[0] * tool.grasp;
  Vec3 approach_dir(0.12, -0.20, -0.06);
  for (int i = 0; i < n_frames; ++i) {
    if (i < t_grasp_design) {
      double s = 0.40 + 0.60 * (1.0 - double(i) / t_grasp_design);
      hand_centers[i] = grasp0 + approach_dir * s;
    } else {
      // behind the handle so the grasp pixel keeps the tool's own depth
      hand_centers[i] = tool_cam[i] * tool.grasp + Vec3(0.0, 0.0, 0.02);
    }
  }

  std::vector<Vec3> box_points = box_lattice(box_half, 0.011);
  std::vector<Vec3> hand_points = ball_lattice(0.025, 0.01);

  DemoBundle bundle;
  bundle.task = params.task;
  bundle.intrinsics = intr;
  TargetFrame frame;
  frame.point = box_center;
  frame.orientation = Rotation::exp(Vec3(M_PI / 2.0, 0.0, 0.0));  // z up, x right
  bundle.target_frame = frame;

  std::vector<Vec3> track_model;
  for (std::size_t i = 0; i < tool.lattice.size(); i += 3) track_model.push_back(tool.lattice[i]);

  for (int i = 0; i < n_frames; ++i) {
    bundle.timestamps.push_back(frame_dt * i);
    bundle.tracks.push_back(Cloud::from_points(transformed(tool_cam[i], track_model)));

    std::vector<double> zbuf(std::size_t(intr.width) * intr.height,
                             std::numeric_limits<double>::infinity());
    Mask tool_mask(intr.width, intr.height), target_mask(intr.width, intr.height),
        hand_mask(intr.width, intr.height);
    splat(intr, transformed(tool_cam[i], tool.lattice), tool_mask, zbuf);
    splat(intr, transformed(Pose{Rotation::identity(), box_center}, box_points), target_mask, zbuf);
    splat(intr, transformed(Pose{Rotation::identity(), hand_centers[i]}, hand_points), hand_mask,
          zbuf);
    bundle.tool_masks.push_back(std::move(tool_mask));
    bundle.target_masks.push_back(std::move(target_mask));
    bundle.hand_masks.push_back(std::move(hand_mask));
    bundle.depth.push_back(depth_from_zbuf(intr, zbuf));
  }
  bundle.validate();

  // Measured keyframes: grasp and pre-function fall out of the rendered
  // masks; the function keyframe is the scripted end of the carry.
  GraspDetection grasp_det = detect_grasp_keyframe(bundle.hand_masks, bundle.tool_masks);
  int t_prefunction = find_prefunction_keyframe(bundle.tool_masks, bundle.target_masks, t_function,
                                                0.05, grasp_det.t_grasp);

  Pose cam_from_target = target_to_camera(frame);
  auto in_target = [&](const Vec3& p_cam) { return frame.to_target(p_cam); };

  Vec2 func_px_pre = project_pinhole(intr, tool_cam[t_prefunction] * tool.tip);
  Vec2 grasp_px = project_pinhole(intr, tool_cam[grasp_det.t_grasp] * tool.grasp);

  // Test scene: a second instance of the tool category with different arm
  // lengths, plus a rescaled target box, viewed by the same camera.
  ToolModel test_tool = l_tool(0.20, 0.08, 0.08);
  Vec3 test_tool_pos(-0.10 + rng.jitter(0.012), 0.10 + rng.jitter(0.012), 1.00 + rng.jitter(0.02));
  Rotation test_tool_rot = Rotation::exp(Vec3(0.0, 0.0, -0.15 + rng.jitter(0.06)));
  Pose test_tool_cam{test_tool_rot, test_tool_pos};
  Vec3 test_box_center(0.24 + rng.jitter(0.008), 0.10 + rng.jitter(0.008),
                       1.05 + rng.jitter(0.015));
  double box_scale = 1.25 + rng.jitter(0.05);
  std::vector<Vec3> test_box_points = box_lattice(box_half * box_scale, 0.011);

  TestScene scene;
  scene.task = params.task;
  scene.intrinsics = intr;
  TargetFrame test_frame;
  test_frame.point = test_box_center;
  test_frame.orientation = frame.orientation;
  scene.target_frame = test_frame;
  {
    std::vector<double> zbuf(std::size_t(intr.width) * intr.height,
                             std::numeric_limits<double>::infinity());
    Mask tool_mask(intr.width, intr.height), target_mask(intr.width, intr.height);
    splat(intr, transformed(test_tool_cam, test_tool.lattice), tool_mask, zbuf);
    splat(intr, transformed(Pose{Rotation::identity(), test_box_center}, test_box_points),
          target_mask, zbuf);
    scene.tool_mask = std::move(tool_mask);
    scene.target_mask = std::move(target_mask);
    scene.depth = depth_from_zbuf(intr, zbuf);
  }

  Vec2 test_func_px = project_pinhole(intr, test_tool_cam * test_tool.tip);
  Vec2 test_grasp_px = project_pinhole(intr, test_tool_cam * test_tool.grasp);

  // Scripted port answers. The selector picks the boundary candidate nearest
  // the true tip in the pre-function frame.
  std::vector<Vec2> candidates = sample_boundary_candidates(bundle.tool_masks[t_prefunction], 8);
  std::size_t tip_idx = 0;
  for (std::size_t c = 1; c < candidates.size(); ++c)
    if ((candidates[c] - func_px_pre).norm() < (candidates[tip_idx] - func_px_pre).norm())
      tip_idx = c;

  Fixture fx;
  fx.port_script = Json{
      {"schema_version", Fixture::kSchemaVersion},
      {"selector", Json{{params.task.instruction, int(tip_idx)}}},
      {"proposer",
       Json{{"func", Json{{"center", to_json(test_func_px)}, {"side", 24.0}}},
            {"grasp", Json{{"center", to_json(test_grasp_px)}, {"side", 24.0}}}}},
      {"correspondence",
       Json{{"func", to_json(test_func_px)}, {"grasp", to_json(test_grasp_px)}}},
      {"refiner_target_rad", 0.0},
  };

  // Anchor the scene to the robot: with the gripper on the test grasp point,
  // place the target frame so the tool's initial pose puts the gripper
  // exactly at the home posture's end effector pose.
  TransferContext ctx;
  ctx.demo_tool_mask0 = bundle.tool_masks[0];
  ctx.demo_func_pixel0 = project_pinhole(intr, tool_cam[0] * tool.tip);
  ctx.demo_grasp_pixel0 = project_pinhole(intr, tool_cam[0] * tool.grasp);
  ctx.task = params.task;
  auto proposer = scripted_proposer({{"func", PixelRegion{test_func_px, 24.0}},
                                     {"grasp", PixelRegion{test_grasp_px, 24.0}}});
  auto matcher = scripted_correspondence({{"func", test_func_px}, {"grasp", test_grasp_px}});
  FunctionalKeypoints k_test0 = transfer_keypoints(ctx, scene, test_frame, *proposer, *matcher);
  Pose t0 = pose_from_keypoints(k_test0);
  // Base placement: target up stays up, and the carry's net translation maps
  // to the base's inward diagonal (-x, +y). Sweeping across and slightly
  // toward the base keeps the elbow bent away from the straight-arm
  // singularity. The gripper orientation absorbs whatever rotation that
  // leaves.
  Vec3 effect_true = in_target(tool_cam[t_function] * tool.tip);
  Vec3 delta = effect_true * box_scale - k_test0.func();
  double yaw = 3.0 * M_PI / 4.0 - std::atan2(delta.y(), delta.x());
  Rotation r_t2b = Rotation::exp(Vec3(0.0, 0.0, yaw));
  std::vector<double> home = fixture_home_posture();
  Eigen::VectorXd q_home =
      Eigen::Map<const Eigen::VectorXd>(home.data(), Eigen::Index(home.size()));
  Pose ee_home = forward_kinematics(KinematicChain::default_chain(), q_home);
  Rotation r_grip = (r_t2b * t0.rotation).inverse() * ee_home.rotation;
  scene.grasp_in_tool =
      Pose{r_grip, t0.rotation.inverse() * (k_test0.grasp() - k_test0.func())};
  Pose start_grip = t0 * scene.grasp_in_tool;
  scene.target_to_base = Pose{r_t2b, ee_home.translation - r_t2b * start_grip.translation};
  scene.validate();

  Json poses = Json::array();
  for (int i = 0; i < n_frames; ++i)
    poses.push_back(to_json(true_tool_pose(tool_cam[i], tool, cam_from_target)));

  fx.bundle = std::move(bundle);
  fx.scene = std::move(scene);
  fx.ground_truth = Json{
      {"schema_version", Fixture::kSchemaVersion},
      {"kind", kind},
      {"seed", seed},
      {"keyframes", Json{{"t_grasp", grasp_det.t_grasp},
                         {"t_prefunction", t_prefunction},
                         {"t_function", t_function}}},
      {"func_target0", to_json(in_target(tool_cam[0] * tool.tip))},
      {"grasp_target0", to_json(in_target(tool_cam[0] * tool.grasp))},
      {"effect_point_target", to_json(in_target(tool_cam[t_function] * tool.tip))},
      {"func_pixel_prefunction", to_json(func_px_pre)},
      {"grasp_pixel", to_json(grasp_px)},
      {"tool_poses_target", poses},
      {"test", Json{{"func_pixel", to_json(test_func_px)},
                    {"grasp_pixel", to_json(test_grasp_px)},
                    {"func_target", to_json(test_frame.to_target(test_tool_cam * test_tool.tip))},
                    {"grasp_target",
                     to_json(test_frame.to_target(test_tool_cam * test_tool.grasp))}}},
  };
  return fx;
}

}  // namespace toolmimic
