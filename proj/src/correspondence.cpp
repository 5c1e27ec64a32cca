#include "toolmimic/correspondence.hpp"

#include <algorithm>
#include <cmath>

#include "toolmimic/image.hpp"
#include "toolmimic/jsonio.hpp"

namespace toolmimic {

std::vector<double> CorrespondenceConfig::default_offsets() {
  const double deg = M_PI / 180.0;
  return {-45 * deg, -30 * deg, -10 * deg, 0.0, 10 * deg, 30 * deg, 45 * deg};
}

Json CorrespondenceConfig::to_json() const {
  Json j;
  j["offsets_rad"] = offsets_rad;
  j["render_dir"] = render_dir;
  return j;
}

CorrespondenceConfig CorrespondenceConfig::from_json(const Json& j) {
  CorrespondenceConfig c;
  if (j.contains("offsets_rad")) {
    c.offsets_rad.clear();
    for (const auto& v : j.at("offsets_rad")) c.offsets_rad.push_back(v.get<double>());
  }
  if (j.contains("render_dir")) c.render_dir = j.at("render_dir").get<std::string>();
  if (c.offsets_rad.empty()) throw SchemaError("offsets_rad must be non-empty");
  return c;
}

Rotation align_plane(const Vec3& from, const Vec3& to, const Vec3& fallback_axis) {
  Vec3 cross = from.cross(to);
  double dot = from.dot(to);
  double cn = cross.norm();
  if (cn < 1e-12) {
    if (dot > 0.0) return Rotation::identity();
    return Rotation::exp(fallback_axis.normalized() * M_PI);
  }
  double angle = std::atan2(cn, dot);
  return Rotation::exp(cross / cn * angle);
}

double align_axis(const Vec3& from, const Vec3& to, const Vec3& normal) {
  return std::atan2(from.cross(to).dot(normal), from.dot(to));
}

namespace {

// Factors shared by every candidate offset: rotate in plane about the test
// normal at the test function point, align the planes, then translate the
// function point onto the effect point.
struct Stages {
  Vec3 p_test;   // pivot: test function point
  Vec3 n_test;   // test plane normal
  Pose t_plane;
  Pose t_point;
};

Pose axis_stage(const Stages& s, double angle) {
  return rotation_about(s.n_test, angle, s.p_test);
}

PortImage render_candidate(const RenderScene& scene, const Pose& t_func) {
  Cloud moved = transform_cloud(t_func, scene.tool_cloud);
  std::vector<Vec3> cam;
  cam.reserve(moved.size());
  for (std::size_t i = 0; i < moved.size(); ++i)
    cam.push_back(scene.target_frame.from_target(moved.point(i)));
  return render_cloud_splats(scene.intrinsics, cam);
}

}  // namespace

FunctionCorrespondence compose_function_correspondence(const FunctionalKeypoints& k_demo_tf,
                                                       const FunctionalKeypoints& k_test0,
                                                       const Vec3& effect_point,
                                                       const CorrespondenceConfig& config,
                                                       AxisRefiner& refiner,
                                                       const RenderScene* scene) {
  if (config.offsets_rad.empty()) throw SchemaError("no axis offsets configured");
  PlaneAxes demo = plane_axes(k_demo_tf.func(), k_demo_tf.grasp(), k_demo_tf.center());
  PlaneAxes test = plane_axes(k_test0.func(), k_test0.grasp(), k_test0.center());

  Stages s;
  s.p_test = k_test0.func();
  s.n_test = test.n;
  // antiparallel normals fall back to a half turn about the test u axis,
  // which is perpendicular to both normals
  Rotation r_plane = align_plane(test.n, demo.n, test.u);
  s.t_plane = Pose{r_plane, s.p_test - r_plane * s.p_test};
  s.t_point = Pose{Rotation::identity(), effect_point - s.p_test};

  // in-plane misalignment after plane alignment, measured in the demo plane
  double beta = align_axis(r_plane * test.u, demo.u, demo.n);

  AxisQuery query;
  if (scene) {
    query.demo_function_frame = scene->demo_function_frame;
    query.task = scene->task;
  }
  for (std::size_t i = 0; i < config.offsets_rad.size(); ++i) {
    double offset = config.offsets_rad[i];
    AxisCandidate cand;
    cand.offset_rad = offset;
    if (scene) {
      Pose t_func_i = s.t_point * s.t_plane * axis_stage(s, beta + offset);
      cand.render = render_candidate(*scene, t_func_i);
      if (!config.render_dir.empty())
        write_pgm(config.render_dir + "/axis_candidate_" + std::to_string(i) + ".pgm",
                  cand.render);
    }
    query.candidates.push_back(std::move(cand));
  }

  int idx = refiner.select_axis(query);
  if (idx < 0 || std::size_t(idx) >= config.offsets_rad.size())
    throw RefinerOutOfRange("axis refiner returned candidate " + std::to_string(idx) + " of " +
                            std::to_string(config.offsets_rad.size()));

  FunctionCorrespondence out;
  out.chosen_offset_rad = config.offsets_rad[idx];
  out.t_plane = s.t_plane;
  out.t_point = s.t_point;
  out.t_axis = axis_stage(s, beta + out.chosen_offset_rad);
  out.t_func = out.t_point * out.t_plane * out.t_axis;
  out.k_test_at_tf = FunctionalKeypoints(out.t_func * k_test0.func(), out.t_func * k_test0.grasp(),
                                         out.t_func * k_test0.center());
  return out;
}

Json FunctionCorrespondence::to_json(const std::string& cfg_hash) const {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["config_hash"] = cfg_hash;
  j["t_point"] = toolmimic::to_json(t_point);
  j["t_plane"] = toolmimic::to_json(t_plane);
  j["t_axis"] = toolmimic::to_json(t_axis);
  j["chosen_offset_deg"] = chosen_offset_rad * 180.0 / M_PI;
  j["t_func"] = toolmimic::to_json(t_func);
  Json k;
  k["func"] = toolmimic::to_json(k_test_at_tf.func());
  k["grasp"] = toolmimic::to_json(k_test_at_tf.grasp());
  k["center"] = toolmimic::to_json(k_test_at_tf.center());
  j["keypoints_at_function"] = k;
  return j;
}

FunctionCorrespondence FunctionCorrespondence::from_json(const Json& j) {
  if (require_field(j, "schema_version", "correspondence").get<int>() != kSchemaVersion)
    throw SchemaError("unsupported correspondence schema_version");
  FunctionCorrespondence c;
  c.t_point = pose_from_json(require_field(j, "t_point", "correspondence"), "t_point");
  c.t_plane = pose_from_json(require_field(j, "t_plane", "correspondence"), "t_plane");
  c.t_axis = pose_from_json(require_field(j, "t_axis", "correspondence"), "t_axis");
  c.chosen_offset_rad =
      require_field(j, "chosen_offset_deg", "correspondence").get<double>() * M_PI / 180.0;
  c.t_func = pose_from_json(require_field(j, "t_func", "correspondence"), "t_func");
  const Json& k = require_field(j, "keypoints_at_function", "correspondence");
  c.k_test_at_tf = FunctionalKeypoints(vec3_from_json(require_field(k, "func", "keypoints"), "func"),
                                       vec3_from_json(require_field(k, "grasp", "keypoints"), "grasp"),
                                       vec3_from_json(require_field(k, "center", "keypoints"), "center"));
  return c;
}

namespace {

Vec3 match_and_lift(const TransferContext& ctx, const TestScene& scene,
                    const TargetFrame& target_frame, RegionProposer& proposer,
                    DenseCorrespondence& correspondence, const PortImage& demo_marked,
                    const PortImage& test_img, const Vec2& demo_pixel, const std::string& role) {
  RegionQuery rq;
  rq.demo_marked_frame = demo_marked;
  rq.test_frame = test_img;
  rq.test_tool_mask = &scene.tool_mask;
  rq.demo_pixel = demo_pixel;
  rq.role = role;
  rq.task = ctx.task;
  PixelRegion region = proposer.propose_region(rq);

  // widen narrow proposals so the matcher has context to work with
  MaskBBox bb = mask_bbox(scene.tool_mask);
  double bb_side = std::max(bb.width(), bb.height());
  region.side = std::max({region.side, 24.0, 0.25 * bb_side});

  int w = scene.tool_mask.width, h = scene.tool_mask.height;
  int u0 = std::max(0, int(std::floor(region.center.x() - region.side / 2)));
  int u1 = std::min(w - 1, int(std::ceil(region.center.x() + region.side / 2)));
  int v0 = std::max(0, int(std::floor(region.center.y() - region.side / 2)));
  int v1 = std::min(h - 1, int(std::ceil(region.center.y() + region.side / 2)));
  bool touches_mask = false;
  for (int v = v0; v <= v1 && !touches_mask; ++v)
    for (int u = u0; u <= u1; ++u)
      if (scene.tool_mask.at(u, v)) {
        touches_mask = true;
        break;
      }
  if (u1 < u0 || v1 < v0 || !touches_mask)
    throw RegionOutsideMask("proposed " + role + " region misses the test tool mask");

  CorrespondenceQuery cq;
  cq.demo_marked_frame = demo_marked;
  cq.test_frame = test_img;
  cq.demo_pixel = demo_pixel;
  cq.region = region;
  cq.role = role;
  std::optional<Vec2> match = correspondence.correspond(cq);
  if (!match) throw CorrespondenceFailed("no " + role + " match inside the proposed region");

  int mu = int(std::lround(match->x()));
  int mv = int(std::lround(match->y()));
  std::optional<double> z = scene.depth.at(mu, mv);
  if (!z)
    throw MissingDepth("no depth at matched " + role + " pixel (" + std::to_string(mu) + ", " +
                       std::to_string(mv) + ")");
  Vec3 cam = lift_to_3d(scene.intrinsics, *match, *z);
  return target_frame.to_target(cam);
}

}  // namespace

FunctionalKeypoints transfer_keypoints(const TransferContext& ctx, const TestScene& scene,
                                       const TargetFrame& target_frame, RegionProposer& proposer,
                                       DenseCorrespondence& correspondence) {
  PortImage demo_marked = image_from_mask(ctx.demo_tool_mask0);
  draw_disc(demo_marked, ctx.demo_func_pixel0.x(), ctx.demo_func_pixel0.y(), 3, 255);
  draw_disc(demo_marked, ctx.demo_grasp_pixel0.x(), ctx.demo_grasp_pixel0.y(), 3, 200);
  PortImage test_img = image_from_mask(scene.tool_mask);

  Vec3 func = match_and_lift(ctx, scene, target_frame, proposer, correspondence, demo_marked,
                             test_img, ctx.demo_func_pixel0, "func");
  Vec3 grasp = match_and_lift(ctx, scene, target_frame, proposer, correspondence, demo_marked,
                              test_img, ctx.demo_grasp_pixel0, "grasp");

  Cloud tool_cam = lift_masked_cloud(scene.intrinsics, scene.tool_mask, scene.depth);
  Vec3 center = compute_center(to_target_frame(tool_cam, target_frame));
  return FunctionalKeypoints(func, grasp, center);
}

}  // namespace toolmimic
