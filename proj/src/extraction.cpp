#include "toolmimic/extraction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "toolmimic/kernels.hpp"

namespace toolmimic {

Json ExtractionConfig::to_json() const {
  return Json{{"n_tracking_keypoints", n_tracking_keypoints},
              {"n_boundary_candidates", n_boundary_candidates},
              {"changepoint_penalty", changepoint_penalty},
              {"iou_threshold", iou_threshold},
              {"seed", seed}};
}

ExtractionConfig ExtractionConfig::from_json(const Json& j) {
  ExtractionConfig c;
  if (j.contains("n_tracking_keypoints")) c.n_tracking_keypoints = j["n_tracking_keypoints"].get<int>();
  if (j.contains("n_boundary_candidates")) c.n_boundary_candidates = j["n_boundary_candidates"].get<int>();
  if (j.contains("changepoint_penalty")) c.changepoint_penalty = j["changepoint_penalty"].get<double>();
  if (j.contains("iou_threshold")) c.iou_threshold = j["iou_threshold"].get<double>();
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  return c;
}

std::vector<std::pair<int, int>> sample_tracking_keypoints(const Mask& mask, int n,
                                                           std::uint64_t seed) {
  std::vector<std::pair<int, int>> mask_pixels;
  for (int v = 0; v < mask.height; ++v) {
    for (int u = 0; u < mask.width; ++u) {
      if (mask.at(u, v)) mask_pixels.emplace_back(u, v);
    }
  }
  if (int(mask_pixels.size()) < n) {
    throw MaskTooSmall("mask has " + std::to_string(mask_pixels.size()) + " pixels, need " +
                       std::to_string(n));
  }
  MaskBBox box = mask_bbox(mask);
  int g = int(std::ceil(std::sqrt(double(n))));
  std::vector<std::pair<int, int>> out;
  std::set<std::pair<int, int>> chosen;
  for (int gy = 0; gy < g && int(out.size()) < n; ++gy) {
    for (int gx = 0; gx < g && int(out.size()) < n; ++gx) {
      int u = box.u_min + int(std::floor((gx + 0.5) * box.width() / double(g)));
      int v = box.v_min + int(std::floor((gy + 0.5) * box.height() / double(g)));
      if (mask.in_bounds(u, v) && mask.at(u, v) && chosen.insert({u, v}).second) {
        out.emplace_back(u, v);
      }
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, mask_pixels.size() - 1);
  while (int(out.size()) < n) {
    auto px = mask_pixels[pick(rng)];
    if (chosen.insert(px).second) out.push_back(px);
  }
  return out;
}

std::vector<Pose> transforms_from_tracks(const std::vector<Cloud>& frames) {
  std::vector<Pose> out;
  if (frames.size() < 2) return out;
  out.reserve(frames.size() - 1);
  for (std::size_t t = 0; t + 1 < frames.size(); ++t) {
    out.push_back(estimate_rigid(frames[t].to_points(), frames[t + 1].to_points()));
  }
  return out;
}

std::vector<double> mean_speed_signal(const std::vector<Cloud>& frames,
                                      const std::vector<double>& timestamps) {
  if (frames.size() != timestamps.size()) {
    throw LengthMismatch("speed signal: frames and timestamps differ in length");
  }
  std::vector<double> out;
  if (frames.size() < 2) return out;
  out.reserve(frames.size() - 1);
  for (std::size_t t = 0; t + 1 < frames.size(); ++t) {
    double dt = timestamps[t + 1] - timestamps[t];
    if (!(dt > 0.0)) throw SchemaError("speed signal: non-increasing timestamps");
    const Cloud& a = frames[t];
    const Cloud& b = frames[t + 1];
    out.push_back(kern::active().mean_step_speed(a.x.data(), a.y.data(), a.z.data(), b.x.data(),
                                                 b.y.data(), b.z.data(), a.size(), 1.0 / dt));
  }
  return out;
}

std::vector<int> detect_changepoints(const std::vector<double>& signal, double penalty) {
  const int m = int(signal.size());
  if (m == 0) return {};
  // prefix sums for O(1) segment cost: C(i,j) = ssq - sum^2 / len over [i, j)
  std::vector<double> ps(m + 1, 0.0), ps2(m + 1, 0.0);
  for (int i = 0; i < m; ++i) {
    ps[i + 1] = ps[i] + signal[i];
    ps2[i + 1] = ps2[i] + signal[i] * signal[i];
  }
  auto seg_cost = [&](int i, int j) {
    double s = ps[j] - ps[i];
    return (ps2[j] - ps2[i]) - s * s / double(j - i);
  };

  std::vector<double> f(m + 1, 0.0);
  std::vector<int> prev(m + 1, 0);
  f[0] = -penalty;
  std::vector<int> candidates = {0};
  for (int t = 1; t <= m; ++t) {
    double best = std::numeric_limits<double>::infinity();
    int best_s = 0;
    for (int s : candidates) {
      double c = f[s] + seg_cost(s, t) + penalty;
      if (c < best) {
        best = c;
        best_s = s;
      }
    }
    f[t] = best;
    prev[t] = best_s;
    // PELT pruning: discard s that can never beat the current optimum
    std::vector<int> keep;
    keep.reserve(candidates.size() + 1);
    for (int s : candidates) {
      if (f[s] + seg_cost(s, t) <= f[t]) keep.push_back(s);
    }
    keep.push_back(t);
    candidates = std::move(keep);
  }

  std::vector<int> changes;
  for (int t = m; t > 0; t = prev[t]) {
    if (prev[t] > 0) changes.push_back(prev[t]);
  }
  std::sort(changes.begin(), changes.end());
  return changes;
}

int detect_function_keyframe(const std::vector<double>& speed_signal, double penalty) {
  std::vector<int> changes = detect_changepoints(speed_signal, penalty);
  if (changes.empty()) {
    throw NoChangeDetected("no changepoint found in the keypoint speed signal");
  }
  return changes.back();
}

GraspDetection detect_grasp_keyframe(const std::vector<Mask>& hand_masks,
                                     const std::vector<Mask>& tool_masks) {
  if (hand_masks.size() != tool_masks.size()) {
    throw LengthMismatch("grasp detection: mask streams differ in length");
  }
  for (std::size_t t = 0; t < hand_masks.size(); ++t) {
    const Mask& h = hand_masks[t];
    const Mask& tool = tool_masks[t];
    if (h.width != tool.width || h.height != tool.height) {
      throw LengthMismatch("grasp detection: mask sizes differ");
    }
    std::uint64_t inter = 0, uni = 0;
    kern::active().mask_overlap(h.data.data(), tool.data.data(), h.data.size(), &inter, &uni);
    if (inter == 0) continue;
    double su = 0.0, sv = 0.0;
    for (int v = 0; v < h.height; ++v) {
      for (int u = 0; u < h.width; ++u) {
        if (h.at(u, v) && tool.at(u, v)) {
          su += u;
          sv += v;
        }
      }
    }
    return GraspDetection{int(t), Vec2(su / double(inter), sv / double(inter))};
  }
  throw NoGraspContact("hand and tool masks never intersect");
}

int find_prefunction_keyframe(const std::vector<Mask>& tool_masks,
                              const std::vector<Mask>& target_masks, int t_function,
                              double iou_threshold, int t_grasp) {
  if (tool_masks.size() != target_masks.size()) {
    throw LengthMismatch("prefunction scan: mask streams differ in length");
  }
  if (t_function <= 0 || t_function > int(tool_masks.size())) {
    throw IndexOutOfRange("prefunction scan: function keyframe out of range");
  }
  for (int t = t_function - 1; t > t_grasp; --t) {
    if (mask_iou(tool_masks[t], target_masks[t]) < iou_threshold) return t;
  }
  throw NoPrefunctionFrame("no frame before the function keyframe clears the overlap threshold");
}

std::vector<Vec2> sample_boundary_candidates(const Mask& mask, int n) {
  auto boundary = mask_boundary(mask);
  if (int(boundary.size()) < n) {
    throw BoundaryTooSmall("mask boundary has " + std::to_string(boundary.size()) +
                           " pixels, need " + std::to_string(n));
  }
  auto [cu, cv] = mask_centroid(mask);
  const std::size_t m = boundary.size();
  std::vector<double> px(m), py(m);
  for (std::size_t i = 0; i < m; ++i) {
    px[i] = boundary[i].first;
    py[i] = boundary[i].second;
  }
  // seed: boundary pixel nearest the centroid, earliest in row-major order
  std::size_t seed_idx = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    double du = px[i] - cu, dv = py[i] - cv;
    double d = du * du + dv * dv;
    if (d < best) {
      best = d;
      seed_idx = i;
    }
  }
  std::vector<double> d2(m, std::numeric_limits<double>::infinity());
  std::vector<Vec2> out;
  out.reserve(n);
  std::size_t last = seed_idx;
  out.emplace_back(px[last], py[last]);
  while (int(out.size()) < n) {
    kern::active().min_dist2_update(px.data(), py.data(), m, px[last], py[last], d2.data());
    std::size_t far_idx = 0;
    double far = -1.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (d2[i] > far) {
        far = d2[i];
        far_idx = i;
      }
    }
    last = far_idx;
    out.emplace_back(px[last], py[last]);
  }
  return out;
}

FunctionPointDetection detect_function_point(const std::vector<Vec2>& candidates,
                                             const FunctionPointContext& context,
                                             FunctionPointSelector& selector) {
  if (candidates.empty()) throw EmptySet("no function point candidates");
  FunctionPointQuery query;
  query.annotated_frame = context.annotated_frame;
  query.candidate_pixels = candidates;
  query.task = context.task;
  int idx = selector.select_function_point(query);
  if (idx < 0 || idx >= int(candidates.size())) {
    throw SelectorOutOfRange("selector chose candidate " + std::to_string(idx) + " of " +
                             std::to_string(candidates.size()));
  }
  const Vec2& px = candidates[idx];
  if (context.depth == nullptr) throw MissingDepth("no depth for the pre-function frame");
  auto z = context.depth->at(int(std::lround(px.x())), int(std::lround(px.y())));
  if (!z) {
    throw MissingDepth("no depth at candidate pixel (" + std::to_string(px.x()) + ", " +
                       std::to_string(px.y()) + ")");
  }
  Vec3 cam = lift_to_3d(context.intrinsics, px, *z);
  return FunctionPointDetection{px, context.target_frame.to_target(cam)};
}

KeypointTrajectory propagate_keypoints(const AnchoredPoint& func, const AnchoredPoint& grasp,
                                       const AnchoredPoint& center,
                                       const std::vector<Pose>& step_poses,
                                       const std::vector<double>& timestamps) {
  const int n = int(timestamps.size());
  if (int(step_poses.size()) != n - 1) {
    throw LengthMismatch("propagation needs N-1 step transforms for N frames");
  }
  auto transport = [&](const AnchoredPoint& a) {
    if (a.frame < 0 || a.frame >= n) throw IndexOutOfRange("anchored keypoint frame out of range");
    std::vector<Vec3> track(n);
    track[a.frame] = a.point;
    for (int t = a.frame; t + 1 < n; ++t) track[t + 1] = step_poses[t] * track[t];
    for (int t = a.frame - 1; t >= 0; --t) track[t] = step_poses[t].inverse() * track[t + 1];
    return track;
  };
  std::vector<Vec3> f = transport(func), g = transport(grasp), c = transport(center);
  KeypointTrajectory traj;
  traj.timestamps = timestamps;
  traj.frames.reserve(n);
  for (int t = 0; t < n; ++t) {
    traj.frames.push_back(FunctionalKeypoints(f[t], g[t], c[t]));
  }
  return traj;
}

std::vector<Pose> ExtractionResult::tool_poses() const {
  std::vector<Pose> out;
  out.reserve(trajectory.size());
  for (const FunctionalKeypoints& k : trajectory.frames) out.push_back(pose_from_keypoints(k));
  return out;
}

Json ExtractionResult::to_json(const std::string& cfg_hash) const {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["config_hash"] = cfg_hash;
  j["task"] = toolmimic::to_json(task);
  j["intrinsics"] = Json{{"fx", intrinsics.fx}, {"fy", intrinsics.fy}, {"cx", intrinsics.cx},
                         {"cy", intrinsics.cy}, {"width", intrinsics.width}, {"height", intrinsics.height}};
  j["target_frame"] = Json{{"point", toolmimic::to_json(target_frame.point)},
                           {"quat", toolmimic::to_json(target_frame.orientation)}};
  j["keyframes"] = Json{{"t_grasp", keyframes.t_grasp},
                        {"t_prefunction", keyframes.t_prefunction},
                        {"t_function", keyframes.t_function}};
  j["timestamps"] = trajectory.timestamps;
  Json kp = Json::array();
  for (const FunctionalKeypoints& k : trajectory.frames) {
    kp.push_back(Json{{"func", toolmimic::to_json(k.func())},
                      {"grasp", toolmimic::to_json(k.grasp())},
                      {"center", toolmimic::to_json(k.center())}});
  }
  j["keypoints"] = std::move(kp);
  Json sp = Json::array();
  for (const Pose& p : step_poses) sp.push_back(toolmimic::to_json(p));
  j["step_poses"] = std::move(sp);
  j["effect_point"] = toolmimic::to_json(effect_point);
  j["demo_target_dims"] = toolmimic::to_json(demo_target_dims);
  j["function_pixel"] = toolmimic::to_json(function_pixel);
  j["grasp_pixel"] = toolmimic::to_json(grasp_pixel);
  j["demo_pixels"] = Json{{"func", toolmimic::to_json(demo_func_pixel0)},
                          {"grasp", toolmimic::to_json(demo_grasp_pixel0)}};
  return j;
}

ExtractionResult ExtractionResult::from_json(const Json& j) {
  const Json& v = require_field(j, "schema_version", "extraction");
  if (!v.is_number_integer() || v.get<int>() != 1) {
    throw SchemaError("extraction: unsupported schema_version (expected 1)");
  }
  ExtractionResult r;
  r.task = task_from_json(require_field(j, "task", "extraction"), "extraction.task");
  const Json& intr = require_field(j, "intrinsics", "extraction");
  r.intrinsics.fx = require_field(intr, "fx", "extraction.intrinsics").get<double>();
  r.intrinsics.fy = require_field(intr, "fy", "extraction.intrinsics").get<double>();
  r.intrinsics.cx = require_field(intr, "cx", "extraction.intrinsics").get<double>();
  r.intrinsics.cy = require_field(intr, "cy", "extraction.intrinsics").get<double>();
  r.intrinsics.width = require_field(intr, "width", "extraction.intrinsics").get<int>();
  r.intrinsics.height = require_field(intr, "height", "extraction.intrinsics").get<int>();
  const Json& tf = require_field(j, "target_frame", "extraction");
  r.target_frame.point = vec3_from_json(require_field(tf, "point", "extraction.target_frame"),
                                        "extraction.target_frame.point");
  r.target_frame.orientation = rotation_from_json(require_field(tf, "quat", "extraction.target_frame"),
                                                  "extraction.target_frame.quat");
  const Json& kf = require_field(j, "keyframes", "extraction");
  r.keyframes.t_grasp = require_field(kf, "t_grasp", "extraction.keyframes").get<int>();
  r.keyframes.t_prefunction = require_field(kf, "t_prefunction", "extraction.keyframes").get<int>();
  r.keyframes.t_function = require_field(kf, "t_function", "extraction.keyframes").get<int>();
  const Json& ts = require_field(j, "timestamps", "extraction");
  for (const auto& e : ts) r.trajectory.timestamps.push_back(e.get<double>());
  const Json& kp = require_field(j, "keypoints", "extraction");
  for (std::size_t t = 0; t < kp.size(); ++t) {
    std::string what = "extraction.keypoints[" + std::to_string(t) + "]";
    r.trajectory.frames.push_back(
        FunctionalKeypoints(vec3_from_json(require_field(kp[t], "func", what), what + ".func"),
                            vec3_from_json(require_field(kp[t], "grasp", what), what + ".grasp"),
                            vec3_from_json(require_field(kp[t], "center", what), what + ".center")));
  }
  const Json& sp = require_field(j, "step_poses", "extraction");
  for (std::size_t t = 0; t < sp.size(); ++t) {
    r.step_poses.push_back(pose_from_json(sp[t], "extraction.step_poses[" + std::to_string(t) + "]"));
  }
  r.effect_point = vec3_from_json(require_field(j, "effect_point", "extraction"), "extraction.effect_point");
  r.demo_target_dims = vec3_from_json(require_field(j, "demo_target_dims", "extraction"),
                                      "extraction.demo_target_dims");
  r.function_pixel = vec2_from_json(require_field(j, "function_pixel", "extraction"),
                                    "extraction.function_pixel");
  r.grasp_pixel = vec2_from_json(require_field(j, "grasp_pixel", "extraction"), "extraction.grasp_pixel");
  const Json& dp = require_field(j, "demo_pixels", "extraction");
  r.demo_func_pixel0 = vec2_from_json(require_field(dp, "func", "extraction.demo_pixels"),
                                      "extraction.demo_pixels.func");
  r.demo_grasp_pixel0 = vec2_from_json(require_field(dp, "grasp", "extraction.demo_pixels"),
                                       "extraction.demo_pixels.grasp");
  if (r.trajectory.timestamps.size() != r.trajectory.frames.size() ||
      r.step_poses.size() + 1 != r.trajectory.frames.size()) {
    throw SchemaError("extraction: keypoints, timestamps, and step_poses lengths disagree");
  }
  r.keyframes.validate(r.trajectory.size());
  return r;
}

ExtractionResult run_extraction(const DemoBundle& bundle, const ExtractionConfig& config,
                                FunctionPointSelector& selector) {
  bundle.validate();
  const int n = int(bundle.n_frames());

  TargetFrame frame = resolve_target_frame(bundle.target_frame, bundle.intrinsics,
                                           bundle.target_masks[0], bundle.depth[0]);

  // all geometry downstream of this point lives in the target frame
  std::vector<Cloud> tracks_tgt;
  tracks_tgt.reserve(n);
  for (const Cloud& c : bundle.tracks) tracks_tgt.push_back(to_target_frame(c, frame));

  std::vector<Pose> step_poses = transforms_from_tracks(tracks_tgt);

  KeyframeSet keyframes;
  GraspDetection grasp_det;
  if (bundle.keyframes) {
    keyframes = *bundle.keyframes;
    keyframes.validate(n);
    // the grasp pixel still comes from the mask intersection at the given frame
    std::vector<Mask> hand_at = {bundle.hand_masks[keyframes.t_grasp]};
    std::vector<Mask> tool_at = {bundle.tool_masks[keyframes.t_grasp]};
    GraspDetection at = detect_grasp_keyframe(hand_at, tool_at);
    grasp_det = GraspDetection{keyframes.t_grasp, at.pixel};
  } else {
    grasp_det = detect_grasp_keyframe(bundle.hand_masks, bundle.tool_masks);
    std::vector<double> speed = mean_speed_signal(tracks_tgt, bundle.timestamps);
    double penalty = config.changepoint_penalty;
    if (penalty <= 0.0) {
      double mean = 0.0;
      for (double s : speed) mean += s;
      mean /= double(speed.size());
      double var = 0.0;
      for (double s : speed) var += (s - mean) * (s - mean);
      var /= double(speed.size());
      penalty = 3.0 * std::log(double(n)) * var;
    }
    keyframes.t_grasp = grasp_det.t_grasp;
    keyframes.t_function = detect_function_keyframe(speed, penalty);
    keyframes.t_prefunction = find_prefunction_keyframe(bundle.tool_masks, bundle.target_masks,
                                                        keyframes.t_function, config.iou_threshold,
                                                        keyframes.t_grasp);
    keyframes.validate(n);
  }

  // grasp keypoint: intersection centroid lifted at the grasp frame
  const DepthMap& grasp_depth = bundle.depth[keyframes.t_grasp];
  auto gz = grasp_depth.at(int(std::lround(grasp_det.pixel.x())), int(std::lround(grasp_det.pixel.y())));
  if (!gz) throw MissingDepth("no depth at the grasp pixel");
  Vec3 grasp_tgt = frame.to_target(lift_to_3d(bundle.intrinsics, grasp_det.pixel, *gz));

  // center keypoint: bbox center of the tool cloud in the initial frame
  Cloud tool_cloud0 = lift_masked_cloud(bundle.intrinsics, bundle.tool_masks[0], bundle.depth[0]);
  if (tool_cloud0.size() == 0) throw MissingDepth("no depth under the tool mask in frame 0");
  Vec3 center_tgt = compute_center(to_target_frame(tool_cloud0, frame));

  // function keypoint: selector-chosen boundary candidate in the pre-function frame
  const Mask& prefn_mask = bundle.tool_masks[keyframes.t_prefunction];
  std::vector<Vec2> candidates = sample_boundary_candidates(prefn_mask, config.n_boundary_candidates);
  FunctionPointContext ctx;
  ctx.annotated_frame = image_from_mask(prefn_mask);
  for (const Vec2& c : candidates) draw_disc(ctx.annotated_frame, c.x(), c.y(), 2, 255);
  ctx.task = bundle.task;
  ctx.intrinsics = bundle.intrinsics;
  ctx.depth = &bundle.depth[keyframes.t_prefunction];
  ctx.target_frame = frame;
  FunctionPointDetection fn = detect_function_point(candidates, ctx, selector);

  KeypointTrajectory traj = propagate_keypoints(
      AnchoredPoint{fn.point_target, keyframes.t_prefunction},
      AnchoredPoint{grasp_tgt, keyframes.t_grasp}, AnchoredPoint{center_tgt, 0}, step_poses,
      bundle.timestamps);

  ExtractionResult result;
  result.task = bundle.task;
  result.intrinsics = bundle.intrinsics;
  result.target_frame = frame;
  result.keyframes = keyframes;
  result.trajectory = std::move(traj);
  result.step_poses = std::move(step_poses);
  result.effect_point = extract_effect_point(result.trajectory, keyframes.t_function);
  Cloud target_cloud0 = lift_masked_cloud(bundle.intrinsics, bundle.target_masks[0], bundle.depth[0]);
  if (target_cloud0.size() == 0) throw MissingDepth("no depth under the target mask in frame 0");
  result.demo_target_dims = cloud_dims(to_target_frame(target_cloud0, frame));
  result.function_pixel = fn.pixel;
  result.grasp_pixel = grasp_det.pixel;
  result.demo_func_pixel0 = project_pinhole(bundle.intrinsics,
                                            frame.from_target(result.trajectory.frames[0].func()));
  result.demo_grasp_pixel0 = project_pinhole(bundle.intrinsics,
                                             frame.from_target(result.trajectory.frames[0].grasp()));
  return result;
}

}  // namespace toolmimic
