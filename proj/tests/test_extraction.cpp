#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "toolmimic/extraction.hpp"

using namespace toolmimic;

namespace {

Mask disc_mask(int w, int h, double cu, double cv, double radius) {
  Mask m(w, h);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      double du = u - cu, dv = v - cv;
      if (du * du + dv * dv <= radius * radius) m.set(u, v, 1);
    }
  }
  return m;
}

// Independent farthest-point sampling: same contract, naive implementation.
std::vector<std::pair<int, int>> naive_fps(const Mask& mask, int n) {
  auto boundary = mask_boundary(mask);
  auto [cu, cv] = mask_centroid(mask);
  std::size_t seed = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < boundary.size(); ++i) {
    double du = boundary[i].first - cu, dv = boundary[i].second - cv;
    double d = du * du + dv * dv;
    if (d < best) {
      best = d;
      seed = i;
    }
  }
  std::vector<std::size_t> chosen = {seed};
  while (int(chosen.size()) < n) {
    std::size_t far_idx = 0;
    double far = -1.0;
    for (std::size_t i = 0; i < boundary.size(); ++i) {
      double dmin = std::numeric_limits<double>::infinity();
      for (std::size_t c : chosen) {
        double du = boundary[i].first - boundary[c].first;
        double dv = boundary[i].second - boundary[c].second;
        dmin = std::min(dmin, du * du + dv * dv);
      }
      if (dmin > far) {
        far = dmin;
        far_idx = i;
      }
    }
    chosen.push_back(far_idx);
  }
  std::vector<std::pair<int, int>> out;
  for (std::size_t c : chosen) out.push_back(boundary[c]);
  return out;
}

}  // namespace

TEST_CASE("changepoint detection matches the brute-force single-split oracle") {
  // two-regime signal; penalty low enough to afford exactly one change
  std::vector<double> signal = {1, 1, 1, 1, 0, 0, 0, 0};
  double mean = 0.5;
  double var = 0.0;
  for (double s : signal) var += (s - mean) * (s - mean);
  var /= double(signal.size());
  double penalty = 0.5 * var;

  // oracle: best single split by exhaustive scan
  auto seg_cost = [&](int i, int j) {
    double sum = 0.0, ssq = 0.0;
    for (int k = i; k < j; ++k) {
      sum += signal[k];
      ssq += signal[k] * signal[k];
    }
    return ssq - sum * sum / double(j - i);
  };
  int best_split = -1;
  double best_cost = seg_cost(0, 8) + penalty;  // no-change cost
  for (int k = 1; k < 8; ++k) {
    double c = seg_cost(0, k) + seg_cost(k, 8) + 2 * penalty;
    if (c < best_cost) {
      best_cost = c;
      best_split = k;
    }
  }
  REQUIRE(best_split == 4);

  std::vector<int> changes = detect_changepoints(signal, penalty);
  REQUIRE(changes.size() == 1);
  CHECK(changes[0] == 4);
  CHECK(detect_function_keyframe(signal, penalty) == 4);
}

TEST_CASE("changepoint detection recovers multiple changes and reports the last") {
  std::vector<double> signal;
  std::mt19937 rng(401);
  std::normal_distribution<double> noise(0.0, 0.01);
  for (int i = 0; i < 20; ++i) signal.push_back(0.0 + noise(rng));
  for (int i = 0; i < 20; ++i) signal.push_back(1.0 + noise(rng));
  for (int i = 0; i < 20; ++i) signal.push_back(0.2 + noise(rng));
  std::vector<int> changes = detect_changepoints(signal, 0.5);
  REQUIRE(changes.size() == 2);
  CHECK(changes[0] == 20);
  CHECK(changes[1] == 40);
  CHECK(detect_function_keyframe(signal, 0.5) == 40);
}

TEST_CASE("constant signal yields no change") {
  std::vector<double> flat(30, 0.4);
  CHECK(detect_changepoints(flat, 0.1).empty());
  CHECK_THROWS_AS(detect_function_keyframe(flat, 0.1), NoChangeDetected);
}

TEST_CASE("changepoint penalty controls segmentation granularity") {
  // high penalty suppresses mild shifts
  std::vector<double> signal;
  for (int i = 0; i < 10; ++i) signal.push_back(0.0);
  for (int i = 0; i < 10; ++i) signal.push_back(0.05);
  CHECK(detect_changepoints(signal, 100.0).empty());
  CHECK_FALSE(detect_changepoints(signal, 1e-4).empty());
}

TEST_CASE("mean speed signal against a hand-built trajectory") {
  // 4 points translating at 0.2 m per frame at 10 Hz -> 2 m/s, then stopping
  std::vector<Cloud> frames;
  std::vector<double> ts;
  Vec3 base[4] = {Vec3(0, 0, 0), Vec3(0.1, 0, 0), Vec3(0, 0.1, 0), Vec3(0, 0, 0.1)};
  for (int t = 0; t < 6; ++t) {
    double shift = t < 3 ? 0.2 * t : 0.2 * 2 + 0.0;
    Cloud c;
    for (const Vec3& b : base) c.push_back(b + Vec3(shift, 0, 0));
    frames.push_back(c);
    ts.push_back(0.1 * t);
  }
  std::vector<double> speed = mean_speed_signal(frames, ts);
  REQUIRE(speed.size() == 5);
  CHECK(speed[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(speed[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(speed[3] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("transforms_from_tracks recovers a screw motion") {
  std::mt19937 rng(402);
  std::uniform_real_distribution<double> d(-0.2, 0.2);
  Cloud base;
  for (int i = 0; i < 12; ++i) base.push_back(Vec3(d(rng), d(rng), d(rng)));
  Pose step{Rotation::exp(Vec3(0.02, -0.01, 0.05)), Vec3(0.01, 0.02, -0.005)};
  std::vector<Cloud> frames = {base};
  for (int t = 1; t < 8; ++t) frames.push_back(transform_cloud(step, frames.back()));
  std::vector<Pose> poses = transforms_from_tracks(frames);
  REQUIRE(poses.size() == 7);
  for (const Pose& p : poses) {
    CHECK(p.rotation.angle_to(step.rotation) < 1e-9);
    CHECK((p.translation - step.translation).norm() < 1e-10);
  }
}

TEST_CASE("transforms_from_tracks rejects collinear frames") {
  std::vector<Cloud> frames;
  for (int t = 0; t < 3; ++t) {
    Cloud c;
    for (int i = 0; i < 5; ++i) c.push_back(Vec3(0.1 * i, 0.2 * i, 0.0 * i));
    frames.push_back(c);
  }
  CHECK_THROWS_AS(transforms_from_tracks(frames), DegenerateConfiguration);
}

TEST_CASE("grasp keyframe: earliest overlap and its centroid") {
  int w = 20, h = 20;
  std::vector<Mask> hand, tool;
  for (int t = 0; t < 5; ++t) {
    Mask ht(w, h), tl(w, h);
    // tool occupies a fixed block
    for (int v = 8; v <= 12; ++v)
      for (int u = 8; u <= 12; ++u) tl.set(u, v, 1);
    // hand approaches from the left, overlapping from t=3
    int hu = 2 + 2 * t;
    for (int v = 9; v <= 11; ++v)
      for (int u = hu; u <= hu + 1; ++u) ht.set(u, v, 1);
    hand.push_back(ht);
    tool.push_back(tl);
  }
  GraspDetection det = detect_grasp_keyframe(hand, tool);
  CHECK(det.t_grasp == 3);
  // at t=3 hand covers u in {8,9}, v in {9,10,11}; intersection = same block
  CHECK(det.pixel.x() == doctest::Approx(8.5));
  CHECK(det.pixel.y() == doctest::Approx(10.0));

  // single-pixel overlap reports that pixel
  std::vector<Mask> hand1(1, Mask(w, h)), tool1(1, Mask(w, h));
  hand1[0].set(4, 5, 1);
  tool1[0].set(4, 5, 1);
  tool1[0].set(6, 5, 1);
  GraspDetection single = detect_grasp_keyframe(hand1, tool1);
  CHECK(single.pixel.x() == 4.0);
  CHECK(single.pixel.y() == 5.0);

  std::vector<Mask> never_h(3, Mask(w, h)), never_t(3, Mask(w, h));
  never_t[0].set(1, 1, 1);
  CHECK_THROWS_AS(detect_grasp_keyframe(never_h, never_t), NoGraspContact);
}

TEST_CASE("prefunction keyframe scans IoU backwards from the function keyframe") {
  int w = 8, h = 1;
  auto stripe = [&](int lo, int hi) {
    Mask m(w, h);
    for (int u = lo; u <= hi; ++u) m.set(u, 0, 1);
    return m;
  };
  // IoU sequence vs a fixed target stripe [0..4]:
  std::vector<Mask> target(4, stripe(0, 4));
  std::vector<Mask> tool;
  tool.push_back(stripe(6, 7));  // IoU 0
  tool.push_back(stripe(5, 7));  // IoU 0
  tool.push_back(stripe(4, 7));  // IoU 1/8 = 0.125
  tool.push_back(stripe(3, 7));  // IoU 2/8 = 0.25
  CHECK(find_prefunction_keyframe(tool, target, 3, 0.1) == 1);
  // a looser threshold admits the later frame
  CHECK(find_prefunction_keyframe(tool, target, 3, 0.2) == 2);
  // fully disjoint masks: t_function - 1 qualifies immediately
  std::vector<Mask> far_tool(4, stripe(6, 7));
  CHECK(find_prefunction_keyframe(far_tool, target, 3, 0.1) == 2);
  // nothing clears the bar
  std::vector<Mask> overlap_tool(4, stripe(0, 4));
  CHECK_THROWS_AS(find_prefunction_keyframe(overlap_tool, target, 3, 0.1), NoPrefunctionFrame);
  // frames at or below t_grasp are excluded
  CHECK_THROWS_AS(find_prefunction_keyframe(tool, target, 3, 0.1, 2), NoPrefunctionFrame);
}

TEST_CASE("boundary candidates match a naive farthest-point sampler") {
  Mask m = disc_mask(40, 30, 20.0, 15.0, 9.0);
  for (int n : {2, 4, 8}) {
    auto got = sample_boundary_candidates(m, n);
    auto want = naive_fps(m, n);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(int(got[i].x()) == want[i].first);
      CHECK(int(got[i].y()) == want[i].second);
    }
  }
}

TEST_CASE("boundary candidates are deterministic, distinct, and on the boundary") {
  Mask m = disc_mask(64, 48, 30.0, 25.0, 12.0);
  auto a = sample_boundary_candidates(m, 8);
  auto b = sample_boundary_candidates(m, 8);
  REQUIRE(a.size() == 8);
  std::set<std::pair<int, int>> seen;
  auto boundary = mask_boundary(m);
  std::set<std::pair<int, int>> bset(boundary.begin(), boundary.end());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i] == b[i]);
    auto px = std::make_pair(int(a[i].x()), int(a[i].y()));
    CHECK(bset.count(px) == 1);
    CHECK(seen.insert(px).second);  // all distinct
  }
  CHECK_THROWS_AS(sample_boundary_candidates(disc_mask(10, 10, 5, 5, 1.0), 8), BoundaryTooSmall);
}

TEST_CASE("tracking keypoints: count, distinctness, membership, determinism") {
  Mask m = disc_mask(50, 50, 25.0, 25.0, 15.0);
  auto a = sample_tracking_keypoints(m, 32, 7);
  auto b = sample_tracking_keypoints(m, 32, 7);
  auto c = sample_tracking_keypoints(m, 32, 8);
  REQUIRE(a.size() == 32);
  CHECK(a == b);
  CHECK(a != c);  // different seed shifts the top-up draws
  std::set<std::pair<int, int>> seen;
  for (auto px : a) {
    CHECK(m.at(px.first, px.second) == 1);
    CHECK(seen.insert(px).second);
  }
  // exactly-n mask: all pixels selected
  Mask tiny(10, 10);
  for (int u = 0; u < 5; ++u) tiny.set(u, 0, 1);
  auto all = sample_tracking_keypoints(tiny, 5, 0);
  CHECK(all.size() == 5);
  CHECK_THROWS_AS(sample_tracking_keypoints(tiny, 6, 0), MaskTooSmall);
}

TEST_CASE("function point detection lifts the selected candidate") {
  std::vector<Vec2> candidates = {Vec2(10, 10), Vec2(20, 12), Vec2(30, 14)};
  FunctionPointContext ctx;
  ctx.task = TaskTriple{"pour the mug", "mug", "bowl"};
  ctx.intrinsics = CameraIntrinsics{100.0, 100.0, 32.0, 24.0, 64, 48};
  DepthMap depth;
  depth.set(20, 12, 0.8);
  ctx.depth = &depth;
  ctx.target_frame = TargetFrame{Vec3(0.1, 0.0, 0.7), Rotation::identity()};
  auto selector = scripted_selector({{"pour the mug", 1}});
  FunctionPointDetection det = detect_function_point(candidates, ctx, *selector);
  CHECK(det.pixel.x() == 20.0);
  Vec3 cam = lift_to_3d(ctx.intrinsics, Vec2(20, 12), 0.8);
  CHECK((det.point_target - (cam - Vec3(0.1, 0.0, 0.7))).norm() < 1e-12);

  auto bad = scripted_selector({{"pour the mug", 3}});
  CHECK_THROWS_AS(detect_function_point(candidates, ctx, *bad), SelectorOutOfRange);
  auto neg = scripted_selector({{"pour the mug", -1}});
  CHECK_THROWS_AS(detect_function_point(candidates, ctx, *neg), SelectorOutOfRange);
  auto nodepth = scripted_selector({{"pour the mug", 0}});
  CHECK_THROWS_AS(detect_function_point(candidates, ctx, *nodepth), MissingDepth);
  auto unknown = scripted_selector({});
  CHECK_THROWS_AS(detect_function_point(candidates, ctx, *unknown), UnknownTask);
}

TEST_CASE("keypoint propagation transports through the step transforms") {
  // known rigid motion per step; anchors at different frames must land on the
  // ground-truth rigid track
  std::mt19937 rng(403);
  std::uniform_real_distribution<double> d(-0.3, 0.3);
  int n = 9;
  std::vector<Pose> world(n);
  world[0] = Pose::identity();
  std::vector<Pose> steps;
  for (int t = 1; t < n; ++t) {
    Pose step{Rotation::exp(Vec3(d(rng), d(rng), d(rng)) * 0.2), Vec3(d(rng), d(rng), d(rng)) * 0.1};
    world[t] = step * world[t - 1];
    steps.push_back(step);
  }
  Vec3 func0(0.3, 0.0, 0.1), grasp0(0.0, 0.25, 0.1), center0(0.0, 0.0, 0.0);
  std::vector<double> ts;
  for (int t = 0; t < n; ++t) ts.push_back(0.1 * t);

  // anchor func at frame 5, grasp at 2, center at 0 using ground truth
  AnchoredPoint fa{world[5] * func0, 5};
  AnchoredPoint ga{world[2] * grasp0, 2};
  AnchoredPoint ca{world[0] * center0, 0};
  KeypointTrajectory traj = propagate_keypoints(fa, ga, ca, steps, ts);
  REQUIRE(traj.size() == std::size_t(n));
  for (int t = 0; t < n; ++t) {
    CHECK((traj.frames[t].func() - world[t] * func0).norm() < 1e-9);
    CHECK((traj.frames[t].grasp() - world[t] * grasp0).norm() < 1e-9);
    CHECK((traj.frames[t].center() - world[t] * center0).norm() < 1e-9);
  }
  CHECK((extract_effect_point(traj, 4) - world[4] * func0).norm() < 1e-12);

  std::vector<Pose> short_steps(steps.begin(), steps.end() - 1);
  CHECK_THROWS_AS(propagate_keypoints(fa, ga, ca, short_steps, ts), LengthMismatch);
}

TEST_CASE("keyframe ordering validation") {
  KeyframeSet good{2, 5, 8};
  CHECK_NOTHROW(good.validate(10));
  CHECK_THROWS_AS((KeyframeSet{0, 5, 8}).validate(10), BadKeyframeOrder);   // grasp must be > 0
  CHECK_THROWS_AS((KeyframeSet{5, 5, 8}).validate(10), BadKeyframeOrder);   // strict order
  CHECK_THROWS_AS((KeyframeSet{2, 8, 5}).validate(10), BadKeyframeOrder);
  CHECK_THROWS_AS((KeyframeSet{2, 5, 9}).validate(10), BadKeyframeOrder);   // function < N-1
}

TEST_CASE("depth map round trip and missing entries") {
  DepthMap d;
  d.set(3, 4, 1.25);
  d.set(10, 2, 0.5);
  CHECK(d.at(3, 4) == 1.25);
  CHECK(!d.at(4, 3));
  Json j = d.to_json();
  DepthMap back = DepthMap::from_json(j, "test");
  CHECK(back.at(3, 4) == 1.25);
  CHECK(back.at(10, 2) == 0.5);
  CHECK(back.size() == 2);
  CHECK_THROWS_AS(d.set(1, 1, 0.0), NonPositiveDepth);
}
