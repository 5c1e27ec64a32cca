#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "toolmimic/bundle.hpp"
#include "toolmimic/jsonio.hpp"

namespace toolmimic {

/// A synthetic demonstration/test pair rendered from an analytic rigid-tool
/// motion. The bundle records an L-shaped tool that is approached by a hand,
/// grasped, carried to a target box, and operated there; masks, tracked
/// keypoints, and sparse depth all come from the same splat renderer, so the
/// extraction stages can recover the scripted keyframes and keypoints.
struct Fixture {
  static constexpr int kSchemaVersion = 1;

  DemoBundle bundle;
  TestScene scene;
  Json ground_truth;  // scripted keyframes, keypoints, and the true pose track
  Json port_script;   // answers for the scripted perception ports
};

/// Kinds: "pour" (carry then tilt about the tip), "pound" (carry then press
/// down), "linear" (pure translation throughout). Throws UnknownTask for
/// anything else. The seed jitters the scene layout; the same seed always
/// produces the same fixture, byte for byte.
Fixture make_fixture(const std::string& kind, std::uint64_t seed);

/// The bent arm posture the fixture anchors its test scene to: the scene's
/// target_to_base is chosen so the planned gripper trajectory starts exactly
/// at the default chain's pose in this posture.
std::vector<double> fixture_home_posture();

}  // namespace toolmimic
