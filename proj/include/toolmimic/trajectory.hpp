#pragma once

#include <memory>
#include <string>
#include <vector>

#include "toolmimic/jsonio.hpp"
#include "toolmimic/keypoints.hpp"

namespace toolmimic {

/// Azimuth/radius warp of a demonstrated tool trajectory (target frame) onto
/// the test tool's start. Rotations are conjugated by the z rotation, so the
/// per-step rotation magnitudes of the input are preserved exactly;
/// translations are rotated and scaled in xy only.
struct WarpResult {
  std::vector<Pose> poses;
  double delta_psi = 0.0;  // applied azimuth change, radians
  double rho = 1.0;        // applied xy radius scale
};

/// Warps `demo_poses` so the initial function point (the first pose's
/// translation) moves to the azimuth and xy radius of `test_func0`. Throws
/// DegenerateProjection when either initial point has an xy norm below 1e-6
/// (the azimuth is undefined on the z axis).
WarpResult warp_trajectory(const std::vector<Pose>& demo_poses, const Vec3& test_func0);

/// Resamples a timed pose sequence to n poses uniform in time across the
/// original span (pose interpolation between bracketing samples).
std::vector<Pose> resample_poses(const std::vector<Pose>& poses,
                                 const std::vector<double>& timestamps, int n);

/// Right-multiplies a constant so the last pose lands on `goal`; per-step
/// world-frame motions are unchanged.
std::vector<Pose> anchor_to_goal(const std::vector<Pose>& poses, const Pose& goal);

struct Aabb {
  Vec3 lo{0.0, 0.0, 0.0};
  Vec3 hi{0.0, 0.0, 0.0};
};

/// Squared Euclidean distance from a point to an axis-aligned box (zero
/// inside).
double aabb_dist2(const Vec3& p, const Aabb& box);

/// Signed distance from a point to an axis-aligned box: the Euclidean
/// distance outside, the negated depth to the nearest face inside.
double aabb_signed_dist(const Vec3& p, const Aabb& box);

struct PlanConfig {
  int n_steps = 50;
  double dt = 0.1;                 // seconds per step
  double v_max = 0.5;              // m/s
  double w_max = 1.5;              // rad/s
  double clearance_margin = 0.01;  // m, kept between proxy points and obstacles
  double relax_fraction = 0.30;    // leading fraction free to deviate from the reference
  std::vector<Aabb> obstacles;     // target frame
  int max_outer = 25;              // multiplier updates
  int max_inner = 200;             // quasi-Newton steps per multiplier update

  Json to_json() const;
  static PlanConfig from_json(const Json& j);
};

/// Worst-case constraint numbers of a finished (or abandoned) plan, written
/// alongside every trajectory.
struct ConstraintReport {
  double keyframe_residual_pos = 0.0;  // m, max over both pinned endpoints
  double keyframe_residual_rot = 0.0;  // rad
  double max_speed = 0.0;              // m/s over consecutive steps
  double max_angular_speed = 0.0;      // rad/s
  double min_clearance = 0.0;          // m, min proxy-to-obstacle distance; +inf without obstacles
  double objective = 0.0;
  int outer_iterations = 0;
  bool converged = false;

  Json to_json() const;
  static ConstraintReport from_json(const Json& j);
};

struct TrajectoryPlan {
  static constexpr int kSchemaVersion = 1;

  std::vector<double> timestamps;  // seconds from motion start, uniform dt
  std::vector<Pose> poses;         // tool poses, target frame
  ConstraintReport report;

  Json to_json(const std::string& cfg_hash) const;
  static TrajectoryPlan from_json(const Json& j);
};

/// Raised when the multiplier loop runs out of iterations; carries the best
/// iterate found so far.
class MaxIterationsExceeded : public Error {
public:
  MaxIterationsExceeded(const std::string& what, TrajectoryPlan best)
      : Error("max_iterations_exceeded", what),
        best_(std::make_shared<TrajectoryPlan>(std::move(best))) {}
  const TrajectoryPlan& best_plan() const { return *best_; }

private:
  std::shared_ptr<TrajectoryPlan> best_;
};

/// A fully specified synthesis problem: pinned endpoints, a reference to
/// follow after the relax window, collision proxy points on the tool.
struct PlanProblem {
  std::vector<Pose> reference;    // n_steps poses; reference.back() must equal the goal
  Pose start;                     // pinned first pose
  Pose goal;                      // pinned last pose
  std::vector<Vec3> proxy_points; // tool frame, checked against every obstacle
  PlanConfig config;
};

/// Constrained synthesis: minimizes deviation from the reference outside the
/// relax window subject to per-step speed bounds and obstacle clearance, with
/// both endpoints pinned exactly. Throws InfeasibleProblem when the endpoint
/// gap exceeds the speed budget or a pinned endpoint violates clearance;
/// MaxIterationsExceeded (with the best iterate) when the solver stalls.
TrajectoryPlan solve_plan(const PlanProblem& problem);

/// Warp + resample + goal-anchor + solve, end to end. `demo_poses` and
/// `demo_times` are the demonstrated segment (grasp through function
/// keyframe), `k_test0` the test tool's triple at its start pose, `goal` the
/// composed function-correspondence pose applied to the start pose.
TrajectoryPlan plan_trajectory(const std::vector<Pose>& demo_poses,
                               const std::vector<double>& demo_times,
                               const FunctionalKeypoints& k_test0, const Pose& goal,
                               const PlanConfig& config);

/// Tool-frame plan to gripper targets in the robot base frame:
/// base_from_target * pose * grasp_in_tool, per step.
std::vector<Pose> tool_to_ee_trajectory(const std::vector<Pose>& tool_poses,
                                        const Pose& grasp_in_tool, const Pose& target_to_base);

}  // namespace toolmimic
