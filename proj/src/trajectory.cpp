#include "toolmimic/trajectory.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace toolmimic {

WarpResult warp_trajectory(const std::vector<Pose>& demo_poses, const Vec3& test_func0) {
  if (demo_poses.empty()) throw EmptySet("warp_trajectory: no poses");
  const Vec3& p0 = demo_poses.front().translation;
  double rp = std::hypot(p0.x(), p0.y());
  double rq = std::hypot(test_func0.x(), test_func0.y());
  if (rp < 1e-6 || rq < 1e-6)
    throw DegenerateProjection("initial function point lies on the target z axis");

  WarpResult out;
  out.delta_psi = std::atan2(test_func0.y(), test_func0.x()) - std::atan2(p0.y(), p0.x());
  out.rho = rq / rp;
  Rotation rz = Rotation::exp(Vec3(0.0, 0.0, out.delta_psi));
  Rotation rz_inv = rz.inverse();
  out.poses.reserve(demo_poses.size());
  for (const Pose& p : demo_poses) {
    Vec3 t = rz * p.translation;
    t.x() *= out.rho;
    t.y() *= out.rho;
    out.poses.push_back(Pose{rz * p.rotation * rz_inv, t});
  }
  return out;
}

std::vector<Pose> resample_poses(const std::vector<Pose>& poses,
                                 const std::vector<double>& timestamps, int n) {
  if (poses.size() != timestamps.size())
    throw LengthMismatch("resample_poses: pose/timestamp count mismatch");
  if (poses.size() < 2) throw EmptySet("resample_poses: need at least two poses");
  if (n < 2) throw EmptySet("resample_poses: need at least two output steps");
  for (std::size_t i = 1; i < timestamps.size(); ++i)
    if (timestamps[i] <= timestamps[i - 1])
      throw SchemaError("resample_poses: timestamps must be strictly increasing");

  double t0 = timestamps.front(), t1 = timestamps.back();
  std::vector<Pose> out;
  out.reserve(n);
  std::size_t j = 0;
  for (int i = 0; i < n; ++i) {
    double s = t0 + (t1 - t0) * double(i) / double(n - 1);
    while (j + 2 < timestamps.size() && timestamps[j + 1] < s) ++j;
    double u = (s - timestamps[j]) / (timestamps[j + 1] - timestamps[j]);
    u = std::clamp(u, 0.0, 1.0);
    out.push_back(interpolate_pose(poses[j], poses[j + 1], u));
  }
  return out;
}

std::vector<Pose> anchor_to_goal(const std::vector<Pose>& poses, const Pose& goal) {
  if (poses.empty()) throw EmptySet("anchor_to_goal: no poses");
  Pose shift = poses.back().inverse() * goal;
  std::vector<Pose> out;
  out.reserve(poses.size());
  for (const Pose& p : poses) out.push_back(p * shift);
  return out;
}

double aabb_dist2(const Vec3& p, const Aabb& box) {
  double d2 = 0.0;
  for (int i = 0; i < 3; ++i) {
    double e = std::max({box.lo[i] - p[i], p[i] - box.hi[i], 0.0});
    d2 += e * e;
  }
  return d2;
}

double aabb_signed_dist(const Vec3& p, const Aabb& box) {
  double out2 = 0.0;
  double inner = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    double q = std::max(box.lo[i] - p[i], p[i] - box.hi[i]);
    if (q > 0.0) out2 += q * q;
    inner = std::max(inner, q);
  }
  if (out2 > 0.0) return std::sqrt(out2);
  return inner;  // <= 0: depth to the nearest face
}

Json PlanConfig::to_json() const {
  Json j;
  j["n_steps"] = n_steps;
  j["dt"] = dt;
  j["v_max"] = v_max;
  j["w_max"] = w_max;
  j["clearance_margin"] = clearance_margin;
  j["relax_fraction"] = relax_fraction;
  j["max_outer"] = max_outer;
  j["max_inner"] = max_inner;
  Json obs = Json::array();
  for (const Aabb& b : obstacles) {
    Json jb;
    jb["lo"] = toolmimic::to_json(b.lo);
    jb["hi"] = toolmimic::to_json(b.hi);
    obs.push_back(jb);
  }
  j["obstacles"] = obs;
  return j;
}

PlanConfig PlanConfig::from_json(const Json& j) {
  PlanConfig c;
  if (j.contains("n_steps")) c.n_steps = j.at("n_steps").get<int>();
  if (j.contains("dt")) c.dt = j.at("dt").get<double>();
  if (j.contains("v_max")) c.v_max = j.at("v_max").get<double>();
  if (j.contains("w_max")) c.w_max = j.at("w_max").get<double>();
  if (j.contains("clearance_margin")) c.clearance_margin = j.at("clearance_margin").get<double>();
  if (j.contains("relax_fraction")) c.relax_fraction = j.at("relax_fraction").get<double>();
  if (j.contains("max_outer")) c.max_outer = j.at("max_outer").get<int>();
  if (j.contains("max_inner")) c.max_inner = j.at("max_inner").get<int>();
  if (j.contains("obstacles"))
    for (const Json& jb : j.at("obstacles")) {
      Aabb b;
      b.lo = vec3_from_json(require_field(jb, "lo", "obstacle"), "obstacle lo");
      b.hi = vec3_from_json(require_field(jb, "hi", "obstacle"), "obstacle hi");
      c.obstacles.push_back(b);
    }
  if (c.n_steps < 2 || c.dt <= 0 || c.v_max <= 0 || c.w_max <= 0)
    throw SchemaError("plan config: n_steps, dt, v_max, w_max must be positive");
  return c;
}

Json ConstraintReport::to_json() const {
  Json j;
  j["keyframe_residual_pos_m"] = keyframe_residual_pos;
  j["keyframe_residual_rot_rad"] = keyframe_residual_rot;
  j["max_speed_mps"] = max_speed;
  j["max_angular_speed_radps"] = max_angular_speed;
  if (std::isinf(min_clearance))
    j["min_clearance_m"] = nullptr;
  else
    j["min_clearance_m"] = min_clearance;
  j["objective"] = objective;
  j["outer_iterations"] = outer_iterations;
  j["converged"] = converged;
  return j;
}

ConstraintReport ConstraintReport::from_json(const Json& j) {
  ConstraintReport r;
  r.keyframe_residual_pos = require_field(j, "keyframe_residual_pos_m", "report").get<double>();
  r.keyframe_residual_rot = require_field(j, "keyframe_residual_rot_rad", "report").get<double>();
  r.max_speed = require_field(j, "max_speed_mps", "report").get<double>();
  r.max_angular_speed = require_field(j, "max_angular_speed_radps", "report").get<double>();
  const Json& mc = require_field(j, "min_clearance_m", "report");
  r.min_clearance = mc.is_null() ? std::numeric_limits<double>::infinity() : mc.get<double>();
  r.objective = require_field(j, "objective", "report").get<double>();
  r.outer_iterations = require_field(j, "outer_iterations", "report").get<int>();
  r.converged = require_field(j, "converged", "report").get<bool>();
  return r;
}

Json TrajectoryPlan::to_json(const std::string& cfg_hash) const {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["config_hash"] = cfg_hash;
  j["timestamps"] = timestamps;
  Json jp = Json::array();
  for (const Pose& p : poses) jp.push_back(toolmimic::to_json(p));
  j["poses"] = jp;
  j["constraint_report"] = report.to_json();
  return j;
}

TrajectoryPlan TrajectoryPlan::from_json(const Json& j) {
  if (require_field(j, "schema_version", "trajectory").get<int>() != kSchemaVersion)
    throw SchemaError("unsupported trajectory schema_version");
  TrajectoryPlan p;
  for (const Json& t : require_field(j, "timestamps", "trajectory")) p.timestamps.push_back(t.get<double>());
  for (const Json& jp : require_field(j, "poses", "trajectory"))
    p.poses.push_back(pose_from_json(jp, "trajectory pose"));
  if (p.poses.size() != p.timestamps.size())
    throw SchemaError("trajectory: pose/timestamp count mismatch");
  p.report = ConstraintReport::from_json(require_field(j, "constraint_report", "trajectory"));
  return p;
}

namespace {

// Inequality-constraint augmented Lagrangian term for c <= 0.
double al_term(double c, double lam, double mu) {
  double t = lam + mu * c;
  if (t <= 0.0) return -lam * lam / (2.0 * mu);
  return (t * t - lam * lam) / (2.0 * mu);
}

// `relative_slack` tightens every bound the solver works against, so that a
// solution feasible to solver tolerance still satisfies the true bounds.
constexpr double kRelativeSlack = 1e-6;
constexpr double kFeasTol = 1e-8;  // scaled violation accepted as feasible

class PlanSolver {
public:
  explicit PlanSolver(const PlanProblem& prob) : prob_(prob), cfg_(prob.config) {
    n_ = cfg_.n_steps;
    if (int(prob_.reference.size()) != n_)
      throw LengthMismatch("solve_plan: reference length does not match n_steps");
    Pose end_gap = prob_.reference.back().inverse() * prob_.goal;
    if (end_gap.translation.norm() > 1e-6 || end_gap.rotation.angle() > 1e-6)
      throw DegenerateConfiguration("solve_plan: reference does not end at the goal");

    bound_p_ = cfg_.v_max * cfg_.dt;
    bound_r_ = cfg_.w_max * cfg_.dt;
    bound_p2_ = bound_p_ * bound_p_ * (1.0 - kRelativeSlack);
    bound_r2_ = bound_r_ * bound_r_ * (1.0 - kRelativeSlack);
    margin_t_ = cfg_.clearance_margin * (1.0 + kRelativeSlack);

    t_relax_ = std::clamp(int(std::ceil(cfg_.relax_fraction * n_)), 1, n_ - 1);
    n_obs_ = int(cfg_.obstacles.size());
    n_prox_ = int(prob_.proxy_points.size());
    n_vel_ = n_ - 1;
    n_clear_ = (n_ - 2) * n_obs_ * n_prox_;
    lam_.assign(std::size_t(2) * n_vel_ + n_clear_, 0.0);

    precheck();
  }

  TrajectoryPlan run() {
    Eigen::VectorXd x = initial_guess();
    Eigen::VectorXd best_x = x;
    double best_v = std::numeric_limits<double>::infinity();
    double best_f = std::numeric_limits<double>::infinity();
    double prev_v = std::numeric_limits<double>::infinity();
    bool converged = false;
    int outer = 0;

    for (outer = 1; outer <= cfg_.max_outer; ++outer) {
      minimize_inner(x);

      std::vector<double> c = constraint_values(x);
      double v = scaled_violation(c);
      double f = objective(x);
      if (v < best_v - 1e-15 || (v <= best_v + 1e-15 && f < best_f)) {
        best_v = v;
        best_f = f;
        best_x = x;
      }
      if (v <= kFeasTol) {
        converged = true;
        break;
      }
      for (std::size_t j = 0; j < lam_.size(); ++j)
        lam_[j] = std::max(0.0, lam_[j] + mu_ * c[j]);
      if (v > 0.25 * prev_v) mu_ = std::min(mu_ * 10.0, 1e6);
      prev_v = v;
    }

    if (!converged) {
      TrajectoryPlan best = build_plan(best_x, false, cfg_.max_outer);
      throw MaxIterationsExceeded("trajectory synthesis did not converge in " +
                                      std::to_string(cfg_.max_outer) + " multiplier updates",
                                  std::move(best));
    }
    return build_plan(x, true, outer);
  }

private:
  const PlanProblem& prob_;
  const PlanConfig& cfg_;
  int n_ = 0, t_relax_ = 0, n_obs_ = 0, n_prox_ = 0, n_vel_ = 0, n_clear_ = 0;
  double bound_p_ = 0, bound_r_ = 0, bound_p2_ = 0, bound_r2_ = 0, margin_t_ = 0;
  std::vector<double> lam_;
  double mu_ = 100.0;

  int n_vars() const { return 6 * (n_ - 2); }

  // x layout: step t in [1, n-2] owns coords [6(t-1), 6t): delta then phi
  Pose pose_at(const Eigen::VectorXd& x, int t) const {
    if (t == 0) return prob_.start;
    if (t == n_ - 1) return prob_.goal;
    int b = 6 * (t - 1);
    Vec3 delta(x[b], x[b + 1], x[b + 2]);
    Vec3 phi(x[b + 3], x[b + 4], x[b + 5]);
    const Pose& ref = prob_.reference[t];
    return Pose{Rotation::exp(phi) * ref.rotation, ref.translation + delta};
  }

  void precheck() const {
    double dist = (prob_.goal.translation - prob_.start.translation).norm();
    double budget_p = double(n_ - 1) * std::sqrt(bound_p2_);
    if (dist > budget_p)
      throw InfeasibleProblem("endpoint distance " + std::to_string(dist) +
                              " m exceeds the speed budget " + std::to_string(budget_p) + " m");
    double ang = prob_.start.rotation.angle_to(prob_.goal.rotation);
    double budget_r = double(n_ - 1) * std::sqrt(bound_r2_);
    if (ang > budget_r)
      throw InfeasibleProblem("endpoint rotation " + std::to_string(ang) +
                              " rad exceeds the angular budget " + std::to_string(budget_r) +
                              " rad");
    for (const Pose& end : {prob_.start, prob_.goal})
      for (const Aabb& box : cfg_.obstacles)
        for (const Vec3& k : prob_.proxy_points)
          if (aabb_signed_dist(end * k, box) < cfg_.clearance_margin)
            throw InfeasibleProblem("a pinned endpoint violates the clearance margin");
  }

  Eigen::VectorXd initial_guess() const {
    // start-anchored copy of the reference, blended back onto it across the
    // relax window
    Pose shift = prob_.reference.front().inverse() * prob_.start;
    std::vector<Pose> init(n_);
    init[0] = prob_.start;
    init[n_ - 1] = prob_.goal;
    for (int t = 1; t <= n_ - 2; ++t) {
      init[t] = prob_.reference[t];
      if (t < t_relax_) {
        Pose anchored = prob_.reference[t] * shift;
        init[t] = interpolate_pose(anchored, prob_.reference[t], double(t) / double(t_relax_));
      }
    }
    detour_obstacles(init);

    Eigen::VectorXd x(n_vars());
    for (int t = 1; t <= n_ - 2; ++t) {
      int b = 6 * (t - 1);
      Vec3 delta = init[t].translation - prob_.reference[t].translation;
      Vec3 phi = (init[t].rotation * prob_.reference[t].rotation.inverse()).log();
      for (int i = 0; i < 3; ++i) {
        x[b + i] = delta[i];
        x[b + 3 + i] = phi[i];
      }
    }
    return x;
  }

  // Inside a box the signed-distance gradient points at the nearest face
  // only, which strands a straight-through path at a stationary point. Route
  // the guess around each penetrated box up front so the solver starts where
  // the distance field is informative.
  void detour_obstacles(std::vector<Pose>& init) const {
    double clr = margin_t_ + 0.005;
    for (const Aabb& box : cfg_.obstacles) {
      int ta = -1, tb = -1;
      for (int t = 1; t <= n_ - 2; ++t)
        for (const Vec3& k : prob_.proxy_points)
          if (aabb_signed_dist(init[t] * k, box) < clr) {
            if (ta < 0) ta = t;
            tb = t;
            break;
          }
      if (ta < 0) continue;

      // cheapest escape: the axis direction needing the smallest uniform bump
      double best_shift = std::numeric_limits<double>::infinity();
      Vec3 best_axis(0, 1, 0);
      for (int axis = 0; axis < 3; ++axis)
        for (int sign : {+1, -1}) {
          double need = 0.0;
          for (int t = ta; t <= tb; ++t)
            for (const Vec3& k : prob_.proxy_points) {
              Vec3 q = init[t] * k;
              if (aabb_signed_dist(q, box) >= clr) continue;
              double s = sign > 0 ? (box.hi[axis] + clr) - q[axis] : q[axis] - (box.lo[axis] - clr);
              need = std::max(need, s);
            }
          if (need < best_shift - 1e-12) {
            best_shift = need;
            best_axis = Vec3::Zero();
            best_axis[axis] = sign;
          }
        }
      if (!std::isfinite(best_shift)) continue;

      int w = std::max(4, (tb - ta + 1) / 2);
      auto ease = [](double u) { return u * u * (3.0 - 2.0 * u); };
      for (int t = std::max(1, ta - w); t <= std::min(n_ - 2, tb + w); ++t) {
        double lam = 1.0;
        if (t < ta) lam = ease(double(t - (ta - w)) / w);
        else if (t > tb) lam = ease(double((tb + w) - t) / w);
        init[t].translation += best_axis * (best_shift * lam);
      }
    }
  }

  double objective(const Eigen::VectorXd& x) const {
    double f = 0.0;
    for (int t = std::max(1, t_relax_); t <= n_ - 2; ++t) f += x.segment<6>(6 * (t - 1)).squaredNorm();
    return f;
  }

  double c_vel_pos(const Eigen::VectorXd& x, int t) const {
    return (pose_at(x, t + 1).translation - pose_at(x, t).translation).squaredNorm() - bound_p2_;
  }
  double c_vel_rot(const Eigen::VectorXd& x, int t) const {
    Rotation r = pose_at(x, t).rotation.inverse() * pose_at(x, t + 1).rotation;
    return r.log().squaredNorm() - bound_r2_;
  }
  double c_clear(const Eigen::VectorXd& x, int t, int o, int k) const {
    Vec3 p = pose_at(x, t) * prob_.proxy_points[k];
    return margin_t_ - aabb_signed_dist(p, cfg_.obstacles[o]);
  }

  int clear_index(int t, int o, int k) const {
    return 2 * n_vel_ + ((t - 1) * n_obs_ + o) * n_prox_ + k;
  }

  std::vector<double> constraint_values(const Eigen::VectorXd& x) const {
    std::vector<double> c(lam_.size());
    for (int t = 0; t < n_vel_; ++t) {
      c[t] = c_vel_pos(x, t);
      c[n_vel_ + t] = c_vel_rot(x, t);
    }
    for (int t = 1; t <= n_ - 2; ++t)
      for (int o = 0; o < n_obs_; ++o)
        for (int k = 0; k < n_prox_; ++k) c[clear_index(t, o, k)] = c_clear(x, t, o, k);
    return c;
  }

  double scaled_violation(const std::vector<double>& c) const {
    double v = 0.0;
    for (int t = 0; t < n_vel_; ++t) {
      v = std::max(v, std::max(0.0, c[t]) / bound_p2_);
      v = std::max(v, std::max(0.0, c[n_vel_ + t]) / bound_r2_);
    }
    for (int j = 2 * n_vel_; j < int(c.size()); ++j)
      v = std::max(v, std::max(0.0, c[j]) / margin_t_);
    return v;
  }

  double lagrangian(const Eigen::VectorXd& x) const {
    double L = objective(x);
    for (int t = 0; t < n_vel_; ++t) {
      L += al_term(c_vel_pos(x, t), lam_[t], mu_);
      L += al_term(c_vel_rot(x, t), lam_[n_vel_ + t], mu_);
    }
    for (int t = 1; t <= n_ - 2; ++t)
      for (int o = 0; o < n_obs_; ++o)
        for (int k = 0; k < n_prox_; ++k)
          L += al_term(c_clear(x, t, o, k), lam_[clear_index(t, o, k)], mu_);
    return L;
  }

  // Weighted sum of the constraints touching step t. With the hinge weights
  // w_j = max(0, lambda_j + mu c_j) held fixed, differencing this gives the
  // exact augmented-Lagrangian constraint gradient without ever differencing
  // across the hinge (whose curvature grows with mu and would swamp a plain
  // finite difference).
  double weighted_local(const Eigen::VectorXd& x, int t, const std::vector<double>& w) const {
    double sum = 0.0;
    for (int tp : {t - 1, t}) {
      if (tp < 0 || tp >= n_vel_) continue;
      if (w[tp] > 0.0) sum += w[tp] * c_vel_pos(x, tp);
      if (w[n_vel_ + tp] > 0.0) sum += w[n_vel_ + tp] * c_vel_rot(x, tp);
    }
    for (int o = 0; o < n_obs_; ++o)
      for (int k = 0; k < n_prox_; ++k) {
        int j = clear_index(t, o, k);
        if (w[j] > 0.0) sum += w[j] * c_clear(x, t, o, k);
      }
    return sum;
  }

  Eigen::VectorXd gradient(Eigen::VectorXd& x) const {
    const double h = 1e-6;
    std::vector<double> c = constraint_values(x);
    std::vector<double> w(c.size());
    for (std::size_t j = 0; j < c.size(); ++j) w[j] = std::max(0.0, lam_[j] + mu_ * c[j]);

    Eigen::VectorXd g(n_vars());
    for (int t = 1; t <= n_ - 2; ++t) {
      for (int i = 0; i < 6; ++i) {
        int idx = 6 * (t - 1) + i;
        double saved = x[idx];
        x[idx] = saved + h;
        double fp = weighted_local(x, t, w);
        x[idx] = saved - h;
        double fm = weighted_local(x, t, w);
        x[idx] = saved;
        g[idx] = (fp - fm) / (2.0 * h);
        if (t >= t_relax_) g[idx] += 2.0 * saved;
      }
    }
    return g;
  }

  void minimize_inner(Eigen::VectorXd& x) const {
    const int m = 10;
    std::deque<Eigen::VectorXd> ss, ys;
    std::deque<double> rhos;
    double fx = lagrangian(x);
    Eigen::VectorXd g = gradient(x);
    double gtol = 1e-9 * std::max(1.0, std::sqrt(mu_));

    for (int it = 0; it < cfg_.max_inner; ++it) {
      if (g.lpNorm<Eigen::Infinity>() <= gtol) break;

      // two-loop recursion
      Eigen::VectorXd d = g;
      std::vector<double> alpha(ss.size());
      for (int i = int(ss.size()) - 1; i >= 0; --i) {
        alpha[i] = rhos[i] * ss[i].dot(d);
        d -= alpha[i] * ys[i];
      }
      if (!ss.empty()) d *= ss.back().dot(ys.back()) / ys.back().squaredNorm();
      for (std::size_t i = 0; i < ss.size(); ++i) {
        double beta = rhos[i] * ys[i].dot(d);
        d += (alpha[i] - beta) * ss[i];
      }
      d = -d;
      double dg = d.dot(g);
      if (dg > -1e-14 * d.norm() * g.norm()) {
        d = -g;
        dg = -g.squaredNorm();
      }

      double step = 1.0;
      double fnew = fx;
      bool ok = false;
      for (int ls = 0; ls < 40; ++ls) {
        Eigen::VectorXd xn = x + step * d;
        fnew = lagrangian(xn);
        if (fnew <= fx + 1e-4 * step * dg) {
          x = std::move(xn);
          ok = true;
          break;
        }
        step *= 0.5;
      }
      if (!ok) break;

      Eigen::VectorXd gnew = gradient(x);
      Eigen::VectorXd s = step * d;
      Eigen::VectorXd y = gnew - g;
      double sy = s.dot(y);
      if (sy > 1e-12 * s.norm() * y.norm()) {
        ss.push_back(std::move(s));
        ys.push_back(std::move(y));
        rhos.push_back(1.0 / sy);
        if (int(ss.size()) > m) {
          ss.pop_front();
          ys.pop_front();
          rhos.pop_front();
        }
      }
      g = std::move(gnew);
      fx = fnew;
    }
  }

  TrajectoryPlan build_plan(const Eigen::VectorXd& x, bool converged, int outer) const {
    TrajectoryPlan plan;
    plan.poses.reserve(n_);
    for (int t = 0; t < n_; ++t) {
      plan.timestamps.push_back(cfg_.dt * t);
      plan.poses.push_back(pose_at(x, t));
    }
    ConstraintReport& r = plan.report;
    r.keyframe_residual_pos = std::max(
        (plan.poses.front().translation - prob_.start.translation).norm(),
        (plan.poses.back().translation - prob_.goal.translation).norm());
    r.keyframe_residual_rot = std::max(plan.poses.front().rotation.angle_to(prob_.start.rotation),
                                       plan.poses.back().rotation.angle_to(prob_.goal.rotation));
    for (int t = 0; t + 1 < n_; ++t) {
      double dp = (plan.poses[t + 1].translation - plan.poses[t].translation).norm();
      double dr = plan.poses[t].rotation.angle_to(plan.poses[t + 1].rotation);
      r.max_speed = std::max(r.max_speed, dp / cfg_.dt);
      r.max_angular_speed = std::max(r.max_angular_speed, dr / cfg_.dt);
    }
    r.min_clearance = std::numeric_limits<double>::infinity();
    for (int t = 0; t < n_; ++t)
      for (const Aabb& box : cfg_.obstacles)
        for (const Vec3& k : prob_.proxy_points)
          r.min_clearance =
              std::min(r.min_clearance, aabb_signed_dist(plan.poses[t] * k, box));
    r.objective = objective(x);
    r.outer_iterations = outer;
    r.converged = converged;
    return plan;
  }
};

}  // namespace

TrajectoryPlan solve_plan(const PlanProblem& problem) { return PlanSolver(problem).run(); }

TrajectoryPlan plan_trajectory(const std::vector<Pose>& demo_poses,
                               const std::vector<double>& demo_times,
                               const FunctionalKeypoints& k_test0, const Pose& goal,
                               const PlanConfig& config) {
  WarpResult warp = warp_trajectory(demo_poses, k_test0.func());
  std::vector<Pose> resampled = resample_poses(warp.poses, demo_times, config.n_steps);

  PlanProblem prob;
  prob.reference = anchor_to_goal(resampled, goal);
  prob.start = pose_from_keypoints(k_test0);
  prob.goal = goal;
  Pose tool_from_target = prob.start.inverse();
  prob.proxy_points = {tool_from_target * k_test0.func(), tool_from_target * k_test0.grasp(),
                       tool_from_target * k_test0.center()};
  prob.config = config;
  return solve_plan(prob);
}

std::vector<Pose> tool_to_ee_trajectory(const std::vector<Pose>& tool_poses,
                                        const Pose& grasp_in_tool, const Pose& target_to_base) {
  std::vector<Pose> out;
  out.reserve(tool_poses.size());
  for (const Pose& p : tool_poses) out.push_back(target_to_base * p * grasp_in_tool);
  return out;
}

}  // namespace toolmimic
