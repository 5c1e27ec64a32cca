#include "toolmimic/controller.hpp"

#include <cmath>
#include <cstdio>

#include "toolmimic/errors.hpp"

namespace toolmimic {

void KinematicChain::validate() const {
  if (joints.empty()) throw DegenerateConfiguration("kinematic chain has no joints");
  for (std::size_t i = 0; i < joints.size(); ++i) {
    if (std::abs(joints[i].axis.norm() - 1.0) > 1e-9)
      throw DegenerateConfiguration("joint " + std::to_string(i) + " axis is not unit norm");
    if (!(joints[i].lower < joints[i].upper))
      throw DegenerateConfiguration("joint " + std::to_string(i) + " has an empty limit range");
  }
}

Json KinematicChain::to_json() const {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["joints"] = Json::array();
  for (const RevoluteJoint& jt : joints) {
    Json e;
    e["origin"] = toolmimic::to_json(jt.origin);
    e["axis"] = toolmimic::to_json(jt.axis);
    e["lower"] = jt.lower;
    e["upper"] = jt.upper;
    j["joints"].push_back(e);
  }
  j["ee_offset"] = toolmimic::to_json(ee_offset);
  return j;
}

KinematicChain KinematicChain::from_json(const Json& j) {
  if (require_field(j, "schema_version", "kinematic chain").get<int>() != kSchemaVersion)
    throw SchemaError("kinematic chain: unsupported schema_version");
  KinematicChain c;
  const Json& joints = require_field(j, "joints", "kinematic chain");
  if (!joints.is_array()) throw SchemaError("kinematic chain: joints must be an array");
  for (const Json& e : joints) {
    RevoluteJoint jt;
    jt.origin = pose_from_json(require_field(e, "origin", "joint"), "joint origin");
    jt.axis = vec3_from_json(require_field(e, "axis", "joint"), "joint axis");
    jt.lower = require_field(e, "lower", "joint").get<double>();
    jt.upper = require_field(e, "upper", "joint").get<double>();
    c.joints.push_back(jt);
  }
  c.ee_offset = pose_from_json(require_field(j, "ee_offset", "kinematic chain"), "ee_offset");
  c.validate();
  return c;
}

KinematicChain KinematicChain::default_chain() {
  auto joint = [](double dz, const Vec3& axis, double lim) {
    RevoluteJoint j;
    j.origin.translation = Vec3(0.0, 0.0, dz);
    j.axis = axis;
    j.lower = -lim;
    j.upper = lim;
    return j;
  };
  const Vec3 z(0.0, 0.0, 1.0);
  const Vec3 y(0.0, 1.0, 0.0);
  KinematicChain c;
  c.joints = {joint(0.15, z, 2.9), joint(0.10, y, 2.2), joint(0.25, z, 2.9),
              joint(0.10, y, 2.2), joint(0.25, z, 2.9), joint(0.10, y, 2.2),
              joint(0.10, z, 2.9)};
  c.ee_offset.translation = Vec3(0.0, 0.0, 0.08);
  return c;
}

void ControllerGains::validate() const {
  auto nonneg = [](const Vec3& v) { return v.minCoeff() >= 0.0; };
  if (!nonneg(kp) || !nonneg(kd) || !nonneg(kp_rot) || !nonneg(kd_rot) || k_home < 0.0 ||
      k_min < 0.0)
    throw DegenerateConfiguration("controller gains must be nonnegative");
  if (!(command_rate > 0.0) || control_rate < command_rate)
    throw DegenerateConfiguration("control_rate must be >= command_rate > 0");
  if (!(e_p_max > 0.0)) throw DegenerateConfiguration("e_p_max must be positive");
}

Eigen::VectorXd ControllerGains::home_vector(int dof) const {
  if (q_home.empty()) return Eigen::VectorXd::Zero(dof);
  if (static_cast<int>(q_home.size()) != dof)
    throw LengthMismatch("q_home size does not match the chain dof");
  return Eigen::Map<const Eigen::VectorXd>(q_home.data(), dof);
}

Json ControllerGains::to_json() const {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kp"] = toolmimic::to_json(kp);
  j["kd"] = toolmimic::to_json(kd);
  j["kp_rot"] = toolmimic::to_json(kp_rot);
  j["kd_rot"] = toolmimic::to_json(kd_rot);
  j["k_home"] = k_home;
  j["k_min"] = k_min;
  j["q_home"] = q_home;
  j["command_rate"] = command_rate;
  j["control_rate"] = control_rate;
  j["e_p_max"] = e_p_max;
  return j;
}

ControllerGains ControllerGains::from_json(const Json& j) {
  if (require_field(j, "schema_version", "controller gains").get<int>() != kSchemaVersion)
    throw SchemaError("controller gains: unsupported schema_version");
  ControllerGains g;
  g.kp = vec3_from_json(require_field(j, "kp", "controller gains"), "kp");
  g.kd = vec3_from_json(require_field(j, "kd", "controller gains"), "kd");
  g.kp_rot = vec3_from_json(require_field(j, "kp_rot", "controller gains"), "kp_rot");
  g.kd_rot = vec3_from_json(require_field(j, "kd_rot", "controller gains"), "kd_rot");
  g.k_home = require_field(j, "k_home", "controller gains").get<double>();
  g.k_min = require_field(j, "k_min", "controller gains").get<double>();
  const Json& qh = require_field(j, "q_home", "controller gains");
  if (!qh.is_array()) throw SchemaError("controller gains: q_home must be an array");
  g.q_home = qh.get<std::vector<double>>();
  g.command_rate = require_field(j, "command_rate", "controller gains").get<double>();
  g.control_rate = require_field(j, "control_rate", "controller gains").get<double>();
  g.e_p_max = require_field(j, "e_p_max", "controller gains").get<double>();
  g.validate();
  return g;
}

namespace {

void check_limits(const KinematicChain& chain, const Eigen::VectorXd& q, const char* where) {
  for (int i = 0; i < chain.dof(); ++i)
    if (q[i] < chain.joints[i].lower || q[i] > chain.joints[i].upper)
      throw JointLimitViolation(std::string(where) + ": joint " + std::to_string(i) +
                                " at " + std::to_string(q[i]) + " rad exceeds its limits");
}

void check_q_size(const KinematicChain& chain, const Eigen::VectorXd& q, const char* where) {
  if (q.size() != chain.dof())
    throw LengthMismatch(std::string(where) + ": joint vector size does not match the chain");
}

}  // namespace

Pose forward_kinematics(const KinematicChain& chain, const Eigen::VectorXd& q) {
  check_q_size(chain, q, "forward_kinematics");
  check_limits(chain, q, "forward_kinematics");
  Pose p;
  for (int i = 0; i < chain.dof(); ++i) {
    p = p * chain.joints[i].origin;
    p = p * Pose{Rotation::exp(chain.joints[i].axis * q[i]), Vec3::Zero()};
  }
  return p * chain.ee_offset;
}

Eigen::MatrixXd jacobian(const KinematicChain& chain, const Eigen::VectorXd& q) {
  check_q_size(chain, q, "jacobian");
  int n = chain.dof();
  std::vector<Vec3> orig(n), axis(n);
  Pose p;
  for (int i = 0; i < n; ++i) {
    p = p * chain.joints[i].origin;
    orig[i] = p.translation;
    axis[i] = p.rotation * chain.joints[i].axis;
    p = p * Pose{Rotation::exp(chain.joints[i].axis * q[i]), Vec3::Zero()};
  }
  Vec3 ee = (p * chain.ee_offset).translation;
  Eigen::MatrixXd j(6, n);
  for (int i = 0; i < n; ++i) {
    j.col(i).head<3>() = axis[i].cross(ee - orig[i]);
    j.col(i).tail<3>() = axis[i];
  }
  return j;
}

std::vector<Pose> interpolate_commands(const Pose& pose_k, const Pose& pose_k1, double dt,
                                       double control_rate) {
  if (!(dt > 0.0)) throw DegenerateConfiguration("interpolate_commands: dt must be positive");
  int n = std::max(1, static_cast<int>(std::floor(dt * control_rate)));
  if (n == 1) return {pose_k1};
  std::vector<Pose> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i)
    out.push_back(interpolate_pose(pose_k, pose_k1, double(i) / double(n - 1)));
  return out;
}

Vec3 rotation_error(const Rotation& r_des, const Rotation& r_cur) {
  // Raw quaternion product: the sign is kept so the axis-angle magnitude can
  // land in (pi, 2pi) and the wraparound rule below applies.
  Eigen::Quaterniond qe = r_des.quat() * r_cur.quat().conjugate();
  double vn = qe.vec().norm();
  if (vn < 1e-15) return Vec3::Zero();
  double angle = 2.0 * std::atan2(vn, qe.w());
  Vec3 e = (qe.vec() / vn) * angle;
  if (angle > M_PI) e *= (angle - 2.0 * M_PI) / angle;
  return e;
}

Eigen::Matrix<double, 6, 1> pd_cartesian(const Vec3& e_p, const Vec3& e_p_dot, const Vec3& e_th,
                                         const Vec3& e_th_dot, const ControllerGains& gains) {
  if (e_p.norm() > gains.e_p_max)
    throw PositionErrorExceeded("position error " + std::to_string(e_p.norm()) +
                                " m exceeds the safety threshold");
  Eigen::Matrix<double, 6, 1> twist;
  twist.head<3>() = gains.kp.cwiseProduct(e_p) + gains.kd.cwiseProduct(e_p_dot);
  twist.tail<3>() = gains.kp_rot.cwiseProduct(e_th) + gains.kd_rot.cwiseProduct(e_th_dot);
  return twist;
}

Eigen::VectorXd joint_velocities(const KinematicChain& chain, const Eigen::VectorXd& q,
                                 const Eigen::Matrix<double, 6, 1>& twist,
                                 const ControllerGains& gains) {
  check_q_size(chain, q, "joint_velocities");
  int n = chain.dof();
  Eigen::MatrixXd j = jacobian(chain, q);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(j, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXd s = svd.singularValues();
  // Damped least squares only below the singularity threshold; exact
  // reciprocals elsewhere keep the null space projector exact at full rank.
  for (int i = 0; i < s.size(); ++i)
    s[i] = s[i] < 1e-4 ? s[i] / (s[i] * s[i] + 1e-6) : 1.0 / s[i];
  Eigen::MatrixXd pinv = svd.matrixV() * s.asDiagonal() * svd.matrixU().transpose();
  Eigen::VectorXd qdot0 =
      gains.k_home * (gains.home_vector(n) - q) - gains.k_min * q;
  return pinv * twist + (Eigen::MatrixXd::Identity(n, n) - pinv * j) * qdot0;
}

SimLog simulate_tracking(const KinematicChain& chain, const ControllerGains& gains,
                         const Eigen::VectorXd& q0, const std::vector<Pose>& commands,
                         const std::vector<double>& command_times, double duration) {
  chain.validate();
  gains.validate();
  check_q_size(chain, q0, "simulate_tracking");
  if (commands.empty()) throw LengthMismatch("simulate_tracking: no command poses");
  if (commands.size() != command_times.size())
    throw LengthMismatch("simulate_tracking: command/timestamp count mismatch");
  for (std::size_t k = 0; k + 1 < command_times.size(); ++k)
    if (!(command_times[k] < command_times[k + 1]))
      throw DegenerateConfiguration("simulate_tracking: command times must increase");
  double fc = gains.control_rate;
  long total = std::llround(duration * fc);
  if (total < 1) throw DegenerateConfiguration("simulate_tracking: duration shorter than a tick");
  if (command_times.front() < 0.0 || command_times.back() > duration)
    throw DegenerateConfiguration("simulate_tracking: command times outside the duration");

  // Desired pose per tick: each command segment contributes its interpolated
  // samples, the first command holds before its timestamp, the last one after.
  std::vector<Pose> schedule;
  schedule.reserve(total);
  long lead = std::llround(command_times.front() * fc);
  for (long i = 0; i < lead; ++i) schedule.push_back(commands.front());
  for (std::size_t k = 0; k + 1 < commands.size(); ++k) {
    std::vector<Pose> seg = interpolate_commands(commands[k], commands[k + 1],
                                                 command_times[k + 1] - command_times[k], fc);
    schedule.insert(schedule.end(), seg.begin(), seg.end());
  }
  while (static_cast<long>(schedule.size()) < total) schedule.push_back(commands.back());
  schedule.resize(total);

  SimLog log;
  log.control_rate = fc;
  log.ticks.reserve(total);
  Eigen::VectorXd q = q0;
  Vec3 prev_ep = Vec3::Zero(), prev_eth = Vec3::Zero();
  for (long t = 0; t < total; ++t) {
    for (int i = 0; i < chain.dof(); ++i)
      if (q[i] < chain.joints[i].lower || q[i] > chain.joints[i].upper)
        throw JointLimitViolation("joint " + std::to_string(i) + " exceeds its limits at tick " +
                                  std::to_string(t));
    Pose ee = forward_kinematics(chain, q);
    const Pose& des = schedule[t];
    Vec3 e_p = des.translation - ee.translation;
    if (e_p.norm() > gains.e_p_max)
      throw PositionErrorExceeded("position error " + std::to_string(e_p.norm()) +
                                  " m exceeds the safety threshold at tick " + std::to_string(t));
    Vec3 e_th = rotation_error(des.rotation, ee.rotation);
    Vec3 ep_dot = t == 0 ? Vec3::Zero() : Vec3((e_p - prev_ep) * fc);
    Vec3 eth_dot = t == 0 ? Vec3::Zero() : Vec3((e_th - prev_eth) * fc);
    Eigen::Matrix<double, 6, 1> twist = pd_cartesian(e_p, ep_dot, e_th, eth_dot, gains);
    Eigen::VectorXd qdot = joint_velocities(chain, q, twist, gains);
    log.ticks.push_back(SimTick{double(t) / fc, q, ee, e_p, e_th, qdot});
    q += qdot / fc;
    prev_ep = e_p;
    prev_eth = e_th;
  }
  return log;
}

double SimLog::final_position_error() const {
  if (ticks.empty()) throw EmptySet("sim log has no ticks");
  return ticks.back().e_p.norm();
}

double SimLog::final_orientation_error() const {
  if (ticks.empty()) throw EmptySet("sim log has no ticks");
  return ticks.back().e_th.norm();
}

double SimLog::max_joint_speed() const {
  if (ticks.empty()) throw EmptySet("sim log has no ticks");
  double m = 0.0;
  for (const SimTick& t : ticks) m = std::max(m, t.qdot_cmd.lpNorm<Eigen::Infinity>());
  return m;
}

void SimLog::write_csv(const std::string& path) const {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw IoError("cannot open " + path + " for writing");
  int n = ticks.empty() ? 0 : static_cast<int>(ticks.front().q.size());
  std::fputs("time", f);
  for (int i = 0; i < n; ++i) std::fprintf(f, ",q%d", i);
  std::fputs(",ee_qw,ee_qx,ee_qy,ee_qz,ee_px,ee_py,ee_pz", f);
  std::fputs(",e_px,e_py,e_pz,e_thx,e_thy,e_thz", f);
  for (int i = 0; i < n; ++i) std::fprintf(f, ",qd%d", i);
  std::fputc('\n', f);
  auto put = [f](double v) { std::fprintf(f, ",%.17g", v); };
  for (const SimTick& t : ticks) {
    std::fprintf(f, "%.17g", t.time);
    for (int i = 0; i < n; ++i) put(t.q[i]);
    const Eigen::Quaterniond& qr = t.ee.rotation.quat();
    put(qr.w());
    put(qr.x());
    put(qr.y());
    put(qr.z());
    for (int i = 0; i < 3; ++i) put(t.ee.translation[i]);
    for (int i = 0; i < 3; ++i) put(t.e_p[i]);
    for (int i = 0; i < 3; ++i) put(t.e_th[i]);
    for (int i = 0; i < n; ++i) put(t.qdot_cmd[i]);
    std::fputc('\n', f);
  }
  if (std::fclose(f) != 0) throw IoError("failed writing " + path);
}

Json SimLog::summary_json() const {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["control_rate"] = control_rate;
  j["ticks"] = ticks.size();
  j["final_position_error_m"] = final_position_error();
  j["final_orientation_error_rad"] = final_orientation_error();
  j["max_joint_speed_rad_s"] = max_joint_speed();
  return j;
}

}  // namespace toolmimic
