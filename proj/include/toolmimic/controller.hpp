#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "toolmimic/jsonio.hpp"

namespace toolmimic {

/// One revolute joint of a serial chain: a fixed transform from the parent
/// link frame to the joint frame, then rotation about `axis` by the joint
/// variable. `axis` is unit-norm in the joint frame.
struct RevoluteJoint {
  Pose origin;
  Vec3 axis{0.0, 0.0, 1.0};
  double lower = -3.0;  // rad
  double upper = 3.0;   // rad
};

struct KinematicChain {
  std::vector<RevoluteJoint> joints;
  Pose ee_offset;  // last joint frame -> end effector

  static constexpr int kSchemaVersion = 1;

  int dof() const { return static_cast<int>(joints.size()); }

  /// >= 1 joint, unit axes, lower < upper. Throws DegenerateConfiguration.
  void validate() const;

  Json to_json() const;
  static KinematicChain from_json(const Json& j);

  /// Generic 7-DoF serial arm (alternating z / y axes, links stacked along
  /// z). With all joints at zero the end effector sits at (0, 0, 1.13) with
  /// identity rotation. Shipped as data/chains/arm7.json.
  static KinematicChain default_chain();
};

/// Gain matrices are diagonal; the fields hold the diagonal entries.
struct ControllerGains {
  Vec3 kp{3.0, 3.0, 3.0};
  Vec3 kd{0.001, 0.001, 0.001};
  Vec3 kp_rot{3.0, 3.0, 3.0};
  Vec3 kd_rot{0.01, 0.01, 0.01};
  double k_home = 0.1;
  double k_min = 0.05;
  std::vector<double> q_home;  // empty means all zeros at the chain's dof
  double command_rate = 10.0;  // Hz
  double control_rate = 200.0;  // Hz
  double e_p_max = 0.5;  // m, safety stop threshold

  static constexpr int kSchemaVersion = 1;

  /// Gains >= 0, control_rate >= command_rate > 0, e_p_max > 0. Throws
  /// DegenerateConfiguration.
  void validate() const;

  /// q_home resized to the chain (zeros when unset). Throws LengthMismatch
  /// when a nonempty q_home disagrees with `dof`.
  Eigen::VectorXd home_vector(int dof) const;

  Json to_json() const;
  static ControllerGains from_json(const Json& j);
};

struct SimTick {
  double time = 0.0;
  Eigen::VectorXd q;
  Pose ee;
  Vec3 e_p{0.0, 0.0, 0.0};
  Vec3 e_th{0.0, 0.0, 0.0};
  Eigen::VectorXd qdot_cmd;
};

struct SimLog {
  std::vector<SimTick> ticks;
  double control_rate = 200.0;

  static constexpr int kSchemaVersion = 1;

  double final_position_error() const;     // m, last tick
  double final_orientation_error() const;  // rad, last tick
  double max_joint_speed() const;          // rad/s, max |qdot| over all ticks

  /// One row per tick: time, q..., ee quat wxyz, ee pos xyz, e_p xyz,
  /// e_th xyz, qdot_cmd... Doubles printed with %.17g so equal logs produce
  /// byte-identical files. Throws IoError.
  void write_csv(const std::string& path) const;

  Json summary_json() const;
};

/// Composes the joint transforms for configuration q. Throws LengthMismatch
/// on wrong q size, JointLimitViolation when any q[i] leaves [lower, upper].
Pose forward_kinematics(const KinematicChain& chain, const Eigen::VectorXd& q);

/// Geometric Jacobian, 6 x dof: rows 0..2 linear (m), rows 3..5 angular
/// (rad). Column i is (z_i x (p_ee - o_i); z_i) in the world frame. Limits
/// are not checked here.
Eigen::MatrixXd jacobian(const KinematicChain& chain, const Eigen::VectorXd& q);

/// N = max(1, floor(dt * f_c)) poses interpolated over s_i = i/(N-1): linear
/// in position, slerp in rotation. N == 1 collapses to [pose_k1]. dt must be
/// positive (DegenerateConfiguration otherwise).
std::vector<Pose> interpolate_commands(const Pose& pose_k, const Pose& pose_k1, double dt,
                                       double control_rate);

/// Axis-angle of r_des * r_cur^-1, wrapped so the magnitude stays within pi.
Vec3 rotation_error(const Rotation& r_des, const Rotation& r_cur);

/// v = Kp e_p + Kd e_p_dot; w = Kp_rot e_th + Kd_rot e_th_dot. Throws
/// PositionErrorExceeded when |e_p| > e_p_max (safety stop).
Eigen::Matrix<double, 6, 1> pd_cartesian(const Vec3& e_p, const Vec3& e_p_dot, const Vec3& e_th,
                                         const Vec3& e_th_dot, const ControllerGains& gains);

/// qdot = pinv(J) twist + (I - pinv(J) J) qdot0 with
/// qdot0 = k_home (q_home - q) - k_min q. The pseudoinverse is damped least
/// squares near singularities: singular values below 1e-4 use
/// s / (s^2 + lambda^2) with lambda = 1e-3, larger ones the exact 1/s.
Eigen::VectorXd joint_velocities(const KinematicChain& chain, const Eigen::VectorXd& q,
                                 const Eigen::Matrix<double, 6, 1>& twist,
                                 const ControllerGains& gains);

/// Lockstep kinematic simulation at control_rate. Commands are interpolated
/// per segment (interpolate_commands) and consumed one sample per tick; the
/// last command holds until `duration` so the arm settles. Per tick: Cartesian
/// errors against the desired sample (error derivatives by backward difference
/// at the control rate, zero on the first tick), pd_cartesian,
/// joint_velocities, forward-Euler integration of q. Fully deterministic.
/// Throws LengthMismatch (sizes / empty commands), DegenerateConfiguration
/// (unordered times), PositionErrorExceeded or JointLimitViolation with the
/// offending tick index in the message.
SimLog simulate_tracking(const KinematicChain& chain, const ControllerGains& gains,
                         const Eigen::VectorXd& q0, const std::vector<Pose>& commands,
                         const std::vector<double>& command_times, double duration);

}  // namespace toolmimic
