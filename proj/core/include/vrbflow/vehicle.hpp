#pragma once

#include <array>

#include "vrbflow/types.hpp"

namespace vrbflow::vehicle {

struct SensingGeometry {
  double radius = 10.0;      // [m], horizontal
  double half_height = 3.0;  // [m], +- about the vehicle
};

struct QuadParams {
  double mass = 1.023;             // [kg]
  double arm_length = 0.2223;      // [m]
  double thrust_coeff = 1.4865e-7;  // k_T [N/(rad/s)^2]
  double drag_coeff = 2.9250e-9;    // k_d [N*m/(rad/s)^2]
  Vec3 inertia_diag{0.0095, 0.0095, 0.0186};  // [kg*m^2]
  double gravity = 9.81;           // [m/s^2]
  double max_rotor_speed = 8000.0;  // [rad/s]
  SensingGeometry sensing;

  // Cross configuration: rotors at 45 deg offsets, arm_length from the CG.
  std::array<Vec3, 4> rotor_positions() const;
  void validate() const;
};

struct QuadState {
  Vec3 position = Vec3::Zero();        // inertial [m]
  Vec3 velocity_body = Vec3::Zero();   // body frame [m/s]
  Quat attitude{1.0, 0.0, 0.0, 0.0};   // scalar-first unit quaternion
  Vec3 body_rates = Vec3::Zero();      // [rad/s]

  Vec3 velocity_inertial() const;
  bool finite() const;
};

// Inertial-to-body DCM from a scalar-first quaternion. Inputs off the unit
// sphere by more than 1e-6 are renormalized.
Mat3 dcm_from_quaternion(const Quat& q);

Quat quaternion_from_euler(double roll, double pitch, double yaw);

// ZYX Euler angles (roll, pitch, yaw) from an inertial-to-body DCM.
// Near gimbal lock (|pitch| -> 90 deg) roll is pinned to zero.
Vec3 euler_from_dcm(const Mat3& dcm);

struct StateDerivative {
  Vec3 position_dot = Vec3::Zero();
  Vec3 velocity_body_dot = Vec3::Zero();
  Quat attitude_dot = Quat::Zero();
  Vec3 body_rates_dot = Vec3::Zero();
};

StateDerivative dynamics_derivative(const QuadState& state, double thrust,
                                    const Vec3& torque, const QuadParams& params);

// One fixed-step RK4 integration of the rigid-body dynamics with the
// commanded thrust/torque held constant; renormalizes the quaternion.
QuadState rk4_step(const QuadState& state, double thrust, const Vec3& torque,
                   const QuadParams& params, double dt);

struct ThrustAttitudeCmd {
  double thrust = 0.0;     // [N]
  double roll = 0.0;       // [rad]
  double pitch = 0.0;      // [rad]
  double yaw = 0.0;        // [rad]
  bool held = false;       // true when a degenerate input held the previous command
};

// Maps a mass-normalized inertial acceleration command into thrust and
// attitude commands. A vanishing command holds `previous` attitude at
// hover thrust.
ThrustAttitudeCmd thrust_attitude_from_force(const Vec3& accel_cmd,
                                             const Vec3& euler_now, double yaw_cmd,
                                             const QuadParams& params,
                                             const ThrustAttitudeCmd& previous);

struct RotorCommand {
  Eigen::Vector4d omega_sq = Eigen::Vector4d::Zero();  // [(rad/s)^2], clamped
  bool saturated = false;
  double thrust_realized = 0.0;  // from the clamped speeds
  Vec3 torque_realized = Vec3::Zero();
};

// Thrust/torque to squared rotor speed allocation, A^-1 [T; tau], with
// clamping to [0, max^2] and the realized wrench recomputed from the
// clamped speeds.
class RotorMixer {
 public:
  explicit RotorMixer(const QuadParams& params);
  RotorCommand allocate(double thrust, const Vec3& torque) const;
  const Eigen::Matrix4d& allocation_matrix() const { return A_; }

 private:
  Eigen::Matrix4d A_;
  Eigen::Matrix4d A_inv_;
  double max_omega_sq_;
};

struct PidGains {
  double kp = 0.0;
  double ki = 0.0;
  double kd = 0.0;
  double integral_clamp = 1.0;
};

struct AttitudeGains {
  PidGains attitude{8.0, 0.1, 0.0, 0.5};  // angle error -> body rate setpoint
  PidGains rate{2.0, 0.2, 0.01, 0.5};     // rate error -> torque
};

// Inner-loop cascade: attitude PID to rate setpoints, rate PID to torque.
class CascadedAttitudeController {
 public:
  Vec3 step(const QuadState& state, const Vec3& euler_cmd, const AttitudeGains& gains,
            double dt);
  void reset();

 private:
  Vec3 attitude_integral_ = Vec3::Zero();
  Vec3 rate_integral_ = Vec3::Zero();
  Vec3 previous_rate_error_ = Vec3::Zero();
  bool has_previous_ = false;
};

}  // namespace vrbflow::vehicle
