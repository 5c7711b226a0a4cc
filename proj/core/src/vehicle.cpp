#include "vrbflow/vehicle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vrbflow::vehicle {

namespace {

double wrap_angle(double a) {
  while (a > kPi) a -= 2.0 * kPi;
  while (a < -kPi) a += 2.0 * kPi;
  return a;
}

}  // namespace

std::array<Vec3, 4> QuadParams::rotor_positions() const {
  const double c = arm_length / std::sqrt(2.0);
  return {Vec3(c, c, 0.0), Vec3(-c, c, 0.0), Vec3(-c, -c, 0.0), Vec3(c, -c, 0.0)};
}

void QuadParams::validate() const {
  if (mass <= 0.0 || arm_length <= 0.0 || thrust_coeff <= 0.0 || drag_coeff <= 0.0 ||
      gravity <= 0.0 || max_rotor_speed <= 0.0 ||
      (inertia_diag.array() <= 0.0).any() || sensing.radius <= 0.0 ||
      sensing.half_height <= 0.0) {
    throw std::invalid_argument("QuadParams: all physical constants must be > 0");
  }
}

Vec3 QuadState::velocity_inertial() const {
  return dcm_from_quaternion(attitude).transpose() * velocity_body;
}

bool QuadState::finite() const {
  return position.allFinite() && velocity_body.allFinite() && attitude.allFinite() &&
         body_rates.allFinite();
}

Mat3 dcm_from_quaternion(const Quat& q_in) {
  Quat q = q_in;
  const double norm = q.norm();
  if (std::abs(norm - 1.0) > 1e-6) {
    if (norm <= 0.0) throw std::domain_error("dcm_from_quaternion: zero quaternion");
    q /= norm;
  }
  const double q0 = q(0), q1 = q(1), q2 = q(2), q3 = q(3);
  Mat3 dcm;
  dcm << q0 * q0 + q1 * q1 - q2 * q2 - q3 * q3, 2.0 * (q1 * q2 + q0 * q3),
      2.0 * (q1 * q3 - q0 * q2),
      2.0 * (q1 * q2 - q0 * q3), q0 * q0 - q1 * q1 + q2 * q2 - q3 * q3,
      2.0 * (q2 * q3 + q0 * q1),
      2.0 * (q1 * q3 + q0 * q2), 2.0 * (q2 * q3 - q0 * q1),
      q0 * q0 - q1 * q1 - q2 * q2 + q3 * q3;
  return dcm;
}

Quat quaternion_from_euler(double roll, double pitch, double yaw) {
  const double cr = std::cos(0.5 * roll), sr = std::sin(0.5 * roll);
  const double cp = std::cos(0.5 * pitch), sp = std::sin(0.5 * pitch);
  const double cy = std::cos(0.5 * yaw), sy = std::sin(0.5 * yaw);
  Quat q;
  q << cr * cp * cy + sr * sp * sy,
      sr * cp * cy - cr * sp * sy,
      cr * sp * cy + sr * cp * sy,
      cr * cp * sy - sr * sp * cy;
  return q;
}

Vec3 euler_from_dcm(const Mat3& dcm) {
  const double sin_pitch = -dcm(0, 2);
  Vec3 euler;
  if (std::abs(sin_pitch) >= 1.0 - 1e-9) {
    // Gimbal lock: split the remaining rotation into yaw only.
    euler(1) = std::copysign(kPi / 2.0, sin_pitch);
    euler(0) = 0.0;
    euler(2) = std::atan2(-dcm(1, 0), dcm(1, 1));
    return euler;
  }
  euler(0) = std::atan2(dcm(1, 2), dcm(2, 2));
  euler(1) = std::asin(sin_pitch);
  euler(2) = std::atan2(dcm(0, 1), dcm(0, 0));
  return euler;
}

StateDerivative dynamics_derivative(const QuadState& state, double thrust,
                                    const Vec3& torque, const QuadParams& params) {
  const Mat3 dcm = dcm_from_quaternion(state.attitude);
  const Vec3 e3 = Vec3::UnitZ();
  StateDerivative d;
  d.velocity_body_dot = -state.body_rates.cross(state.velocity_body) +
                        (thrust / params.mass) * e3 - dcm * (params.gravity * e3);
  d.position_dot = dcm.transpose() * state.velocity_body;
  const Vec3 angular_momentum = params.inertia_diag.cwiseProduct(state.body_rates);
  d.body_rates_dot = params.inertia_diag.cwiseInverse().cwiseProduct(
      torque - state.body_rates.cross(angular_momentum));

  const Vec3& w = state.body_rates;
  Eigen::Matrix4d B;
  B << 0.0, -w.x(), -w.y(), -w.z(),
      w.x(), 0.0, w.z(), -w.y(),
      w.y(), -w.z(), 0.0, w.x(),
      w.z(), w.y(), -w.x(), 0.0;
  d.attitude_dot = 0.5 * B * state.attitude;
  return d;
}

QuadState rk4_step(const QuadState& state, double thrust, const Vec3& torque,
                   const QuadParams& params, double dt) {
  auto advance = [&](const QuadState& s, const StateDerivative& d, double h) {
    QuadState out = s;
    out.position += h * d.position_dot;
    out.velocity_body += h * d.velocity_body_dot;
    out.attitude += h * d.attitude_dot;
    out.body_rates += h * d.body_rates_dot;
    return out;
  };

  const StateDerivative k1 = dynamics_derivative(state, thrust, torque, params);
  const StateDerivative k2 =
      dynamics_derivative(advance(state, k1, 0.5 * dt), thrust, torque, params);
  const StateDerivative k3 =
      dynamics_derivative(advance(state, k2, 0.5 * dt), thrust, torque, params);
  const StateDerivative k4 =
      dynamics_derivative(advance(state, k3, dt), thrust, torque, params);

  QuadState out = state;
  out.position +=
      dt / 6.0 * (k1.position_dot + 2.0 * k2.position_dot + 2.0 * k3.position_dot +
                  k4.position_dot);
  out.velocity_body += dt / 6.0 *
                       (k1.velocity_body_dot + 2.0 * k2.velocity_body_dot +
                        2.0 * k3.velocity_body_dot + k4.velocity_body_dot);
  out.attitude += dt / 6.0 *
                  (k1.attitude_dot + 2.0 * k2.attitude_dot + 2.0 * k3.attitude_dot +
                   k4.attitude_dot);
  out.body_rates += dt / 6.0 *
                    (k1.body_rates_dot + 2.0 * k2.body_rates_dot +
                     2.0 * k3.body_rates_dot + k4.body_rates_dot);
  out.attitude.normalize();
  return out;
}

ThrustAttitudeCmd thrust_attitude_from_force(const Vec3& accel_cmd,
                                             const Vec3& euler_now, double yaw_cmd,
                                             const QuadParams& params,
                                             const ThrustAttitudeCmd& previous) {
  const double u_norm = accel_cmd.norm();
  if (u_norm < 1e-12) {
    ThrustAttitudeCmd held = previous;
    held.thrust = params.mass * params.gravity;
    held.yaw = yaw_cmd;
    held.held = true;
    return held;
  }

  const double ux = accel_cmd.x(), uy = accel_cmd.y(), uz = accel_cmd.z();
  const double phi = euler_now(0), theta = euler_now(1), psi = euler_now(2);

  ThrustAttitudeCmd cmd;
  cmd.thrust = params.mass *
               (ux * (std::sin(theta) * std::cos(psi) * std::cos(phi) +
                      std::sin(psi) * std::sin(phi)) +
                uy * (std::sin(theta) * std::sin(psi) * std::cos(phi) -
                      std::cos(psi) * std::sin(phi)) +
                uz * std::cos(theta) * std::cos(phi));
  cmd.pitch = std::atan2(ux * std::cos(yaw_cmd) + uy * std::sin(yaw_cmd), uz);
  const double asin_arg =
      std::clamp((ux * std::sin(yaw_cmd) - uy * std::cos(yaw_cmd)) / u_norm, -1.0, 1.0);
  cmd.roll = std::asin(asin_arg);
  cmd.yaw = yaw_cmd;
  cmd.held = false;
  return cmd;
}

RotorMixer::RotorMixer(const QuadParams& params) {
  params.validate();
  const auto rotors = params.rotor_positions();
  const double kt = params.thrust_coeff;
  const double kd = params.drag_coeff;
  for (int i = 0; i < 4; ++i) {
    A_(0, i) = kt;
    A_(1, i) = rotors[static_cast<std::size_t>(i)].y() * kt;
    A_(2, i) = -rotors[static_cast<std::size_t>(i)].x() * kt;
    A_(3, i) = (i % 2 == 0) ? kd : -kd;
  }
  const Eigen::FullPivLU<Eigen::Matrix4d> lu(A_);
  if (!lu.isInvertible()) {
    throw std::invalid_argument("RotorMixer: singular allocation matrix");
  }
  A_inv_ = lu.inverse();
  max_omega_sq_ = params.max_rotor_speed * params.max_rotor_speed;
}

RotorCommand RotorMixer::allocate(double thrust, const Vec3& torque) const {
  RotorCommand cmd;
  Eigen::Vector4d wrench;
  wrench << thrust, torque.x(), torque.y(), torque.z();
  Eigen::Vector4d omega_sq = A_inv_ * wrench;
  for (int i = 0; i < 4; ++i) {
    if (omega_sq(i) < 0.0) {
      omega_sq(i) = 0.0;
      cmd.saturated = true;
    } else if (omega_sq(i) > max_omega_sq_) {
      omega_sq(i) = max_omega_sq_;
      cmd.saturated = true;
    }
  }
  cmd.omega_sq = omega_sq;
  const Eigen::Vector4d realized = A_ * omega_sq;
  cmd.thrust_realized = realized(0);
  cmd.torque_realized = realized.tail<3>();
  return cmd;
}

Vec3 CascadedAttitudeController::step(const QuadState& state, const Vec3& euler_cmd,
                                      const AttitudeGains& gains, double dt) {
  const Vec3 euler = euler_from_dcm(dcm_from_quaternion(state.attitude));
  Vec3 angle_error;
  for (int i = 0; i < 3; ++i) angle_error(i) = wrap_angle(euler_cmd(i) - euler(i));

  attitude_integral_ += angle_error * dt;
  attitude_integral_ = attitude_integral_.cwiseMax(-gains.attitude.integral_clamp)
                           .cwiseMin(gains.attitude.integral_clamp);
  const Vec3 rate_setpoint =
      gains.attitude.kp * angle_error + gains.attitude.ki * attitude_integral_;

  const Vec3 rate_error = rate_setpoint - state.body_rates;
  rate_integral_ += rate_error * dt;
  rate_integral_ = rate_integral_.cwiseMax(-gains.rate.integral_clamp)
                       .cwiseMin(gains.rate.integral_clamp);
  Vec3 rate_derivative = Vec3::Zero();
  if (has_previous_ && dt > 0.0) {
    rate_derivative = (rate_error - previous_rate_error_) / dt;
  }
  previous_rate_error_ = rate_error;
  has_previous_ = true;

  return gains.rate.kp * rate_error + gains.rate.ki * rate_integral_ +
         gains.rate.kd * rate_derivative;
}

void CascadedAttitudeController::reset() {
  attitude_integral_.setZero();
  rate_integral_.setZero();
  previous_rate_error_.setZero();
  has_previous_ = false;
}

}  // namespace vrbflow::vehicle
