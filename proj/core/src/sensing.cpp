#include "vrbflow/sensing.hpp"

#include <cmath>
#include <stdexcept>

namespace vrbflow::sensing {

bool in_sensing_range(const Vec3& agent_position, const Vec3& obstacle_position,
                      const vehicle::SensingGeometry& geometry) {
  const Vec3 delta = obstacle_position - agent_position;
  const double horizontal = std::hypot(delta.x(), delta.y());
  return horizontal <= geometry.radius && std::abs(delta.z()) <= geometry.half_height;
}

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Uniform in (0, 1]; never returns 0 so log() below is safe.
double uniform_open(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace

Vec3 gaussian_noise(const MeasurementKey& key, double sigma) {
  if (sigma < 0.0) throw std::invalid_argument("gaussian_noise: sigma must be >= 0");
  if (sigma == 0.0) return Vec3::Zero();

  std::uint64_t state = key.seed;
  state ^= splitmix64(state) + (static_cast<std::uint64_t>(key.agent) << 32 |
                                static_cast<std::uint64_t>(key.obstacle));
  state ^= splitmix64(state) + key.step;

  // Box-Muller: two pairs of uniforms give four normals, three used.
  double z[4];
  for (int pair = 0; pair < 2; ++pair) {
    const double u1 = uniform_open(splitmix64(state));
    const double u2 = uniform_open(splitmix64(state));
    const double radius = std::sqrt(-2.0 * std::log(u1));
    z[2 * pair] = radius * std::cos(2.0 * kPi * u2);
    z[2 * pair + 1] = radius * std::sin(2.0 * kPi * u2);
  }
  return sigma * Vec3(z[0], z[1], z[2]);
}

Vec3 noisy_measurement(const Vec3& true_position, const MeasurementKey& key,
                       double sigma) {
  return true_position + gaussian_noise(key, sigma);
}

TrackState track_init(const Vec3& measurement, double sigma_meas) {
  TrackState track;
  track.x.head<3>() = measurement;
  track.x.tail<3>().setZero();
  track.P.setZero();
  track.P.topLeftCorner<3, 3>() = sigma_meas * sigma_meas * Mat3::Identity();
  track.P.bottomRightCorner<3, 3>() = 10.0 * Mat3::Identity();
  track.initialized = true;
  track.time_since_update = 0.0;
  return track;
}

void kf_predict(TrackState& track, double dt, double q_accel) {
  if (dt <= 0.0) throw std::invalid_argument("kf_predict: dt must be > 0");
  Mat6 F = Mat6::Identity();
  F.topRightCorner<3, 3>() = dt * Mat3::Identity();

  Mat6 Q = Mat6::Zero();
  const double dt2 = dt * dt, dt3 = dt2 * dt;
  Q.topLeftCorner<3, 3>() = (q_accel * dt3 / 3.0) * Mat3::Identity();
  Q.topRightCorner<3, 3>() = (q_accel * dt2 / 2.0) * Mat3::Identity();
  Q.bottomLeftCorner<3, 3>() = Q.topRightCorner<3, 3>();
  Q.bottomRightCorner<3, 3>() = (q_accel * dt) * Mat3::Identity();

  track.x = F * track.x;
  track.P = F * track.P * F.transpose() + Q;
  track.P = 0.5 * (track.P + track.P.transpose()).eval();
  track.time_since_update += dt;
}

bool kf_update(TrackState& track, const Vec3& measurement, double sigma_meas) {
  if (!measurement.allFinite()) return false;

  Eigen::Matrix<double, 3, 6> H = Eigen::Matrix<double, 3, 6>::Zero();
  H.leftCols<3>() = Mat3::Identity();
  const Mat3 R = sigma_meas * sigma_meas * Mat3::Identity();

  const Mat3 S = H * track.P * H.transpose() + R;
  const Eigen::Matrix<double, 6, 3> K = track.P * H.transpose() * S.inverse();
  track.x += K * (measurement - H * track.x);

  const Mat6 IKH = Mat6::Identity() - K * H;
  track.P = (IKH * track.P * IKH.transpose() + K * R * K.transpose()).eval();
  track.P = 0.5 * (track.P + track.P.transpose()).eval();
  track.time_since_update = 0.0;
  return true;
}

}  // namespace vrbflow::sensing
