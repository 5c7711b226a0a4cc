#pragma once

#include <cstdint>

#include "vrbflow/types.hpp"
#include "vrbflow/vehicle.hpp"

namespace vrbflow::sensing {

// Cylindrical sensing gate, boundary inclusive.
bool in_sensing_range(const Vec3& agent_position, const Vec3& obstacle_position,
                      const vehicle::SensingGeometry& geometry);

// Counter-based measurement noise stream: every (seed, agent, obstacle, step)
// tuple maps to its own deterministic draw, independent of evaluation order.
struct MeasurementKey {
  std::uint64_t seed = 0;
  std::uint32_t agent = 0;
  std::uint32_t obstacle = 0;
  std::uint64_t step = 0;
};

// Three independent N(0, sigma^2) samples for the key.
Vec3 gaussian_noise(const MeasurementKey& key, double sigma);

Vec3 noisy_measurement(const Vec3& true_position, const MeasurementKey& key,
                       double sigma);

// Constant-velocity track: x = [position; velocity].
struct TrackState {
  Vec6 x = Vec6::Zero();
  Mat6 P = Mat6::Identity();
  double time_since_update = 0.0;  // [s]
  bool initialized = false;

  Vec3 position() const { return x.head<3>(); }
  Vec3 velocity() const { return x.tail<3>(); }
};

// First measurement becomes the position estimate with an uninformative
// velocity prior.
TrackState track_init(const Vec3& measurement, double sigma_meas);

// Constant-velocity prediction with continuous white-noise-acceleration
// process noise of spectral density q_accel.
void kf_predict(TrackState& track, double dt, double q_accel);

// Position-only measurement update (Joseph form). Returns false and leaves
// the track unchanged when the measurement is non-finite.
bool kf_update(TrackState& track, const Vec3& measurement, double sigma_meas);

}  // namespace vrbflow::sensing
