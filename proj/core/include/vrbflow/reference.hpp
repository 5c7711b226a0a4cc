#pragma once

#include <vector>

#include "vrbflow/types.hpp"

namespace vrbflow::reference {

struct Sample {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
};

// Gerono lemniscate: x = A sin(2 pi t / T), y = B sin(4 pi t / T) / 2, z = h.
struct FigureEight {
  double amplitude_x = 10.0;  // A [m]
  double amplitude_y = 10.0;  // B [m]
  double period = 40.0;       // T [s]
  double altitude = 20.0;     // h [m]
  Vec3 offset = Vec3::Zero(); // shift of the whole path
};

Sample figure_eight_reference(double t, const FigureEight& spec);

struct LinePath {
  Vec3 start = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
};

struct HoldPoint {
  Vec3 position = Vec3::Zero();
};

struct Trajectory {
  enum class Kind { Hold, Line, FigureEight };
  Kind kind = Kind::Hold;
  HoldPoint hold;
  LinePath line;
  FigureEight figure_eight;

  Sample at(double t) const;
};

// Piecewise-linear yaw profile; yaw rate is the segment slope.
struct YawProfile {
  // (time, yaw) knots with strictly increasing times. Empty profile = 0 yaw.
  std::vector<std::pair<double, double>> knots;

  double yaw(double t) const;
  double yaw_rate(double t) const;
};

}  // namespace vrbflow::reference
