#include "vrbflow/reference.hpp"

#include <cmath>
#include <stdexcept>

namespace vrbflow::reference {

Sample figure_eight_reference(double t, const FigureEight& spec) {
  if (spec.period <= 0.0) {
    throw std::invalid_argument("figure_eight_reference: period must be > 0");
  }
  const double w = 2.0 * kPi / spec.period;
  Sample s;
  s.position = spec.offset + Vec3(spec.amplitude_x * std::sin(w * t),
                                  0.5 * spec.amplitude_y * std::sin(2.0 * w * t),
                                  spec.altitude);
  s.velocity = Vec3(spec.amplitude_x * w * std::cos(w * t),
                    spec.amplitude_y * w * std::cos(2.0 * w * t), 0.0);
  return s;
}

Sample Trajectory::at(double t) const {
  switch (kind) {
    case Kind::Hold:
      return Sample{hold.position, Vec3::Zero()};
    case Kind::Line:
      return Sample{line.start + t * line.velocity, line.velocity};
    case Kind::FigureEight:
      return figure_eight_reference(t, figure_eight);
  }
  return {};
}

double YawProfile::yaw(double t) const {
  if (knots.empty()) return 0.0;
  if (t <= knots.front().first) return knots.front().second;
  if (t >= knots.back().first) return knots.back().second;
  for (std::size_t k = 1; k < knots.size(); ++k) {
    if (t <= knots[k].first) {
      const auto& [t0, y0] = knots[k - 1];
      const auto& [t1, y1] = knots[k];
      const double s = (t - t0) / (t1 - t0);
      return y0 + s * (y1 - y0);
    }
  }
  return knots.back().second;
}

double YawProfile::yaw_rate(double t) const {
  if (knots.size() < 2) return 0.0;
  if (t <= knots.front().first || t >= knots.back().first) return 0.0;
  for (std::size_t k = 1; k < knots.size(); ++k) {
    if (t <= knots[k].first) {
      const auto& [t0, y0] = knots[k - 1];
      const auto& [t1, y1] = knots[k];
      return (y1 - y0) / (t1 - t0);
    }
  }
  return 0.0;
}

}  // namespace vrbflow::reference
