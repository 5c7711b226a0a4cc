#pragma once

#include <span>
#include <variant>
#include <vector>

#include "vrbflow/types.hpp"

namespace vrbflow::flow {

// Sphere modeled as a 3D doublet; the avoidance surface sits at
// radius + buffer.
struct DoubletShape {
  double radius = 1.0;  // R_d [m]
};

// Finite source-sink pair approximating an ellipsoidal (Rankine) body.
// The source sits upstream of the center, the sink downstream, both at
// separation/2 along the relative-freestream axis, so the oncoming flow
// meets the nose stagnation point first.
struct RankineShape {
  double separation = 1.0;  // ell [m]
  double strength = 1.0;    // lambda_c [m^3/s]
};

struct FlowBody {
  Vec3 center = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();  // v_o
  std::variant<DoubletShape, RankineShape> shape = DoubletShape{};
  double buffer = 0.0;  // epsilon [m]

  bool is_doublet() const { return std::holds_alternative<DoubletShape>(shape); }

  // Avoidance radius R_eff = R_d + epsilon for doublets; for Rankine
  // bodies it is the singularity guard radius around source/sink.
  double effective_radius() const;

  static FlowBody doublet(const Vec3& center, const Vec3& velocity, double radius,
                          double buffer);
  static FlowBody rankine(const Vec3& center, const Vec3& velocity, double separation,
                          double strength, double buffer);
};

// Frames tying the inertial axes to a body's flow-aligned local frame {D}
// and its spherical frame {E}.
struct FlowFrame {
  double elevation = 0.0;  // theta_EL [rad]
  double azimuth = 0.0;    // theta_AZ [rad]
  Mat3 inertial_to_local = Mat3::Identity();   // T_I^D
  Mat3 spherical_to_local = Mat3::Identity();  // T_E^D
  double polar = 0.0;      // theta [rad]
  double azimuthal = 0.0;  // Phi [rad]
  double radius = 0.0;     // r [m]
};

struct SphericalVelocity {
  double radial = 0.0;      // v_r
  double polar = 0.0;       // v_theta
  double azimuthal = 0.0;   // v_Phi, identically 0 for a doublet body
};

struct InducedVelocity {
  Vec3 velocity = Vec3::Zero();
  // Query point fell inside the avoidance surface and was projected out.
  bool projected = false;
};

enum class Superposition {
  // Each body re-freestreams the previous induced velocity (default).
  Sequential,
  // Perturbations of all bodies are summed about the common freestream.
  Additive,
};

// Velocity potential of a 3D doublet, -mu cos(theta) / (4 pi r^2).
double doublet_potential(double r, double theta, double mu);

// Analytic gradient of doublet_potential in spherical components.
SphericalVelocity doublet_velocity(double r, double theta, double mu);

// Doublet strength satisfying flow tangency at the given radius:
// mu = -2 pi R^3 * speed.
double doublet_strength(double effective_radius, double speed);

// Builds the flow-aligned frame for relative freestream v_rel and relative
// position r_rel (both inertial). Throws std::domain_error when either is
// degenerate (zero length).
FlowFrame flow_frame(const Vec3& v_rel, const Vec3& r_rel);

// Freestream-plus-doublet velocity in the body's spherical frame.
SphericalVelocity combined_flow_spherical(const FlowFrame& frame, double speed,
                                          double mu);

// Relative velocity induced by a Rankine source-sink pair at rest:
// relative_freestream plus the source and sink potential gradients.
// Throws std::domain_error at the source/sink singularities.
Vec3 rankine_velocity(const Vec3& position, const FlowBody& body,
                      const Vec3& relative_freestream);

// Absolute induced velocity at `position` for one body, given the current
// freestream. Interior queries are projected to the avoidance surface and
// flagged; a vanishing relative freestream returns the freestream unchanged.
InducedVelocity induced_velocity(const Vec3& position, const FlowBody& body,
                                 const Vec3& freestream);

struct SuperposedVelocity {
  Vec3 velocity = Vec3::Zero();
  int projected_count = 0;
};

// Combined induced velocity of all bodies. Sequential mode processes bodies
// in order of increasing center distance (ties: lower index first), feeding
// each result to the next body as its freestream.
SuperposedVelocity superpose(const Vec3& position, std::span<const FlowBody> bodies,
                             const Vec3& v_infinity,
                             Superposition mode = Superposition::Sequential);

// Proportional velocity-tracking avoidance command f_h = K_h (v_h - v).
Vec3 avoidance_force(const Vec3& induced, const Vec3& agent_velocity, double gain);

struct FieldSample {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  bool inside = false;
};

struct GridSpec {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();
  Eigen::Vector3i count = Eigen::Vector3i::Ones();
};

// Samples the superposed field on a regular grid. Nodes that land inside a
// body surface are flagged and carry no velocity.
std::vector<FieldSample> sample_field(std::span<const FlowBody> bodies,
                                      const Vec3& v_infinity, const GridSpec& grid);

}  // namespace vrbflow::flow
