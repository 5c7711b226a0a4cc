#include "vrbflow/flowfield.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace vrbflow::flow {

namespace {

constexpr double kDegenerateFreestream = 1e-9;  // [m/s]
constexpr double kProjectionOffset = 1e-6;      // relative surface standoff

double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

}  // namespace

double FlowBody::effective_radius() const {
  if (const auto* d = std::get_if<DoubletShape>(&shape)) {
    return d->radius + buffer;
  }
  return std::max(buffer, 1e-6);
}

FlowBody FlowBody::doublet(const Vec3& center, const Vec3& velocity, double radius,
                           double buffer) {
  if (radius <= 0.0) throw std::invalid_argument("doublet radius must be > 0");
  if (buffer < 0.0) throw std::invalid_argument("buffer must be >= 0");
  return FlowBody{center, velocity, DoubletShape{radius}, buffer};
}

FlowBody FlowBody::rankine(const Vec3& center, const Vec3& velocity, double separation,
                           double strength, double buffer) {
  if (separation <= 0.0) throw std::invalid_argument("rankine separation must be > 0");
  if (strength <= 0.0) throw std::invalid_argument("rankine strength must be > 0");
  if (buffer < 0.0) throw std::invalid_argument("buffer must be >= 0");
  return FlowBody{center, velocity, RankineShape{separation, strength}, buffer};
}

double doublet_potential(double r, double theta, double mu) {
  if (r <= 0.0) throw std::domain_error("doublet_potential: r must be > 0");
  return -mu * std::cos(theta) / (4.0 * kPi * r * r);
}

SphericalVelocity doublet_velocity(double r, double theta, double mu) {
  if (r <= 0.0) throw std::domain_error("doublet_velocity: r must be > 0");
  const double r3 = r * r * r;
  SphericalVelocity v;
  v.radial = mu * std::cos(theta) / (2.0 * kPi * r3);
  v.polar = mu * std::sin(theta) / (4.0 * kPi * r3);
  v.azimuthal = 0.0;
  return v;
}

double doublet_strength(double effective_radius, double speed) {
  if (effective_radius <= 0.0) {
    throw std::invalid_argument("doublet_strength: radius must be > 0");
  }
  if (speed < 0.0) throw std::invalid_argument("doublet_strength: speed must be >= 0");
  const double r3 = effective_radius * effective_radius * effective_radius;
  return -2.0 * kPi * r3 * speed;
}

FlowFrame flow_frame(const Vec3& v_rel, const Vec3& r_rel) {
  const double speed = v_rel.norm();
  const double range = r_rel.norm();
  if (speed <= 0.0) throw std::domain_error("flow_frame: degenerate freestream");
  if (range <= 0.0) throw std::domain_error("flow_frame: coincident query point");

  FlowFrame f;
  f.elevation = std::acos(clamp_unit(v_rel.z() / speed));
  f.azimuth = std::atan2(v_rel.y(), v_rel.x());

  const double cel = std::cos(f.elevation), sel = std::sin(f.elevation);
  const double caz = std::cos(f.azimuth), saz = std::sin(f.azimuth);
  Mat3 elev, azim;
  elev << cel, 0.0, -sel,
          0.0, 1.0, 0.0,
          sel, 0.0, cel;
  azim << caz, saz, 0.0,
          -saz, caz, 0.0,
          0.0, 0.0, 1.0;
  f.inertial_to_local = elev * azim;

  const Vec3 r_local = f.inertial_to_local * r_rel;
  f.radius = range;
  f.polar = std::acos(clamp_unit(r_local.z() / range));
  f.azimuthal = std::atan2(r_local.y(), r_local.x());

  const double ct = std::cos(f.polar), st = std::sin(f.polar);
  const double cp = std::cos(f.azimuthal), sp = std::sin(f.azimuthal);
  f.spherical_to_local << st * cp, ct * cp, -sp,
                          st * sp, ct * sp, cp,
                          ct, -st, 0.0;
  return f;
}

SphericalVelocity combined_flow_spherical(const FlowFrame& frame, double speed,
                                          double mu) {
  if (frame.radius <= 0.0) {
    throw std::domain_error("combined_flow_spherical: r must be > 0");
  }
  const double r3 = frame.radius * frame.radius * frame.radius;
  const double ct = std::cos(frame.polar), st = std::sin(frame.polar);
  SphericalVelocity v;
  v.radial = speed * ct + mu * ct / (2.0 * kPi * r3);
  v.polar = -speed * st + mu * st / (4.0 * kPi * r3);
  v.azimuthal = 0.0;
  return v;
}

Vec3 rankine_velocity(const Vec3& position, const FlowBody& body,
                      const Vec3& relative_freestream) {
  const auto& shape = std::get<RankineShape>(body.shape);
  const double speed = relative_freestream.norm();
  if (speed <= 0.0) return relative_freestream;

  const Vec3 axis = relative_freestream / speed;
  const Vec3 source = body.center - 0.5 * shape.separation * axis;
  const Vec3 sink = body.center + 0.5 * shape.separation * axis;

  const Vec3 d1 = position - source;
  const Vec3 d2 = position - sink;
  const double r1 = d1.norm();
  const double r2 = d2.norm();
  if (r1 <= 0.0 || r2 <= 0.0) {
    throw std::domain_error("rankine_velocity: query point on a singularity");
  }

  // grad(-lambda/(4 pi r1)) points away from the source,
  // grad(+lambda/(4 pi r2)) toward the sink.
  const double scale = shape.strength / (4.0 * kPi);
  return relative_freestream + scale * d1 / (r1 * r1 * r1) -
         scale * d2 / (r2 * r2 * r2);
}

namespace {

InducedVelocity induced_doublet(const Vec3& position, const FlowBody& body,
                                const Vec3& v_rel, double speed) {
  InducedVelocity out;
  Vec3 r_rel = position - body.center;
  double range = r_rel.norm();
  const double r_surface = body.effective_radius();

  if (range < 1e-12) {
    // Query at the body center: direction undefined, push out along x.
    r_rel = Vec3::UnitX() * r_surface * (1.0 + kProjectionOffset);
    range = r_rel.norm();
    out.projected = true;
  } else if (range < r_surface) {
    r_rel *= r_surface * (1.0 + kProjectionOffset) / range;
    range = r_rel.norm();
    out.projected = true;
  }

  const FlowFrame frame = flow_frame(v_rel, r_rel);
  const double mu = doublet_strength(r_surface, speed);
  const SphericalVelocity vc = combined_flow_spherical(frame, speed, mu);
  const Vec3 v_local =
      frame.spherical_to_local * Vec3(vc.radial, vc.polar, vc.azimuthal);
  out.velocity = body.velocity + frame.inertial_to_local.transpose() * v_local;
  return out;
}

InducedVelocity induced_rankine(const Vec3& position, const FlowBody& body,
                                const Vec3& v_rel) {
  InducedVelocity out;
  const auto& shape = std::get<RankineShape>(body.shape);
  const Vec3 axis = v_rel.normalized();
  const Vec3 source = body.center - 0.5 * shape.separation * axis;
  const Vec3 sink = body.center + 0.5 * shape.separation * axis;
  const double guard = body.effective_radius();

  Vec3 query = position;
  for (const Vec3& singular : {source, sink}) {
    Vec3 d = query - singular;
    const double dist = d.norm();
    if (dist < 1e-12) {
      query = singular + Vec3::UnitX() * guard * (1.0 + kProjectionOffset);
      out.projected = true;
    } else if (dist < guard) {
      query = singular + d * (guard * (1.0 + kProjectionOffset) / dist);
      out.projected = true;
    }
  }

  out.velocity = body.velocity + rankine_velocity(query, body, v_rel);
  return out;
}

}  // namespace

InducedVelocity induced_velocity(const Vec3& position, const FlowBody& body,
                                 const Vec3& freestream) {
  const Vec3 v_rel = freestream - body.velocity;
  const double speed = v_rel.norm();
  if (speed < kDegenerateFreestream) {
    // mu would vanish anyway; skip the frame construction entirely.
    return InducedVelocity{freestream, false};
  }
  if (body.is_doublet()) {
    return induced_doublet(position, body, v_rel, speed);
  }
  return induced_rankine(position, body, v_rel);
}

SuperposedVelocity superpose(const Vec3& position, std::span<const FlowBody> bodies,
                             const Vec3& v_infinity, Superposition mode) {
  SuperposedVelocity out;
  out.velocity = v_infinity;
  if (bodies.empty()) return out;

  std::vector<std::size_t> order(bodies.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> dist(bodies.size());
  for (std::size_t k = 0; k < bodies.size(); ++k) {
    dist[k] = (position - bodies[k].center).norm();
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });

  if (mode == Superposition::Sequential) {
    Vec3 stream = v_infinity;
    for (std::size_t k : order) {
      const InducedVelocity iv = induced_velocity(position, bodies[k], stream);
      stream = iv.velocity;
      out.projected_count += iv.projected ? 1 : 0;
    }
    out.velocity = stream;
  } else {
    Vec3 total = v_infinity;
    for (std::size_t k : order) {
      const InducedVelocity iv = induced_velocity(position, bodies[k], v_infinity);
      total += iv.velocity - v_infinity;
      out.projected_count += iv.projected ? 1 : 0;
    }
    out.velocity = total;
  }
  return out;
}

Vec3 avoidance_force(const Vec3& induced, const Vec3& agent_velocity, double gain) {
  return gain * (induced - agent_velocity);
}

namespace {

bool inside_body(const Vec3& p, const FlowBody& body, const Vec3& v_infinity) {
  if (body.is_doublet()) {
    return (p - body.center).norm() < body.effective_radius();
  }
  const Vec3 v_rel = v_infinity - body.velocity;
  if (v_rel.norm() < kDegenerateFreestream) return false;
  const auto& shape = std::get<RankineShape>(body.shape);
  const Vec3 axis = v_rel.normalized();
  const double guard = body.effective_radius();
  const Vec3 source = body.center - 0.5 * shape.separation * axis;
  const Vec3 sink = body.center + 0.5 * shape.separation * axis;
  return (p - source).norm() < guard || (p - sink).norm() < guard;
}

}  // namespace

std::vector<FieldSample> sample_field(std::span<const FlowBody> bodies,
                                      const Vec3& v_infinity, const GridSpec& grid) {
  std::vector<FieldSample> samples;
  samples.reserve(static_cast<std::size_t>(grid.count.prod()));
  for (int ix = 0; ix < grid.count.x(); ++ix) {
    for (int iy = 0; iy < grid.count.y(); ++iy) {
      for (int iz = 0; iz < grid.count.z(); ++iz) {
        Vec3 p;
        const Eigen::Vector3i idx(ix, iy, iz);
        for (int a = 0; a < 3; ++a) {
          p[a] = grid.count[a] > 1
                     ? grid.lo[a] + idx[a] * (grid.hi[a] - grid.lo[a]) /
                                        (grid.count[a] - 1)
                     : grid.lo[a];
        }
        FieldSample s;
        s.position = p;
        s.inside = std::any_of(bodies.begin(), bodies.end(), [&](const FlowBody& b) {
          return inside_body(p, b, v_infinity);
        });
        if (!s.inside) {
          s.velocity = superpose(p, bodies, v_infinity).velocity;
        }
        samples.push_back(s);
      }
    }
  }
  return samples;
}

}  // namespace vrbflow::flow
