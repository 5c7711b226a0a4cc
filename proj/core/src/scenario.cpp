#include "vrbflow/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace vrbflow::scenario {

using nlohmann::json;

int ScenarioConfig::inner_steps_per_tick() const {
  return static_cast<int>(std::llround(dt_outer / dt_inner));
}

int ScenarioConfig::tick_count() const {
  return static_cast<int>(std::llround(duration / dt_outer));
}

MatX delta8_slots() {
  MatX s(3, 8);
  s.col(0) << 4.0, 0.0, 0.5;
  s.col(1) << 2.0, 1.5, 0.0;
  s.col(2) << 2.0, -1.5, 0.5;
  s.col(3) << 0.0, 3.0, 0.0;
  s.col(4) << 0.0, -3.0, 0.5;
  s.col(5) << -2.0, 4.5, 0.0;
  s.col(6) << -2.0, -4.5, 0.5;
  s.col(7) << -4.0, 0.0, 0.0;
  const Vec3 centroid = s.rowwise().mean();
  s.colwise() -= centroid;
  return s;
}

std::vector<std::pair<int, int>> auto_edges(int agent_count) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < agent_count; ++i) {
    for (int j = i + 1; j < agent_count && j <= i + 3; ++j) {
      edges.emplace_back(i, j);
    }
  }
  return edges;
}

namespace {

class Checker {
 public:
  explicit Checker(std::vector<ValidationIssue>* errors) : errors_(errors) {}

  void error(const std::string& path, const std::string& message) {
    errors_->push_back({path, message});
  }

  bool expect_object(const json& j, const std::string& path,
                     std::initializer_list<const char*> allowed) {
    if (!j.is_object()) {
      error(path, "expected an object");
      return false;
    }
    for (const auto& [key, value] : j.items()) {
      if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) {
            return key == a;
          }) == allowed.end()) {
        error(path + "." + key, "unknown key");
      }
    }
    return true;
  }

  bool number(const json& obj, const std::string& path, const char* key, double* out) {
    if (!obj.contains(key)) return false;
    const json& v = obj.at(key);
    if (!v.is_number()) {
      error(path + "." + key, "expected a number");
      return false;
    }
    *out = v.get<double>();
    return true;
  }

  bool integer(const json& obj, const std::string& path, const char* key,
               std::int64_t* out) {
    if (!obj.contains(key)) return false;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) {
      error(path + "." + key, "expected an integer");
      return false;
    }
    *out = v.get<std::int64_t>();
    return true;
  }

  bool unsigned_integer(const json& obj, const std::string& path, const char* key,
                        std::uint64_t* out) {
    if (!obj.contains(key)) return false;
    const json& v = obj.at(key);
    if (!v.is_number_unsigned()) {
      error(path + "." + key, "expected a non-negative integer");
      return false;
    }
    *out = v.get<std::uint64_t>();
    return true;
  }

  bool boolean(const json& obj, const std::string& path, const char* key, bool* out) {
    if (!obj.contains(key)) return false;
    const json& v = obj.at(key);
    if (!v.is_boolean()) {
      error(path + "." + key, "expected a boolean");
      return false;
    }
    *out = v.get<bool>();
    return true;
  }

  bool string(const json& obj, const std::string& path, const char* key,
              std::string* out) {
    if (!obj.contains(key)) return false;
    const json& v = obj.at(key);
    if (!v.is_string()) {
      error(path + "." + key, "expected a string");
      return false;
    }
    *out = v.get<std::string>();
    return true;
  }

  bool vec3(const json& obj, const std::string& path, const char* key, Vec3* out) {
    if (!obj.contains(key)) return false;
    return vec3_value(obj.at(key), path + "." + key, out);
  }

  bool vec3_value(const json& v, const std::string& path, Vec3* out) {
    if (!v.is_array() || v.size() != 3 ||
        !std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); })) {
      error(path, "expected an array of 3 numbers");
      return false;
    }
    for (int a = 0; a < 3; ++a) (*out)(a) = v[static_cast<std::size_t>(a)].get<double>();
    return true;
  }

  void require_positive(double value, const std::string& path) {
    if (!(value > 0.0)) error(path, "must be > 0");
  }

  void require_non_negative(double value, const std::string& path) {
    if (!(value >= 0.0)) error(path, "must be >= 0");
  }

 private:
  std::vector<ValidationIssue>* errors_;
};

void parse_pid(Checker& c, const json& obj, const std::string& path,
               vehicle::PidGains* gains) {
  if (!c.expect_object(obj, path, {"kp", "ki", "kd", "integral_clamp"})) return;
  c.number(obj, path, "kp", &gains->kp);
  c.number(obj, path, "ki", &gains->ki);
  c.number(obj, path, "kd", &gains->kd);
  c.number(obj, path, "integral_clamp", &gains->integral_clamp);
  c.require_non_negative(gains->kp, path + ".kp");
  c.require_non_negative(gains->ki, path + ".ki");
  c.require_non_negative(gains->kd, path + ".kd");
  c.require_positive(gains->integral_clamp, path + ".integral_clamp");
}

void parse_vehicle(Checker& c, const json& obj, const std::string& path,
                   VehicleConfig* vc) {
  if (!c.expect_object(obj, path,
                       {"mass", "arm_length", "thrust_coeff", "drag_coeff", "inertia",
                        "gravity", "max_rotor_speed", "sensing", "attitude_pid",
                        "rate_pid", "max_tilt"})) {
    return;
  }
  auto& p = vc->params;
  c.number(obj, path, "mass", &p.mass);
  c.number(obj, path, "arm_length", &p.arm_length);
  c.number(obj, path, "thrust_coeff", &p.thrust_coeff);
  c.number(obj, path, "drag_coeff", &p.drag_coeff);
  c.vec3(obj, path, "inertia", &p.inertia_diag);
  c.number(obj, path, "gravity", &p.gravity);
  c.number(obj, path, "max_rotor_speed", &p.max_rotor_speed);
  c.number(obj, path, "max_tilt", &vc->max_tilt);
  if (obj.contains("sensing")) {
    const json& s = obj.at("sensing");
    if (c.expect_object(s, path + ".sensing", {"radius", "half_height"})) {
      c.number(s, path + ".sensing", "radius", &p.sensing.radius);
      c.number(s, path + ".sensing", "half_height", &p.sensing.half_height);
    }
  }
  if (obj.contains("attitude_pid")) {
    parse_pid(c, obj.at("attitude_pid"), path + ".attitude_pid",
              &vc->attitude_gains.attitude);
  }
  if (obj.contains("rate_pid")) {
    parse_pid(c, obj.at("rate_pid"), path + ".rate_pid", &vc->attitude_gains.rate);
  }
  c.require_positive(p.mass, path + ".mass");
  c.require_positive(p.arm_length, path + ".arm_length");
  c.require_positive(p.thrust_coeff, path + ".thrust_coeff");
  c.require_positive(p.drag_coeff, path + ".drag_coeff");
  c.require_positive(p.gravity, path + ".gravity");
  c.require_positive(p.max_rotor_speed, path + ".max_rotor_speed");
  c.require_positive(p.sensing.radius, path + ".sensing.radius");
  c.require_positive(p.sensing.half_height, path + ".sensing.half_height");
  c.require_positive(vc->max_tilt, path + ".max_tilt");
  for (int a = 0; a < 3; ++a) {
    c.require_positive(p.inertia_diag(a), path + ".inertia");
  }
}

void parse_trajectory(Checker& c, const json& obj, const std::string& path,
                      reference::Trajectory* traj) {
  if (!c.expect_object(obj, path,
                       {"type", "position", "start", "velocity", "amplitude_x",
                        "amplitude_y", "period", "altitude", "offset"})) {
    return;
  }
  std::string type = "hold";
  c.string(obj, path, "type", &type);
  if (type == "hold") {
    traj->kind = reference::Trajectory::Kind::Hold;
    c.vec3(obj, path, "position", &traj->hold.position);
  } else if (type == "line") {
    traj->kind = reference::Trajectory::Kind::Line;
    c.vec3(obj, path, "start", &traj->line.start);
    c.vec3(obj, path, "velocity", &traj->line.velocity);
  } else if (type == "figure_eight") {
    traj->kind = reference::Trajectory::Kind::FigureEight;
    auto& f = traj->figure_eight;
    c.number(obj, path, "amplitude_x", &f.amplitude_x);
    c.number(obj, path, "amplitude_y", &f.amplitude_y);
    c.number(obj, path, "period", &f.period);
    c.number(obj, path, "altitude", &f.altitude);
    c.vec3(obj, path, "offset", &f.offset);
    c.require_positive(f.period, path + ".period");
  } else {
    c.error(path + ".type", "expected one of: hold, line, figure_eight");
  }
}

void parse_yaw_profile(Checker& c, const json& arr, const std::string& path,
                       reference::YawProfile* profile) {
  if (!arr.is_array()) {
    c.error(path, "expected an array of [time, yaw] pairs");
    return;
  }
  profile->knots.clear();
  double prev_t = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < arr.size(); ++k) {
    const json& knot = arr[k];
    const std::string kp = path + "[" + std::to_string(k) + "]";
    if (!knot.is_array() || knot.size() != 2 || !knot[0].is_number() ||
        !knot[1].is_number()) {
      c.error(kp, "expected [time, yaw]");
      continue;
    }
    const double t = knot[0].get<double>();
    if (t <= prev_t) c.error(kp, "knot times must be strictly increasing");
    prev_t = t;
    profile->knots.emplace_back(t, knot[1].get<double>());
  }
}

void parse_slot_gains(Checker& c, const json& obj, const std::string& path,
                      SlotGains* gains) {
  if (!c.expect_object(obj, path, {"kp", "kd"})) return;
  c.number(obj, path, "kp", &gains->kp);
  c.number(obj, path, "kd", &gains->kd);
  c.require_positive(gains->kp, path + ".kp");
  c.require_positive(gains->kd, path + ".kd");
}

void parse_formation(Checker& c, const json& obj, const std::string& path,
                     int agent_count, FormationConfig* fc) {
  if (!c.expect_object(obj, path,
                       {"shape", "slots", "edges", "gains", "slot_gains", "center",
                        "yaw_profile", "agents_follow_yaw", "reallocate_every"})) {
    return;
  }

  const bool has_shape = obj.contains("shape");
  const bool has_slots = obj.contains("slots");
  if (has_shape && has_slots) {
    c.error(path, "give either .shape or .slots, not both");
  }
  if (has_shape) {
    std::string shape;
    c.string(obj, path, "shape", &shape);
    if (shape == "delta8") {
      fc->slots = delta8_slots();
    } else {
      c.error(path + ".shape", "unknown shape (expected: delta8)");
    }
  } else if (has_slots) {
    const json& arr = obj.at("slots");
    if (!arr.is_array() || arr.empty()) {
      c.error(path + ".slots", "expected a non-empty array of [x, y, z]");
    } else {
      fc->slots = MatX::Zero(3, static_cast<int>(arr.size()));
      for (std::size_t k = 0; k < arr.size(); ++k) {
        Vec3 s = Vec3::Zero();
        c.vec3_value(arr[k], path + ".slots[" + std::to_string(k) + "]", &s);
        fc->slots.col(static_cast<int>(k)) = s;
      }
      const Vec3 centroid = fc->slots.rowwise().mean();
      fc->slots.colwise() -= centroid;
    }
  } else if (agent_count == 1) {
    fc->slots = MatX::Zero(3, 1);
  } else {
    c.error(path, "multi-agent scenarios need .shape or .slots");
  }

  if (fc->slots.cols() != agent_count) {
    c.error(path, "slot count " + std::to_string(fc->slots.cols()) +
                      " must equal agent count " + std::to_string(agent_count));
  }

  if (obj.contains("gains")) {
    const json& g = obj.at("gains");
    if (c.expect_object(g, path + ".gains", {"alpha", "beta", "gamma"})) {
      c.number(g, path + ".gains", "alpha", &fc->gains.alpha);
      c.number(g, path + ".gains", "beta", &fc->gains.beta);
      c.number(g, path + ".gains", "gamma", &fc->gains.gamma);
    }
  }
  c.require_positive(fc->gains.alpha, path + ".gains.alpha");
  c.require_positive(fc->gains.beta, path + ".gains.beta");
  c.require_non_negative(fc->gains.gamma, path + ".gains.gamma");
  if (fc->gains.alpha != fc->gains.beta) {
    c.error(path + ".gains", "alpha and beta must be equal");
  }

  if (obj.contains("slot_gains")) {
    parse_slot_gains(c, obj.at("slot_gains"), path + ".slot_gains", &fc->slot_gains);
  }
  if (obj.contains("center")) {
    parse_trajectory(c, obj.at("center"), path + ".center", &fc->center);
  }
  if (obj.contains("yaw_profile")) {
    parse_yaw_profile(c, obj.at("yaw_profile"), path + ".yaw_profile",
                      &fc->yaw_profile);
  }
  c.boolean(obj, path, "agents_follow_yaw", &fc->agents_follow_yaw);
  c.number(obj, path, "reallocate_every", &fc->reallocate_every);
  c.require_non_negative(fc->reallocate_every, path + ".reallocate_every");

  // Edge list: explicit [i, j] / [i, j, d] entries, or the sliding-window
  // rule when omitted.
  fc->edges.clear();
  const int n = agent_count;
  if (obj.contains("edges")) {
    const json& arr = obj.at("edges");
    if (!arr.is_array()) {
      c.error(path + ".edges", "expected an array");
    } else {
      for (std::size_t k = 0; k < arr.size(); ++k) {
        const json& e = arr[k];
        const std::string ep = path + ".edges[" + std::to_string(k) + "]";
        if (!e.is_array() || (e.size() != 2 && e.size() != 3) ||
            !e[0].is_number_integer() || !e[1].is_number_integer()) {
          c.error(ep, "expected [i, j] or [i, j, distance]");
          continue;
        }
        formation::Edge edge;
        edge.i = e[0].get<int>();
        edge.j = e[1].get<int>();
        if (edge.i < 0 || edge.j < 0 || edge.i >= n || edge.j >= n) {
          c.error(ep, "agent index out of range");
          continue;
        }
        if (edge.i >= edge.j) {
          c.error(ep, "edges need i < j");
          continue;
        }
        if (e.size() == 3) {
          if (!e[2].is_number()) {
            c.error(ep, "distance must be a number");
            continue;
          }
          edge.distance = e[2].get<double>();
        } else if (fc->slots.cols() == n) {
          edge.distance = (fc->slots.col(edge.i) - fc->slots.col(edge.j)).norm();
        }
        if (!(edge.distance > 0.0)) {
          c.error(ep, "desired distance must be > 0");
          continue;
        }
        fc->edges.push_back(edge);
      }
    }
  } else if (n >= 3 && fc->slots.cols() == n) {
    for (const auto& [i, j] : auto_edges(n)) {
      formation::Edge edge;
      edge.i = i;
      edge.j = j;
      edge.distance = (fc->slots.col(i) - fc->slots.col(j)).norm();
      fc->edges.push_back(edge);
    }
  }

  if (n >= 3) {
    const int required = formation::rigidity_edge_count(n);
    if (static_cast<int>(fc->edges.size()) != required) {
      c.error(path + ".edges",
              "rigidity requires " + std::to_string(required) + " edges, got " +
                  std::to_string(fc->edges.size()));
    }
  } else if (!fc->edges.empty()) {
    c.error(path + ".edges", "distance constraints need at least 3 agents");
  }
}

// Rank check of the constraint Jacobian at the slot geometry.
void check_slot_rigidity(Checker& c, const std::string& path,
                         const FormationConfig& fc, int agent_count) {
  if (agent_count < 3 || fc.edges.empty()) return;
  try {
    formation::ConstraintSet set(fc.edges, fc.gains, agent_count);
    VecX positions(3 * agent_count);
    for (int i = 0; i < agent_count; ++i) {
      positions.segment<3>(3 * i) = fc.slots.col(i);
    }
    const VecX velocities = VecX::Zero(3 * agent_count);
    const auto [J, Jdot] = formation::constraint_jacobian(positions, velocities, set);
    const MatX A = J * J.transpose();
    const Eigen::LDLT<MatX> ldlt(A);
    const VecX d = ldlt.vectorD();
    if (ldlt.info() != Eigen::Success || d.minCoeff() <= 0.0 ||
        d.maxCoeff() / d.minCoeff() > 1e12) {
      c.error(path + ".edges", "edge set is not rigid at the slot geometry");
    }
  } catch (const std::exception& e) {
    c.error(path, std::string("invalid constraint set: ") + e.what());
  }
}

}  // namespace

ValidationReport validate_scenario(const json& raw, ScenarioConfig* out) {
  ValidationReport report;
  Checker c(&report.errors);
  ScenarioConfig cfg;

  if (!c.expect_object(raw, "",
                       {"name", "duration", "dt_inner", "dt_outer", "seed", "vehicle",
                        "agents", "obstacles", "avoidance", "formation", "reference",
                        "tracking_gains", "noise", "outputs"})) {
    return report;
  }

  c.string(raw, "", "name", &cfg.name);
  c.number(raw, "", "duration", &cfg.duration);
  c.number(raw, "", "dt_inner", &cfg.dt_inner);
  c.number(raw, "", "dt_outer", &cfg.dt_outer);
  c.unsigned_integer(raw, "", "seed", &cfg.seed);
  c.require_positive(cfg.duration, ".duration");
  c.require_positive(cfg.dt_inner, ".dt_inner");
  c.require_positive(cfg.dt_outer, ".dt_outer");
  if (cfg.dt_inner > 0.0 && cfg.dt_outer > 0.0) {
    const double ratio = cfg.dt_outer / cfg.dt_inner;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio || ratio < 1.0 - 1e-12) {
      c.error(".dt_outer", "must be an integer multiple of dt_inner");
    }
  }

  if (raw.contains("vehicle")) {
    parse_vehicle(c, raw.at("vehicle"), ".vehicle", &cfg.vehicle);
  }

  cfg.agents.clear();
  if (!raw.contains("agents") || !raw.at("agents").is_array() ||
      raw.at("agents").empty()) {
    c.error(".agents", "expected a non-empty array of agents");
  } else {
    const json& arr = raw.at("agents");
    for (std::size_t k = 0; k < arr.size(); ++k) {
      const std::string ap = ".agents[" + std::to_string(k) + "]";
      AgentInit agent;
      if (c.expect_object(arr[k], ap, {"position", "velocity", "yaw"})) {
        if (!arr[k].contains("position")) {
          c.error(ap + ".position", "required");
        }
        c.vec3(arr[k], ap, "position", &agent.position);
        c.vec3(arr[k], ap, "velocity", &agent.velocity);
        c.number(arr[k], ap, "yaw", &agent.yaw);
      }
      cfg.agents.push_back(agent);
    }
  }
  const int n_agents = cfg.agent_count();

  if (raw.contains("avoidance")) {
    const json& a = raw.at("avoidance");
    if (c.expect_object(a, ".avoidance", {"R_d", "epsilon", "K_h", "superposition"})) {
      c.number(a, ".avoidance", "R_d", &cfg.avoidance.radius);
      c.number(a, ".avoidance", "epsilon", &cfg.avoidance.buffer);
      c.number(a, ".avoidance", "K_h", &cfg.avoidance.velocity_gain);
      std::string mode = "sequential";
      if (c.string(a, ".avoidance", "superposition", &mode)) {
        if (mode == "sequential") {
          cfg.avoidance.superposition = flow::Superposition::Sequential;
        } else if (mode == "additive") {
          cfg.avoidance.superposition = flow::Superposition::Additive;
        } else {
          c.error(".avoidance.superposition", "expected sequential or additive");
        }
      }
    }
  }
  c.require_positive(cfg.avoidance.radius, ".avoidance.R_d");
  c.require_non_negative(cfg.avoidance.buffer, ".avoidance.epsilon");
  c.require_positive(cfg.avoidance.velocity_gain, ".avoidance.K_h");

  cfg.obstacles.clear();
  if (raw.contains("obstacles")) {
    const json& arr = raw.at("obstacles");
    if (!arr.is_array()) {
      c.error(".obstacles", "expected an array");
    } else {
      for (std::size_t k = 0; k < arr.size(); ++k) {
        const std::string op = ".obstacles[" + std::to_string(k) + "]";
        const json& o = arr[k];
        if (!c.expect_object(o, op,
                             {"kind", "position", "velocity", "radius", "buffer",
                              "separation", "strength"})) {
          continue;
        }
        std::string kind = "doublet";
        c.string(o, op, "kind", &kind);
        Vec3 position = Vec3::Zero(), velocity = Vec3::Zero();
        if (!o.contains("position")) c.error(op + ".position", "required");
        c.vec3(o, op, "position", &position);
        c.vec3(o, op, "velocity", &velocity);
        double buffer = cfg.avoidance.buffer;
        c.number(o, op, "buffer", &buffer);
        c.require_non_negative(buffer, op + ".buffer");
        if (kind == "doublet") {
          double radius = cfg.avoidance.radius;
          c.number(o, op, "radius", &radius);
          c.require_positive(radius, op + ".radius");
          if (radius > 0.0 && buffer >= 0.0) {
            cfg.obstacles.push_back(
                flow::FlowBody::doublet(position, velocity, radius, buffer));
          }
        } else if (kind == "rankine") {
          double separation = 0.0, strength = 0.0;
          if (!c.number(o, op, "separation", &separation)) {
            c.error(op + ".separation", "required for rankine obstacles");
          }
          if (!c.number(o, op, "strength", &strength)) {
            c.error(op + ".strength", "required for rankine obstacles");
          }
          c.require_positive(separation, op + ".separation");
          c.require_positive(strength, op + ".strength");
          if (separation > 0.0 && strength > 0.0 && buffer >= 0.0) {
            cfg.obstacles.push_back(flow::FlowBody::rankine(position, velocity,
                                                            separation, strength,
                                                            buffer));
          }
        } else {
          c.error(op + ".kind", "expected doublet or rankine");
        }
      }
    }
  }

  // Single-agent scenarios may give a bare reference trajectory instead of a
  // formation block; it becomes a one-slot formation.
  const bool has_formation = raw.contains("formation");
  const bool has_reference = raw.contains("reference");
  if (has_reference && n_agents > 1) {
    c.error(".reference", "multi-agent scenarios define .formation.center instead");
  }
  if (has_reference && has_formation) {
    c.error(".reference", "give either .formation or .reference, not both");
  }
  if (has_formation) {
    parse_formation(c, raw.at("formation"), ".formation", n_agents, &cfg.formation);
  } else {
    cfg.formation.slots = MatX::Zero(3, std::max(1, n_agents));
    if (n_agents > 1) {
      c.error(".formation", "required for multi-agent scenarios");
    }
    if (has_reference) {
      parse_trajectory(c, raw.at("reference"), ".reference", &cfg.formation.center);
    } else if (n_agents == 1) {
      cfg.formation.center.kind = reference::Trajectory::Kind::Hold;
      cfg.formation.center.hold.position = cfg.agents.empty()
                                               ? Vec3::Zero()
                                               : cfg.agents.front().position;
    }
  }
  if (raw.contains("tracking_gains")) {
    if (has_formation) {
      c.error(".tracking_gains", "use .formation.slot_gains instead");
    } else {
      parse_slot_gains(c, raw.at("tracking_gains"), ".tracking_gains",
                       &cfg.formation.slot_gains);
    }
  }
  check_slot_rigidity(c, ".formation", cfg.formation, n_agents);

  if (raw.contains("noise")) {
    const json& nz = raw.at("noise");
    if (c.expect_object(nz, ".noise", {"sigma_meas", "q_accel", "enabled"})) {
      c.number(nz, ".noise", "sigma_meas", &cfg.noise.sigma_meas);
      c.number(nz, ".noise", "q_accel", &cfg.noise.q_accel);
      c.boolean(nz, ".noise", "enabled", &cfg.noise.enabled);
    }
    c.require_non_negative(cfg.noise.sigma_meas, ".noise.sigma_meas");
    c.require_non_negative(cfg.noise.q_accel, ".noise.q_accel");
  }

  if (raw.contains("outputs")) {
    const json& ou = raw.at("outputs");
    if (c.expect_object(ou, ".outputs", {"decimation"})) {
      std::int64_t dec = cfg.outputs.trajectory_decimation;
      c.integer(ou, ".outputs", "decimation", &dec);
      if (dec < 1) {
        c.error(".outputs.decimation", "must be >= 1");
      } else {
        cfg.outputs.trajectory_decimation = static_cast<int>(dec);
      }
    }
  }

  try {
    cfg.vehicle.params.validate();
  } catch (const std::exception& e) {
    c.error(".vehicle", e.what());
  }

  if (report.ok() && out != nullptr) *out = cfg;
  return report;
}

ScenarioConfig scenario_from_json(const json& raw) {
  ScenarioConfig cfg;
  const ValidationReport report = validate_scenario(raw, &cfg);
  if (!report.ok()) {
    std::ostringstream oss;
    oss << "invalid scenario:";
    for (const auto& issue : report.errors) {
      oss << "\n  at " << (issue.path.empty() ? "." : issue.path) << ": "
          << issue.message;
    }
    throw std::runtime_error(oss.str());
  }
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file: " + path);
  json raw;
  try {
    raw = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("scenario JSON parse error in " + path + ": " + e.what());
  }
  return scenario_from_json(raw);
}

namespace {

json trajectory_to_json(const reference::Trajectory& t) {
  json j;
  switch (t.kind) {
    case reference::Trajectory::Kind::Hold:
      j["type"] = "hold";
      j["position"] = {t.hold.position.x(), t.hold.position.y(), t.hold.position.z()};
      break;
    case reference::Trajectory::Kind::Line:
      j["type"] = "line";
      j["start"] = {t.line.start.x(), t.line.start.y(), t.line.start.z()};
      j["velocity"] = {t.line.velocity.x(), t.line.velocity.y(), t.line.velocity.z()};
      break;
    case reference::Trajectory::Kind::FigureEight:
      j["type"] = "figure_eight";
      j["amplitude_x"] = t.figure_eight.amplitude_x;
      j["amplitude_y"] = t.figure_eight.amplitude_y;
      j["period"] = t.figure_eight.period;
      j["altitude"] = t.figure_eight.altitude;
      j["offset"] = {t.figure_eight.offset.x(), t.figure_eight.offset.y(),
                     t.figure_eight.offset.z()};
      break;
  }
  return j;
}

json pid_to_json(const vehicle::PidGains& g) {
  return json{{"kp", g.kp}, {"ki", g.ki}, {"kd", g.kd},
              {"integral_clamp", g.integral_clamp}};
}

}  // namespace

json scenario_to_json(const ScenarioConfig& cfg) {
  json j;
  j["name"] = cfg.name;
  j["duration"] = cfg.duration;
  j["dt_inner"] = cfg.dt_inner;
  j["dt_outer"] = cfg.dt_outer;
  j["seed"] = cfg.seed;

  const auto& p = cfg.vehicle.params;
  j["vehicle"] = {
      {"mass", p.mass},
      {"arm_length", p.arm_length},
      {"thrust_coeff", p.thrust_coeff},
      {"drag_coeff", p.drag_coeff},
      {"inertia", {p.inertia_diag.x(), p.inertia_diag.y(), p.inertia_diag.z()}},
      {"gravity", p.gravity},
      {"max_rotor_speed", p.max_rotor_speed},
      {"max_tilt", cfg.vehicle.max_tilt},
      {"sensing",
       {{"radius", p.sensing.radius}, {"half_height", p.sensing.half_height}}},
      {"attitude_pid", pid_to_json(cfg.vehicle.attitude_gains.attitude)},
      {"rate_pid", pid_to_json(cfg.vehicle.attitude_gains.rate)},
  };

  j["agents"] = json::array();
  for (const AgentInit& a : cfg.agents) {
    j["agents"].push_back(
        {{"position", {a.position.x(), a.position.y(), a.position.z()}},
         {"velocity", {a.velocity.x(), a.velocity.y(), a.velocity.z()}},
         {"yaw", a.yaw}});
  }

  j["obstacles"] = json::array();
  for (const flow::FlowBody& b : cfg.obstacles) {
    json o;
    o["position"] = {b.center.x(), b.center.y(), b.center.z()};
    o["velocity"] = {b.velocity.x(), b.velocity.y(), b.velocity.z()};
    o["buffer"] = b.buffer;
    if (b.is_doublet()) {
      o["kind"] = "doublet";
      o["radius"] = std::get<flow::DoubletShape>(b.shape).radius;
    } else {
      const auto& r = std::get<flow::RankineShape>(b.shape);
      o["kind"] = "rankine";
      o["separation"] = r.separation;
      o["strength"] = r.strength;
    }
    j["obstacles"].push_back(o);
  }

  j["avoidance"] = {
      {"R_d", cfg.avoidance.radius},
      {"epsilon", cfg.avoidance.buffer},
      {"K_h", cfg.avoidance.velocity_gain},
      {"superposition",
       cfg.avoidance.superposition == flow::Superposition::Sequential ? "sequential"
                                                                      : "additive"},
  };

  json f;
  f["slots"] = json::array();
  for (int k = 0; k < cfg.formation.slots.cols(); ++k) {
    const Vec3 s = cfg.formation.slots.col(k);
    f["slots"].push_back({s.x(), s.y(), s.z()});
  }
  f["edges"] = json::array();
  for (const formation::Edge& e : cfg.formation.edges) {
    f["edges"].push_back({e.i, e.j, e.distance});
  }
  f["gains"] = {{"alpha", cfg.formation.gains.alpha},
                {"beta", cfg.formation.gains.beta},
                {"gamma", cfg.formation.gains.gamma}};
  f["slot_gains"] = {{"kp", cfg.formation.slot_gains.kp},
                     {"kd", cfg.formation.slot_gains.kd}};
  f["center"] = trajectory_to_json(cfg.formation.center);
  f["yaw_profile"] = json::array();
  for (const auto& [t, yaw] : cfg.formation.yaw_profile.knots) {
    f["yaw_profile"].push_back({t, yaw});
  }
  f["agents_follow_yaw"] = cfg.formation.agents_follow_yaw;
  f["reallocate_every"] = cfg.formation.reallocate_every;
  j["formation"] = f;

  j["noise"] = {{"sigma_meas", cfg.noise.sigma_meas},
                {"q_accel", cfg.noise.q_accel},
                {"enabled", cfg.noise.enabled}};
  j["outputs"] = {{"decimation", cfg.outputs.trajectory_decimation}};
  return j;
}

void apply_override(json& raw, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw std::invalid_argument("override must look like dotted.path=value: " +
                                assignment);
  }
  const std::string path = assignment.substr(0, eq);
  const std::string value_text = assignment.substr(eq + 1);

  json value;
  try {
    value = json::parse(value_text);
  } catch (const json::parse_error&) {
    value = value_text;  // fall back to a plain string
  }

  json* cursor = &raw;
  std::size_t begin = 0;
  while (true) {
    const std::size_t dot = path.find('.', begin);
    const std::string key = path.substr(begin, dot - begin);
    if (key.empty()) {
      throw std::invalid_argument("override has an empty path segment: " + assignment);
    }
    if (dot == std::string::npos) {
      (*cursor)[key] = value;
      break;
    }
    cursor = &((*cursor)[key]);
    begin = dot + 1;
  }
}

}  // namespace vrbflow::scenario
