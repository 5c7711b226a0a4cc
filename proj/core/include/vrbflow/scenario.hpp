#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "vrbflow/assignment.hpp"
#include "vrbflow/flowfield.hpp"
#include "vrbflow/formation.hpp"
#include "vrbflow/reference.hpp"
#include "vrbflow/types.hpp"
#include "vrbflow/vehicle.hpp"

namespace vrbflow::scenario {

struct AgentInit {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();  // inertial
  double yaw = 0.0;
};

struct VehicleConfig {
  vehicle::QuadParams params;
  vehicle::AttitudeGains attitude_gains;
  double max_tilt = 0.6;  // [rad] roll/pitch command clamp
};

struct AvoidanceConfig {
  double radius = 1.0;        // R_d default for obstacles
  double buffer = 1.0;        // epsilon default
  double velocity_gain = 0.3;  // K_h
  flow::Superposition superposition = flow::Superposition::Sequential;
};

struct SlotGains {
  double kp = 2.0;
  double kd = 2.8;
};

struct FormationConfig {
  MatX slots = MatX::Zero(3, 1);  // centroid-normalized local slot columns
  std::vector<formation::Edge> edges;
  formation::BaumgarteGains gains;
  SlotGains slot_gains;
  reference::Trajectory center;
  reference::YawProfile yaw_profile;
  bool agents_follow_yaw = true;
  double reallocate_every = 0.0;  // [s], 0 disables
};

struct NoiseConfig {
  double sigma_meas = 0.05;  // [m]
  double q_accel = 0.5;      // [m^2/s^3]
  bool enabled = true;
};

struct OutputConfig {
  int trajectory_decimation = 1;
};

struct ScenarioConfig {
  std::string name = "scenario";
  double duration = 10.0;
  double dt_inner = 1e-3;
  double dt_outer = 1e-2;
  std::uint64_t seed = 1;
  VehicleConfig vehicle;
  std::vector<AgentInit> agents;
  std::vector<flow::FlowBody> obstacles;
  AvoidanceConfig avoidance;
  FormationConfig formation;
  NoiseConfig noise;
  OutputConfig outputs;

  int agent_count() const { return static_cast<int>(agents.size()); }
  int inner_steps_per_tick() const;
  int tick_count() const;
};

// Paper-style V wedge for eight vehicles; the auto edge rule on it yields
// the 18-pair rigid set.
MatX delta8_slots();

// Sliding-window edge rule (j - i <= 3): 3N-6 edges for N >= 3, rigid for
// non-degenerate slot chains.
std::vector<std::pair<int, int>> auto_edges(int agent_count);

struct ValidationIssue {
  std::string path;  // dotted JSON path, e.g. ".avoidance.K_h"
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> errors;
  bool ok() const { return errors.empty(); }
};

// Schema and invariant validation. Unknown keys are rejected with their
// exact path. On success `out` (when non-null) receives the resolved config.
ValidationReport validate_scenario(const nlohmann::json& raw,
                                   ScenarioConfig* out = nullptr);

// Parses and validates; throws std::runtime_error listing every violation.
ScenarioConfig scenario_from_json(const nlohmann::json& raw);
ScenarioConfig load_scenario(const std::string& path);

// Effective config with all defaults filled in.
nlohmann::json scenario_to_json(const ScenarioConfig& config);

// Applies one `dotted.path=value` override to a raw JSON document.
void apply_override(nlohmann::json& raw, const std::string& assignment);

}  // namespace vrbflow::scenario
