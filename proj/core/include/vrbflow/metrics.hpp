#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "vrbflow/types.hpp"

namespace vrbflow::metrics {

struct TrajectoryRow {
  double t = 0.0;
  int agent = 0;
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();  // inertial
  Quat attitude{1.0, 0.0, 0.0, 0.0};
  Vec3 body_rates = Vec3::Zero();
  double thrust = 0.0;
  Eigen::Vector4d rotor_speeds = Eigen::Vector4d::Zero();  // [rad/s]
};

struct MetricsRow {
  double t = 0.0;
  int agent = 0;
  double min_clearance = 0.0;  // distance to nearest obstacle center [m]
  double reference_error = 0.0;  // |r_d - r| [m]
  int obstacles_in_range = 0;
  bool saturated = false;
  bool projected_inside = false;
  double formation_yaw = 0.0;
  std::vector<double> edge_residuals;  // same values for every agent at a tick
};

struct RunSummary {
  std::string scenario;
  std::uint64_t seed = 0;
  int ticks = 0;
  int agents = 0;
  double min_clearance = 0.0;   // over all agents and ticks
  std::vector<double> min_clearance_per_agent;
  double max_settled_residual = 0.0;  // max |c_k| after settling
  double settle_time = -1.0;          // first time all residuals < threshold
  double rms_reference_error = 0.0;
  int saturated_ticks = 0;
  int projected_ticks = 0;
  double wall_time_s = 0.0;
};

struct RunLog {
  std::vector<TrajectoryRow> trajectory;
  std::vector<MetricsRow> metrics;
  std::vector<std::pair<int, int>> edges;  // column labels for residuals
  RunSummary summary;
};

// CSV / JSON writers; all files start with a `format_version=1` line and are
// written to a temporary name and atomically renamed.
void write_trajectory_csv(const std::string& path, const RunLog& log);
void write_metrics_csv(const std::string& path, const RunLog& log);
void write_summary_json(const std::string& path, const RunSummary& summary);
nlohmann::json summary_to_json(const RunSummary& summary);

// Reads back a metrics CSV produced by write_metrics_csv.
struct MetricsTable {
  std::vector<MetricsRow> rows;
  std::vector<std::pair<int, int>> edges;
};
MetricsTable read_metrics_csv(const std::string& path);

// Residual settling analysis over per-tick metric rows.
struct ResidualAnalysis {
  double settle_time = -1.0;       // first t where max residual < threshold onward
  double max_after_settle = 0.0;
  double max_residual = 0.0;       // over the whole run
};
ResidualAnalysis analyze_residuals(const std::vector<MetricsRow>& rows,
                                   double threshold);

// Greatest per-tick |c| split by obstacle proximity: ticks with at least one
// in-range obstacle (plus `pad` seconds after) against settled cruise ticks.
struct AvoidanceSplit {
  double max_during_avoidance = 0.0;
  double max_during_cruise = 0.0;
  bool has_avoidance = false;
  bool has_cruise = false;
  double last_in_range_time = -1.0;
};
AvoidanceSplit split_by_avoidance(const std::vector<MetricsRow>& rows,
                                  double settle_time, double pad);

}  // namespace vrbflow::metrics
