#include "vrbflow/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace vrbflow::metrics {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Writes through a temporary file so aborts never leave partial output.
class AtomicFile {
 public:
  explicit AtomicFile(const std::string& path)
      : final_path_(path), temp_path_(path + ".tmp") {
    stream_.open(temp_path_, std::ios::binary | std::ios::trunc);
    if (!stream_) throw std::runtime_error("cannot open for writing: " + temp_path_);
  }

  std::ofstream& stream() { return stream_; }

  void commit() {
    stream_.close();
    if (!stream_) throw std::runtime_error("write failed: " + temp_path_);
    std::filesystem::rename(temp_path_, final_path_);
    committed_ = true;
  }

  ~AtomicFile() {
    if (!committed_) {
      stream_.close();
      std::error_code ec;
      std::filesystem::remove(temp_path_, ec);
    }
  }

 private:
  std::string final_path_;
  std::string temp_path_;
  std::ofstream stream_;
  bool committed_ = false;
};

}  // namespace

void write_trajectory_csv(const std::string& path, const RunLog& log) {
  AtomicFile file(path);
  auto& out = file.stream();
  out << "format_version=1\n";
  out << "t,agent_id,x,y,z,vx,vy,vz,q0,q1,q2,q3,p,q,r,T,"
         "omega_p1,omega_p2,omega_p3,omega_p4\n";
  for (const TrajectoryRow& r : log.trajectory) {
    out << fmt(r.t) << ',' << r.agent;
    for (int a = 0; a < 3; ++a) out << ',' << fmt(r.position(a));
    for (int a = 0; a < 3; ++a) out << ',' << fmt(r.velocity(a));
    for (int a = 0; a < 4; ++a) out << ',' << fmt(r.attitude(a));
    for (int a = 0; a < 3; ++a) out << ',' << fmt(r.body_rates(a));
    out << ',' << fmt(r.thrust);
    for (int a = 0; a < 4; ++a) out << ',' << fmt(r.rotor_speeds(a));
    out << '\n';
  }
  file.commit();
}

void write_metrics_csv(const std::string& path, const RunLog& log) {
  AtomicFile file(path);
  auto& out = file.stream();
  out << "format_version=1\n";
  out << "t,agent_id,min_clearance,ref_error,in_range,saturated,projected,"
         "formation_yaw";
  for (const auto& [i, j] : log.edges) {
    out << ",c_" << i << '_' << j;
  }
  out << '\n';
  for (const MetricsRow& r : log.metrics) {
    out << fmt(r.t) << ',' << r.agent << ',' << fmt(r.min_clearance) << ','
        << fmt(r.reference_error) << ',' << r.obstacles_in_range << ','
        << (r.saturated ? 1 : 0) << ',' << (r.projected_inside ? 1 : 0) << ','
        << fmt(r.formation_yaw);
    for (double c : r.edge_residuals) out << ',' << fmt(c);
    out << '\n';
  }
  file.commit();
}

nlohmann::json summary_to_json(const RunSummary& s) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["scenario"] = s.scenario;
  j["seed"] = s.seed;
  j["ticks"] = s.ticks;
  j["agents"] = s.agents;
  j["min_clearance"] = s.min_clearance;
  j["min_clearance_per_agent"] = s.min_clearance_per_agent;
  j["max_settled_residual"] = s.max_settled_residual;
  j["settle_time"] = s.settle_time;
  j["rms_reference_error"] = s.rms_reference_error;
  j["saturated_ticks"] = s.saturated_ticks;
  j["projected_ticks"] = s.projected_ticks;
  j["wall_time_s"] = s.wall_time_s;
  return j;
}

void write_summary_json(const std::string& path, const RunSummary& summary) {
  AtomicFile file(path);
  file.stream() << summary_to_json(summary).dump(2) << '\n';
  file.commit();
}

MetricsTable read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open metrics file: " + path);

  MetricsTable table;
  std::string line;
  if (!std::getline(in, line) || line.rfind("format_version=", 0) != 0) {
    throw std::runtime_error("missing format_version header in " + path);
  }
  if (!std::getline(in, line)) throw std::runtime_error("missing header in " + path);

  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  constexpr int kFixedColumns = 8;
  for (std::size_t k = kFixedColumns; k < header.size(); ++k) {
    int i = 0, j = 0;
    if (std::sscanf(header[k].c_str(), "c_%d_%d", &i, &j) != 2) {
      throw std::runtime_error("unexpected metrics column: " + header[k]);
    }
    table.edges.emplace_back(i, j);
  }

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != header.size()) {
      throw std::runtime_error("ragged metrics row in " + path);
    }
    MetricsRow r;
    r.t = std::stod(cells[0]);
    r.agent = std::stoi(cells[1]);
    r.min_clearance = std::stod(cells[2]);
    r.reference_error = std::stod(cells[3]);
    r.obstacles_in_range = std::stoi(cells[4]);
    r.saturated = cells[5] == "1";
    r.projected_inside = cells[6] == "1";
    r.formation_yaw = std::stod(cells[7]);
    for (std::size_t k = kFixedColumns; k < cells.size(); ++k) {
      r.edge_residuals.push_back(std::stod(cells[k]));
    }
    table.rows.push_back(std::move(r));
  }
  return table;
}

namespace {

// Per-tick view of agent-major metric rows.
struct Tick {
  double t = 0.0;
  double max_residual = 0.0;
  bool any_in_range = false;
};

std::vector<Tick> collapse_ticks(const std::vector<MetricsRow>& rows) {
  std::vector<Tick> ticks;
  for (const MetricsRow& r : rows) {
    if (ticks.empty() || r.t != ticks.back().t) {
      Tick tick;
      tick.t = r.t;
      for (double c : r.edge_residuals) {
        tick.max_residual = std::max(tick.max_residual, std::abs(c));
      }
      ticks.push_back(tick);
    }
    ticks.back().any_in_range = ticks.back().any_in_range || r.obstacles_in_range > 0;
  }
  return ticks;
}

}  // namespace

ResidualAnalysis analyze_residuals(const std::vector<MetricsRow>& rows,
                                   double threshold) {
  ResidualAnalysis out;
  const std::vector<Tick> ticks = collapse_ticks(rows);
  if (ticks.empty()) return out;

  for (const Tick& tick : ticks) {
    out.max_residual = std::max(out.max_residual, tick.max_residual);
  }

  // Last tick above threshold determines the settle time.
  std::ptrdiff_t last_above = -1;
  for (std::ptrdiff_t k = static_cast<std::ptrdiff_t>(ticks.size()) - 1; k >= 0; --k) {
    if (ticks[static_cast<std::size_t>(k)].max_residual >= threshold) {
      last_above = k;
      break;
    }
  }
  if (last_above + 1 < static_cast<std::ptrdiff_t>(ticks.size())) {
    out.settle_time = ticks[static_cast<std::size_t>(last_above + 1)].t;
    for (std::size_t k = static_cast<std::size_t>(last_above + 1); k < ticks.size();
         ++k) {
      out.max_after_settle = std::max(out.max_after_settle, ticks[k].max_residual);
    }
  }
  return out;
}

AvoidanceSplit split_by_avoidance(const std::vector<MetricsRow>& rows,
                                  double settle_time, double pad) {
  AvoidanceSplit out;
  const std::vector<Tick> ticks = collapse_ticks(rows);
  for (const Tick& tick : ticks) {
    if (tick.any_in_range) out.last_in_range_time = tick.t;
  }
  double window_end = -std::numeric_limits<double>::infinity();
  for (const Tick& tick : ticks) {
    if (tick.any_in_range) window_end = tick.t + pad;
    const bool in_window = tick.any_in_range || tick.t <= window_end;
    if (in_window) {
      out.has_avoidance = true;
      out.max_during_avoidance = std::max(out.max_during_avoidance, tick.max_residual);
    } else if (settle_time >= 0.0 && tick.t >= settle_time) {
      out.has_cruise = true;
      out.max_during_cruise = std::max(out.max_during_cruise, tick.max_residual);
    }
  }
  return out;
}

}  // namespace vrbflow::metrics
