#include "vrbflow/formation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>

namespace vrbflow::formation {

namespace {
constexpr double kCoincidentGuard = 1e-9;   // [m]
constexpr double kIntegralClamp = 10.0;     // [m*s]
constexpr double kConditionLimit = 1e12;
}  // namespace

int rigidity_edge_count(int agent_count) {
  if (agent_count < 3) {
    throw std::invalid_argument("rigidity_edge_count: need at least 3 agents");
  }
  return 3 * agent_count - 6;
}

ConstraintSet::ConstraintSet(std::vector<Edge> edges, BaumgarteGains gains,
                             int agent_count)
    : edges_(std::move(edges)), gains_(gains), agent_count_(agent_count) {
  std::set<std::pair<int, int>> seen;
  for (const Edge& e : edges_) {
    if (e.i < 0 || e.j < 0 || e.i >= agent_count_ || e.j >= agent_count_) {
      throw std::invalid_argument("ConstraintSet: edge index out of range");
    }
    if (e.i >= e.j) throw std::invalid_argument("ConstraintSet: edges need i < j");
    if (e.distance <= 0.0) {
      throw std::invalid_argument("ConstraintSet: desired distance must be > 0");
    }
    if (!seen.insert({e.i, e.j}).second) {
      throw std::invalid_argument("ConstraintSet: duplicate edge");
    }
  }
  integral_ = VecX::Zero(static_cast<int>(edges_.size()));
  previous_residuals_ = VecX::Zero(static_cast<int>(edges_.size()));
}

void ConstraintSet::accumulate(const VecX& residuals, double dt) {
  if (residuals.size() != integral_.size()) {
    throw std::invalid_argument("ConstraintSet::accumulate: size mismatch");
  }
  if (has_previous_) {
    integral_ += 0.5 * dt * (residuals + previous_residuals_);
  } else {
    integral_ += dt * residuals;
  }
  integral_ = integral_.cwiseMax(-kIntegralClamp).cwiseMin(kIntegralClamp);
  previous_residuals_ = residuals;
  has_previous_ = true;
}

void ConstraintSet::reset_integral() {
  integral_.setZero();
  has_previous_ = false;
}

VecX constraint_residuals(const VecX& positions, const ConstraintSet& set) {
  const int m = set.edge_count();
  VecX c(m);
  for (int k = 0; k < m; ++k) {
    const Edge& e = set.edges()[k];
    const Vec3 ri = positions.segment<3>(3 * e.i);
    const Vec3 rj = positions.segment<3>(3 * e.j);
    const double sep = (ri - rj).norm();
    if (sep < kCoincidentGuard) {
      throw std::domain_error("constraint_residuals: coincident agents on an edge");
    }
    c(k) = sep - e.distance;
  }
  return c;
}

ConstraintJacobian constraint_jacobian(const VecX& positions, const VecX& velocities,
                                       const ConstraintSet& set) {
  const int m = set.edge_count();
  const auto n = positions.size();
  ConstraintJacobian out;
  out.J = MatX::Zero(m, n);
  out.Jdot = MatX::Zero(m, n);
  for (int k = 0; k < m; ++k) {
    const Edge& e = set.edges()[k];
    const Vec3 d = positions.segment<3>(3 * e.i) - positions.segment<3>(3 * e.j);
    const Vec3 ddot = velocities.segment<3>(3 * e.i) - velocities.segment<3>(3 * e.j);
    const double sep = d.norm();
    if (sep < kCoincidentGuard) {
      throw std::domain_error("constraint_jacobian: coincident agents on an edge");
    }
    const Vec3 n_hat = d / sep;
    // d/dt of the unit direction: (I - n n^T) ddot / |d|
    const Vec3 n_dot = (ddot - n_hat * n_hat.dot(ddot)) / sep;
    out.J.block<1, 3>(k, 3 * e.i) = n_hat.transpose();
    out.J.block<1, 3>(k, 3 * e.j) = -n_hat.transpose();
    out.Jdot.block<1, 3>(k, 3 * e.i) = n_dot.transpose();
    out.Jdot.block<1, 3>(k, 3 * e.j) = -n_dot.transpose();
  }
  return out;
}

ConstraintForceResult constraint_force(const VecX& positions, const VecX& velocities,
                                       const VecX& masses, const VecX& applied_forces,
                                       const ConstraintSet& set) {
  const int n_agents = set.agent_count();
  if (positions.size() != 3 * n_agents || velocities.size() != 3 * n_agents ||
      applied_forces.size() != 3 * n_agents || masses.size() != n_agents) {
    throw std::invalid_argument("constraint_force: dimension mismatch");
  }
  if ((masses.array() <= 0.0).any()) {
    throw std::invalid_argument("constraint_force: masses must be > 0");
  }

  ConstraintForceResult out;
  out.residuals = constraint_residuals(positions, set);
  const auto [J, Jdot] = constraint_jacobian(positions, velocities, set);
  out.residual_rates = J * velocities;

  VecX inv_mass_diag(3 * n_agents);
  for (int i = 0; i < n_agents; ++i) {
    inv_mass_diag.segment<3>(3 * i).setConstant(1.0 / masses(i));
  }

  const MatX JMinv = J * inv_mass_diag.asDiagonal();
  const MatX A = JMinv * J.transpose();
  const BaumgarteGains& g = set.gains();
  const VecX rhs = -JMinv * applied_forces - Jdot * velocities -
                   2.0 * g.alpha * out.residual_rates -
                   g.beta * g.beta * out.residuals - g.gamma * set.integral();

  Eigen::LDLT<MatX> ldlt(A);
  const VecX d = ldlt.vectorD();
  const double dmax = d.maxCoeff();
  const double dmin = d.minCoeff();
  out.condition_estimate =
      (dmin <= 0.0) ? std::numeric_limits<double>::infinity() : dmax / dmin;
  if (ldlt.info() != Eigen::Success || out.condition_estimate > kConditionLimit) {
    throw std::runtime_error(
        "constraint_force: degenerate configuration, J M^-1 J^T condition estimate " +
        std::to_string(out.condition_estimate));
  }

  out.lambda = ldlt.solve(rhs);
  const double rhs_norm = rhs.norm();
  out.solve_residual =
      rhs_norm > 0.0 ? (A * out.lambda - rhs).norm() / rhs_norm : 0.0;
  out.force = J.transpose() * out.lambda;
  return out;
}

DecayReport baumgarte_error_dynamics_check(std::span<const double> times,
                                           std::span<const double> residual_norms) {
  if (times.size() != residual_norms.size() || times.size() < 2) {
    throw std::invalid_argument("baumgarte_error_dynamics_check: bad sample sizes");
  }
  DecayReport report;
  report.initial_norm = residual_norms.front();
  report.final_norm = residual_norms.back();

  const std::size_t n = times.size();
  const std::size_t tail_start = n - std::max<std::size_t>(1, n / 10);
  double tail_sum = 0.0;
  for (std::size_t k = tail_start; k < n; ++k) tail_sum += residual_norms[k];
  report.steady_state = tail_sum / static_cast<double>(n - tail_start);

  // Least-squares fit of log|c| vs t over samples above the noise floor.
  const double floor = std::max(1e-12, 1e-6 * report.initial_norm);
  double sum_t = 0, sum_y = 0, sum_tt = 0, sum_ty = 0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (residual_norms[k] <= floor) continue;
    const double y = std::log(residual_norms[k]);
    sum_t += times[k];
    sum_y += y;
    sum_tt += times[k] * times[k];
    sum_ty += times[k] * y;
    ++count;
  }
  if (count >= 2) {
    const double denom = count * sum_tt - sum_t * sum_t;
    if (std::abs(denom) > 0.0) {
      report.decay_rate = -(count * sum_ty - sum_t * sum_y) / denom;
    }
  }
  return report;
}

}  // namespace vrbflow::formation
