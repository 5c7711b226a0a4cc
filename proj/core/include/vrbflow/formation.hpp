#pragma once

#include <span>
#include <utility>
#include <vector>

#include "vrbflow/types.hpp"

namespace vrbflow::formation {

struct Edge {
  int i = 0;          // agent index, i < j
  int j = 0;
  double distance = 1.0;  // desired separation d_ij [m]
};

// Baumgarte feedback gains for the stabilization term
// -2 alpha cdot - beta^2 c - gamma int c dt.
struct BaumgarteGains {
  double alpha = 1.0;  // [1/s]
  double beta = 1.0;   // [1/s]
  double gamma = 0.0;  // [1/s^2]
};

// Number of independent distance constraints that make an N-agent
// formation rigid in 3D.
int rigidity_edge_count(int agent_count);

// Edge list and gains of one rigid formation, plus the integral
// accumulator of the stabilization term. The accumulator is the only
// mutable state; it is owned by the engine's step loop.
class ConstraintSet {
 public:
  ConstraintSet(std::vector<Edge> edges, BaumgarteGains gains, int agent_count);

  const std::vector<Edge>& edges() const { return edges_; }
  const BaumgarteGains& gains() const { return gains_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  int agent_count() const { return agent_count_; }

  const VecX& integral() const { return integral_; }
  // Trapezoidal accumulation of c, clamped to +-10 m*s per edge.
  void accumulate(const VecX& residuals, double dt);
  // Reset on formation re-assignment.
  void reset_integral();

 private:
  std::vector<Edge> edges_;
  BaumgarteGains gains_;
  int agent_count_ = 0;
  VecX integral_;
  VecX previous_residuals_;
  bool has_previous_ = false;
};

// c_k = |r_i - r_j| - d_ij for every edge. Positions are stacked 3N.
VecX constraint_residuals(const VecX& positions, const ConstraintSet& set);

struct ConstraintJacobian {
  MatX J;     // m x 3N
  MatX Jdot;  // m x 3N
};

ConstraintJacobian constraint_jacobian(const VecX& positions, const VecX& velocities,
                                       const ConstraintSet& set);

struct ConstraintForceResult {
  VecX force;               // 3N stacked constraint force [N]
  VecX lambda;              // m multipliers
  VecX residuals;           // c
  VecX residual_rates;      // cdot
  double solve_residual = 0.0;      // |A lambda - rhs| / |rhs|
  double condition_estimate = 0.0;  // from the LDLT diagonal of J M^-1 J^T
};

// Baumgarte-stabilized constraint force
//   f_c = J^T (J M^-1 J^T)^-1 [ -J M^-1 f - Jdot rdot - 2a cdot - b^2 c - g int c ]
// solved as an SPD system. `applied_forces` is the stacked non-constraint
// force f_ext + f_u. Throws on degenerate configurations
// (condition estimate > 1e12).
ConstraintForceResult constraint_force(const VecX& positions, const VecX& velocities,
                                       const VecX& masses, const VecX& applied_forces,
                                       const ConstraintSet& set);

struct DecayReport {
  double initial_norm = 0.0;       // |c(0)|
  double final_norm = 0.0;         // |c(t_end)|
  double decay_rate = 0.0;         // fitted exponential rate [1/s]
  double steady_state = 0.0;       // mean |c| over the last 10 %
};

// Fits an exponential envelope to a sampled |c(t)| history.
DecayReport baumgarte_error_dynamics_check(std::span<const double> times,
                                           std::span<const double> residual_norms);

}  // namespace vrbflow::formation
