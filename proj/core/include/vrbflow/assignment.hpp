#pragma once

#include <vector>

#include "vrbflow/types.hpp"

namespace vrbflow::assignment {

// Formation slot geometry: local slot columns, formation attitude and
// center. Slot columns are normalized so their centroid is the local origin.
struct SlotGeometry {
  MatX slots = MatX::Zero(3, 0);   // 3 x N local slot positions
  Mat3 attitude = Mat3::Identity();  // T_L^I, local-to-inertial
  Vec3 center = Vec3::Zero();        // r_cm

  int slot_count() const { return static_cast<int>(slots.cols()); }
  // Shifts the slot columns so their centroid is zero.
  void normalize();
};

// Exact solver for min_pi sum_i cost(i, pi(i)) on a square cost matrix
// (shortest augmenting path, O(N^3)).
std::vector<int> solve_linear_assignment(const MatX& cost);

// Optimal slot allocation: minimizes the summed Euclidean distance between
// each agent offset (relative to the formation center, expressed in the
// formation frame) and its slot column. Cost ties resolve to the
// lexicographically smallest permutation.
std::vector<int> allocate(const std::vector<Vec3>& agents_rel_cm, const MatX& slots);

double allocation_cost(const std::vector<Vec3>& agents_rel_cm, const MatX& slots,
                       const std::vector<int>& permutation);

// r_id = r_cm + T_L^I * S(:, pi(i))
Vec3 desired_position(int agent, const std::vector<int>& permutation,
                      const SlotGeometry& geometry);

// PD slot-tracking command f_s = kp (r_d - r) + kd (rdot_d - rdot).
Vec3 slot_force(const Vec3& position, const Vec3& velocity, const Vec3& desired_position,
                const Vec3& desired_velocity, double kp, double kd);

}  // namespace vrbflow::assignment
