#include "vrbflow/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace vrbflow::assignment {

void SlotGeometry::normalize() {
  if (slots.cols() == 0) return;
  const Vec3 centroid = slots.rowwise().mean();
  slots.colwise() -= centroid;
}

std::vector<int> solve_linear_assignment(const MatX& cost) {
  const int n = static_cast<int>(cost.rows());
  if (n == 0) throw std::invalid_argument("solve_linear_assignment: empty cost matrix");
  if (cost.cols() != n) {
    throw std::invalid_argument("solve_linear_assignment: cost matrix must be square");
  }

  constexpr double kInf = std::numeric_limits<double>::infinity();
  // Shortest augmenting path with row/column potentials, 1-based internally.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = -1;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> result(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j] != 0) result[p[j] - 1] = j - 1;
  }
  return result;
}

namespace {

MatX euclidean_cost(const std::vector<Vec3>& agents, const MatX& slots) {
  const int n = static_cast<int>(agents.size());
  MatX cost(n, n);
  for (int i = 0; i < n; ++i) {
    for (int s = 0; s < n; ++s) {
      cost(i, s) = (agents[static_cast<std::size_t>(i)] - slots.col(s)).norm();
    }
  }
  return cost;
}

double lap_cost(const MatX& cost) {
  const std::vector<int> perm = solve_linear_assignment(cost);
  double total = 0.0;
  for (int i = 0; i < cost.rows(); ++i) total += cost(i, perm[static_cast<std::size_t>(i)]);
  return total;
}

}  // namespace

std::vector<int> allocate(const std::vector<Vec3>& agents_rel_cm, const MatX& slots) {
  const int n = static_cast<int>(agents_rel_cm.size());
  if (n == 0) throw std::invalid_argument("allocate: no agents");
  if (slots.cols() != n) {
    throw std::invalid_argument("allocate: agent count must equal slot count");
  }
  if (n == 1) return {0};

  const MatX cost = euclidean_cost(agents_rel_cm, slots);
  const std::vector<int> base = solve_linear_assignment(cost);
  double best = 0.0;
  for (int i = 0; i < n; ++i) best += cost(i, base[static_cast<std::size_t>(i)]);
  const double tol = 1e-9 * std::max(1.0, best);

  // Greedy lexicographic refinement: fix the smallest slot index per agent
  // that still completes to the optimal cost.
  std::vector<int> result(n, -1);
  std::vector<int> free_slots(n);
  for (int s = 0; s < n; ++s) free_slots[static_cast<std::size_t>(s)] = s;
  double prefix = 0.0;
  for (int i = 0; i < n; ++i) {
    const int remaining = n - i - 1;
    bool fixed = false;
    for (std::size_t cand = 0; cand < free_slots.size() && !fixed; ++cand) {
      const int s = free_slots[cand];
      double candidate = prefix + cost(i, s);
      if (remaining > 0) {
        MatX sub(remaining, remaining);
        for (int r = 0; r < remaining; ++r) {
          int col = 0;
          for (std::size_t k = 0; k < free_slots.size(); ++k) {
            if (k == cand) continue;
            sub(r, col++) = cost(i + 1 + r, free_slots[k]);
          }
        }
        candidate += lap_cost(sub);
      }
      if (candidate <= best + tol) {
        result[static_cast<std::size_t>(i)] = s;
        prefix += cost(i, s);
        free_slots.erase(free_slots.begin() + static_cast<std::ptrdiff_t>(cand));
        fixed = true;
      }
    }
    if (!fixed) {
      throw std::logic_error("allocate: lexicographic refinement lost the optimum");
    }
  }
  return result;
}

double allocation_cost(const std::vector<Vec3>& agents_rel_cm, const MatX& slots,
                       const std::vector<int>& permutation) {
  double total = 0.0;
  for (std::size_t i = 0; i < agents_rel_cm.size(); ++i) {
    total += (agents_rel_cm[i] - slots.col(permutation[i])).norm();
  }
  return total;
}

Vec3 desired_position(int agent, const std::vector<int>& permutation,
                      const SlotGeometry& geometry) {
  const int slot = permutation[static_cast<std::size_t>(agent)];
  return geometry.center + geometry.attitude * geometry.slots.col(slot);
}

Vec3 slot_force(const Vec3& position, const Vec3& velocity, const Vec3& desired_position,
                const Vec3& desired_velocity, double kp, double kd) {
  return kp * (desired_position - position) + kd * (desired_velocity - velocity);
}

}  // namespace vrbflow::assignment
