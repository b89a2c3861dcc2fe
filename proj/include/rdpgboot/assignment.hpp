#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <limits>
#include <vector>

#include "error.hpp"

namespace rdpgboot {

struct Assignment {
  std::vector<std::size_t> column;  // row i is matched to column[i]
  double cost = 0.0;
};

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method
/// with potentials, O(n^3)).
inline Assignment solve_assignment(const Eigen::MatrixXd& cost) {
  if (cost.rows() != cost.cols()) throw DimensionError("assignment needs a square cost matrix");
  const auto n = static_cast<std::size_t>(cost.rows());
  constexpr double inf = std::numeric_limits<double>::infinity();
  // 1-based potentials; p[j] = row matched to column j, 0 = none.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
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
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  Assignment out{std::vector<std::size_t>(n), 0.0};
  for (std::size_t j = 1; j <= n; ++j)
    if (p[j]) out.column[p[j] - 1] = j - 1;
  for (std::size_t i = 0; i < n; ++i)
    out.cost += cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(out.column[i]));
  return out;
}

}  // namespace rdpgboot
