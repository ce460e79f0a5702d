#include "shapegraph/assignment.hpp"

#include "shapegraph/errors.hpp"

#include <algorithm>
#include <limits>

namespace shapegraph {

std::vector<size_t> solve_assignment_min(const Eigen::MatrixXd& cost) {
  if (cost.rows() != cost.cols()) throw ArgumentError("assignment: cost matrix must be square");
  if (!cost.allFinite()) throw ArgumentError("assignment: cost matrix must be finite");
  const size_t n = static_cast<size_t>(cost.rows());
  if (n == 0) return {};

  // Shortest augmenting paths with row/column potentials; index 0 is a sentinel.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<size_t> match(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (size_t i = 1; i <= n; ++i) {
    match[0] = i;
    size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const size_t i0 = match[j0];
      double delta = inf;
      size_t j1 = 0;
      for (size_t j = 1; j <= n; ++j) {
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
      for (size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<size_t> col(n);
  for (size_t j = 1; j <= n; ++j) col[match[j] - 1] = j - 1;
  return col;
}

std::vector<size_t> solve_assignment_max(const Eigen::MatrixXd& profit) { return solve_assignment_min(-profit); }

}  // namespace shapegraph
