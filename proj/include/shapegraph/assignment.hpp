#pragma once

#include <Eigen/Core>

#include <vector>

namespace shapegraph {

/// Optimal linear assignment on a square cost matrix (Hungarian method,
/// O(n^3)). Returns column[row].
std::vector<size_t> solve_assignment_min(const Eigen::MatrixXd& cost);

/// Same as solve_assignment_min for a profit matrix.
std::vector<size_t> solve_assignment_max(const Eigen::MatrixXd& profit);

}  // namespace shapegraph
