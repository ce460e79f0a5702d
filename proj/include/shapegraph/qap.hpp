#pragma once

// Quadratic assignment over node permutations of two equally sized (padded)
// graphs. A permutation maps node a of the first graph to node perm[a] of the
// second. Its score is vec(P)^T K vec(P) with P(a, j) = [perm[a] == j] and the
// vectorization index a + j * n.

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace shapegraph {

/// Sparse affinity matrix K. The diagonal holds node affinities node(a, j).
/// Off-diagonal entries pair a first-graph edge a < b with an oriented
/// second-graph edge j -> k; they sit at positions (a + j n, b + k n) and
/// its transpose, so a permutation that realizes them gains twice the value.
struct AffinityMatrix {
  size_t n = 0;
  Eigen::MatrixXd node;                            ///< n x n node affinities
  std::vector<std::pair<size_t, size_t>> edges0;   ///< first-graph edges, a < b
  std::vector<std::pair<size_t, size_t>> edges1;   ///< oriented second-graph edges (both directions)
  Eigen::MatrixXd edge;                            ///< |edges0| x |edges1| values
  Eigen::MatrixXi index1;                          ///< n x n: oriented edge index of (j, k), or -1
  std::vector<std::vector<size_t>> incident0;      ///< first-graph node -> indices into edges0

  AffinityMatrix() = default;
  AffinityMatrix(Eigen::MatrixXd node_affinity, std::vector<std::pair<size_t, size_t>> first_edges,
                 std::vector<std::pair<size_t, size_t>> second_edges, Eigen::MatrixXd edge_affinity);

  static size_t slot(size_t a, size_t j, size_t n) { return a + j * n; }

  double score(std::span<const size_t> perm) const;
  /// score(perm with perm[a], perm[b] exchanged) - score(perm).
  double swap_delta(std::span<const size_t> perm, size_t a, size_t b) const;
  /// K x for x of length n^2.
  Eigen::VectorXd multiply(const Eigen::VectorXd& x) const;
  /// Dense n^2 x n^2 matrix; intended for small n.
  Eigen::MatrixXd dense() const;
  /// Largest absolute row sum (Gershgorin bound on the spectrum).
  double row_sum_bound() const;
};

struct QapResult {
  std::vector<size_t> permutation;
  double objective = 0.0;
};

struct SolverOptions {
  std::uint64_t seed = 0;
  int path_stages = 11;       ///< convex-to-concave continuation stages
  int path_iterations = 30;   ///< conditional-gradient steps per stage
  int restarts = 4;           ///< seeded random starts polished by local search
  bool local_search = true;
};

/// Checks that perm is a bijection on 0..n-1; throws ArgumentError otherwise.
void require_permutation(std::span<const size_t> perm, size_t n);

/// Exhaustive search over all n! permutations (n <= 8). Ties keep the
/// lexicographically first permutation. Throws SizeError for n > 8.
QapResult qap_exact(const AffinityMatrix& k);

/// Leading eigenvector of K reshaped to n x n and rounded by linear assignment.
QapResult qap_spectral(const AffinityMatrix& k);

/// Pairwise-exchange hill climbing from `start`.
QapResult qap_local_search(const AffinityMatrix& k, std::vector<size_t> start);

/// Approximate solver: spectral rounding, a doubly-stochastic relaxation path
/// from concave to convex objective with assignment rounding at every step,
/// node-only assignment, identity and seeded random starts, each polished by
/// local search. Extra starting permutations may be supplied.
QapResult qap_solve(const AffinityMatrix& k, const SolverOptions& options = {},
                    std::span<const std::vector<size_t>> warm_starts = {});

}  // namespace shapegraph
