#pragma once

// Independent reference computations and fixtures shared by the test suites.

#include "shapegraph/curves.hpp"
#include "shapegraph/graph.hpp"
#include "shapegraph/qap.hpp"
#include "shapegraph/synthetic.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace testing {

using shapegraph::Point;

inline shapegraph::PlanarCurve segment(const Point& p, const Point& q, int samples) {
  Eigen::Matrix2Xd pts(2, samples);
  for (int s = 0; s < samples; ++s) {
    const double t = static_cast<double>(s) / static_cast<double>(samples - 1);
    pts.col(s) = (1.0 - t) * p + t * q;
  }
  return shapegraph::PlanarCurve(std::move(pts));
}

inline shapegraph::PlanarCurve random_curve(std::mt19937_64& rng, int samples) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Matrix2Xd pts(2, samples);
  Point p(n(rng), n(rng));
  Point heading(1.0, 0.0);
  for (int s = 0; s < samples; ++s) {
    pts.col(s) = p;
    const double turn = 0.6 * n(rng);
    heading = Eigen::Rotation2Dd(turn) * heading;
    p += (0.5 + 0.5 * std::abs(n(rng))) * heading;
  }
  return shapegraph::PlanarCurve(std::move(pts));
}

// Trapezoid integral of |q0(t) - sqrt(m) q1(gamma(t))|^2 over one straight
// lattice segment, evaluated from the definition with exact rational
// interpolation positions.
inline double segment_cost(const Eigen::Matrix2Xd& q0, const Eigen::Matrix2Xd& q1, int k, int l, int i, int j) {
  const int n = static_cast<int>(q0.cols());
  const double dt = 1.0 / static_cast<double>(n - 1);
  const int di = i - k;
  const int dj = j - l;
  const double root = std::sqrt(static_cast<double>(dj) / static_cast<double>(di));
  double sum = 0.0;
  for (int s = k; s <= i; ++s) {
    const int num = dj * (s - k);
    int whole = l + num / di;
    double frac = static_cast<double>(num % di) / static_cast<double>(di);
    if (whole >= n - 1) {
      whole = n - 1;
      frac = 0.0;
    }
    Eigen::Vector2d v = q1.col(whole);
    if (frac > 0.0) v += frac * (Eigen::Vector2d(q1.col(whole + 1)) - v);
    const Eigen::Vector2d d = Eigen::Vector2d(q0.col(s)) - root * v;
    const double f = d.x() * d.x() + d.y() * d.y();
    sum += (s == k || s == i) ? 0.5 * f : f;
  }
  return dt * sum;
}

// Minimum over every monotone lattice path from (0,0) to (n-1,n-1) whose
// steps are drawn from `steps`, by plain enumeration.
inline double exhaustive_warp_objective(const Eigen::Matrix2Xd& q0, const Eigen::Matrix2Xd& q1,
                                        const std::vector<std::pair<int, int>>& steps, long* paths = nullptr) {
  const int end = static_cast<int>(q0.cols()) - 1;
  double best = std::numeric_limits<double>::infinity();
  long count = 0;
  std::function<void(int, int, double)> walk = [&](int i, int j, double acc) {
    if (i == end && j == end) {
      ++count;
      best = std::min(best, acc);
      return;
    }
    for (const auto& [di, dj] : steps) {
      const int ni = i + di;
      const int nj = j + dj;
      if (ni > end || nj > end) continue;
      walk(ni, nj, acc + segment_cost(q0, q1, i, j, ni, nj));
    }
  };
  walk(0, 0, 0.0);
  if (paths) *paths = count;
  return best;
}

// Best vec(P)^T K vec(P) over all permutations, from the dense matrix.
inline double brute_force_qap(const shapegraph::AffinityMatrix& k) {
  const Eigen::MatrixXd dense = k.dense();
  const size_t n = k.n;
  std::vector<size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = -std::numeric_limits<double>::infinity();
  do {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n * n));
    for (size_t a = 0; a < n; ++a) x(static_cast<Eigen::Index>(a + perm[a] * n)) = 1.0;
    best = std::max(best, x.dot(dense * x));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Random affinity instance built like a registration: nonnegative node terms
// and edge terms between two random edge sets.
inline shapegraph::AffinityMatrix random_affinity(size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd node(n, n);
  for (size_t a = 0; a < n; ++a)
    for (size_t j = 0; j < n; ++j) node(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(j)) = 0.5 * u(rng);
  std::vector<std::pair<size_t, size_t>> e0, e1;
  for (size_t a = 0; a < n; ++a)
    for (size_t b = a + 1; b < n; ++b) {
      if (u(rng) < 0.5) e0.emplace_back(a, b);
      if (u(rng) < 0.5) {
        e1.emplace_back(a, b);
        e1.emplace_back(b, a);
      }
    }
  Eigen::MatrixXd edge(static_cast<Eigen::Index>(e0.size()), static_cast<Eigen::Index>(e1.size()));
  for (Eigen::Index r = 0; r < edge.rows(); ++r)
    for (Eigen::Index c = 0; c < edge.cols(); ++c) edge(r, c) = 0.5 * u(rng);
  return shapegraph::AffinityMatrix(node, e0, e1, edge);
}

// The permutation of padded nodes that the perturbation itself implies:
// surviving nodes go to their copies, deleted nodes to null slots, and the
// first graph's null padding fills the remaining second-graph slots in order.
inline std::vector<size_t> ground_truth_permutation(const shapegraph::PerturbedGraph& p, size_t n0) {
  const size_t n1 = p.graph.nodes.size();
  const size_t total = n0 + n1;
  std::vector<size_t> perm(total);
  std::vector<char> used(total, 0);
  size_t next_null = n1;
  for (size_t a = 0; a < n0; ++a) {
    perm[a] = p.correspondence[a] ? *p.correspondence[a] : next_null++;
    used[perm[a]] = 1;
  }
  size_t free_slot = 0;
  for (size_t a = n0; a < total; ++a) {
    while (used[free_slot]) ++free_slot;
    perm[a] = free_slot;
    used[free_slot] = 1;
  }
  return perm;
}

// Effective resistance by brute force: inject a unit current at i, ground j,
// solve the reduced Laplacian system.
inline double resistance_by_solve(const shapegraph::ShapeGraph& g, size_t i, size_t j) {
  const auto n = static_cast<Eigen::Index>(g.nodes.size());
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : g.edges) {
    const auto a = static_cast<Eigen::Index>(*g.index_of(e.u));
    const auto b = static_cast<Eigen::Index>(*g.index_of(e.v));
    const double c = 1.0 / shapegraph::arc_length(e.curve);
    lap(a, a) += c;
    lap(b, b) += c;
    lap(a, b) -= c;
    lap(b, a) -= c;
  }
  if (i == j) return 0.0;
  // Drop row/column j (ground) and solve for potentials.
  std::vector<Eigen::Index> keep;
  for (Eigen::Index r = 0; r < n; ++r)
    if (r != static_cast<Eigen::Index>(j)) keep.push_back(r);
  Eigen::MatrixXd reduced(n - 1, n - 1);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n - 1);
  for (size_t r = 0; r < keep.size(); ++r) {
    for (size_t c = 0; c < keep.size(); ++c)
      reduced(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = lap(keep[r], keep[c]);
    if (keep[r] == static_cast<Eigen::Index>(i)) rhs(static_cast<Eigen::Index>(r)) = 1.0;
  }
  const Eigen::VectorXd phi = reduced.ldlt().solve(rhs);
  for (size_t r = 0; r < keep.size(); ++r)
    if (keep[r] == static_cast<Eigen::Index>(i)) return phi(static_cast<Eigen::Index>(r));
  return 0.0;
}

// All-pairs shortest path lengths by Floyd-Warshall with arc-length weights.
inline Eigen::MatrixXd floyd_warshall(const shapegraph::ShapeGraph& g) {
  const auto n = static_cast<Eigen::Index>(g.nodes.size());
  const double inf = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd d = Eigen::MatrixXd::Constant(n, n, inf);
  for (Eigen::Index a = 0; a < n; ++a) d(a, a) = 0.0;
  for (const auto& e : g.edges) {
    const auto a = static_cast<Eigen::Index>(*g.index_of(e.u));
    const auto b = static_cast<Eigen::Index>(*g.index_of(e.v));
    const double len = shapegraph::arc_length(e.curve);
    d(a, b) = std::min(d(a, b), len);
    d(b, a) = d(a, b);
  }
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = 0; b < n; ++b) d(a, b) = std::min(d(a, b), d(a, k) + d(k, b));
  return d;
}

// Graph on explicit positions with straight edges.
inline shapegraph::ShapeGraph straight_graph(const std::vector<std::pair<std::string, Point>>& nodes,
                                             const std::vector<std::pair<std::string, std::string>>& edges,
                                             int samples = 20) {
  shapegraph::ShapeGraph g;
  for (const auto& [id, p] : nodes) g.nodes.push_back({id, p});
  for (const auto& [u, v] : edges) {
    const Point p = *g.nodes[*g.index_of(u)].position;
    const Point q = *g.nodes[*g.index_of(v)].position;
    g.edges.push_back({u, v, segment(p, q, samples), {}});
  }
  return g;
}

}  // namespace testing
