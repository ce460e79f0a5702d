#include "shapegraph/qap.hpp"

#include "shapegraph/assignment.hpp"
#include "shapegraph/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace shapegraph {

AffinityMatrix::AffinityMatrix(Eigen::MatrixXd node_affinity, std::vector<std::pair<size_t, size_t>> first_edges,
                               std::vector<std::pair<size_t, size_t>> second_edges, Eigen::MatrixXd edge_affinity)
    : n(static_cast<size_t>(node_affinity.rows())),
      node(std::move(node_affinity)),
      edges0(std::move(first_edges)),
      edges1(std::move(second_edges)),
      edge(std::move(edge_affinity)) {
  if (node.rows() != node.cols()) throw ArgumentError("affinity: node block must be square");
  if (edge.rows() != static_cast<Eigen::Index>(edges0.size()) ||
      edge.cols() != static_cast<Eigen::Index>(edges1.size()))
    throw ArgumentError("affinity: edge block does not match the edge lists");
  const auto ni = static_cast<Eigen::Index>(n);
  index1 = Eigen::MatrixXi::Constant(ni, ni, -1);
  for (size_t r = 0; r < edges1.size(); ++r) {
    const auto [j, k] = edges1[r];
    if (j >= n || k >= n || j == k) throw ArgumentError("affinity: bad second-graph edge");
    index1(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = static_cast<int>(r);
  }
  incident0.assign(n, {});
  for (size_t p = 0; p < edges0.size(); ++p) {
    const auto [a, b] = edges0[p];
    if (a >= b || b >= n) throw ArgumentError("affinity: first-graph edges must satisfy a < b < n");
    incident0[a].push_back(p);
    incident0[b].push_back(p);
  }
}

namespace {

template <typename Perm>
double edge_term(const AffinityMatrix& k, size_t p, const Perm& perm) {
  const auto [a, b] = k.edges0[p];
  const int r = k.index1(static_cast<Eigen::Index>(perm(a)), static_cast<Eigen::Index>(perm(b)));
  return r < 0 ? 0.0 : k.edge(static_cast<Eigen::Index>(p), r);
}

}  // namespace

double AffinityMatrix::score(std::span<const size_t> perm) const {
  double total = 0.0;
  for (size_t a = 0; a < n; ++a) total += node(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(perm[a]));
  const auto lookup = [&](size_t x) { return perm[x]; };
  for (size_t p = 0; p < edges0.size(); ++p) total += 2.0 * edge_term(*this, p, lookup);
  return total;
}

double AffinityMatrix::swap_delta(std::span<const size_t> perm, size_t a, size_t b) const {
  if (a == b) return 0.0;
  const auto ia = static_cast<Eigen::Index>(a);
  const auto ib = static_cast<Eigen::Index>(b);
  const auto ja = static_cast<Eigen::Index>(perm[a]);
  const auto jb = static_cast<Eigen::Index>(perm[b]);
  double delta = node(ia, jb) + node(ib, ja) - node(ia, ja) - node(ib, jb);
  const auto before = [&](size_t x) { return perm[x]; };
  const auto after = [&](size_t x) { return x == a ? perm[b] : (x == b ? perm[a] : perm[x]); };
  for (size_t p : incident0[a]) delta += 2.0 * (edge_term(*this, p, after) - edge_term(*this, p, before));
  for (size_t p : incident0[b]) {
    const auto [x, y] = edges0[p];
    if (x == a || y == a) continue;  // already counted from a's side
    delta += 2.0 * (edge_term(*this, p, after) - edge_term(*this, p, before));
  }
  return delta;
}

Eigen::VectorXd AffinityMatrix::multiply(const Eigen::VectorXd& x) const {
  if (x.size() != static_cast<Eigen::Index>(n * n)) throw ArgumentError("affinity: vector length must be n^2");
  Eigen::VectorXd y(x.size());
  for (size_t j = 0; j < n; ++j)
    for (size_t a = 0; a < n; ++a) {
      const auto s = static_cast<Eigen::Index>(slot(a, j, n));
      y(s) = node(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(j)) * x(s);
    }
  for (size_t p = 0; p < edges0.size(); ++p) {
    const auto [a, b] = edges0[p];
    for (size_t r = 0; r < edges1.size(); ++r) {
      const double v = edge(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(r));
      if (v == 0.0) continue;
      const auto [j, k] = edges1[r];
      const auto s1 = static_cast<Eigen::Index>(slot(a, j, n));
      const auto s2 = static_cast<Eigen::Index>(slot(b, k, n));
      y(s1) += v * x(s2);
      y(s2) += v * x(s1);
    }
  }
  return y;
}

Eigen::MatrixXd AffinityMatrix::dense() const {
  const auto m = static_cast<Eigen::Index>(n * n);
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(m, m);
  for (size_t j = 0; j < n; ++j)
    for (size_t a = 0; a < n; ++a) {
      const auto s = static_cast<Eigen::Index>(slot(a, j, n));
      k(s, s) = node(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(j));
    }
  for (size_t p = 0; p < edges0.size(); ++p) {
    const auto [a, b] = edges0[p];
    for (size_t r = 0; r < edges1.size(); ++r) {
      const auto [j, kk] = edges1[r];
      const auto s1 = static_cast<Eigen::Index>(slot(a, j, n));
      const auto s2 = static_cast<Eigen::Index>(slot(b, kk, n));
      k(s1, s2) = k(s2, s1) = edge(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(r));
    }
  }
  return k;
}

double AffinityMatrix::row_sum_bound() const {
  if (n == 0) return 0.0;
  return multiply(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n * n))).maxCoeff();
}

void require_permutation(std::span<const size_t> perm, size_t n) {
  if (perm.size() != n) throw ArgumentError("permutation has the wrong length");
  std::vector<char> seen(n, 0);
  for (size_t x : perm) {
    if (x >= n || seen[x]) throw ArgumentError("permutation is not a bijection");
    seen[x] = 1;
  }
}

QapResult qap_exact(const AffinityMatrix& k) {
  if (k.n > 8) throw SizeError("qap_exact supports at most 8 nodes; use qap_solve");
  std::vector<size_t> perm(k.n);
  std::iota(perm.begin(), perm.end(), size_t{0});
  QapResult best{perm, k.score(perm)};
  while (std::next_permutation(perm.begin(), perm.end())) {
    const double s = k.score(perm);
    if (s > best.objective) best = {perm, s};
  }
  return best;
}

namespace {

Eigen::MatrixXd reshape(const Eigen::VectorXd& x, size_t n) {
  const auto ni = static_cast<Eigen::Index>(n);
  return Eigen::Map<const Eigen::MatrixXd>(x.data(), ni, ni);
}

Eigen::VectorXd indicator(const std::vector<size_t>& perm) {
  const size_t n = perm.size();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n * n));
  for (size_t a = 0; a < n; ++a) x(static_cast<Eigen::Index>(AffinityMatrix::slot(a, perm[a], n))) = 1.0;
  return x;
}

QapResult evaluate(const AffinityMatrix& k, std::vector<size_t> perm) {
  const double s = k.score(perm);
  return {std::move(perm), s};
}

// Conditional-gradient ascent on x^T (K + mu I) x over doubly stochastic
// matrices, with mu swept from -bound (concave) to +bound (convex). Every
// linear-assignment vertex visited is a feasible permutation and is scored.
QapResult relaxation_path(const AffinityMatrix& k, const SolverOptions& options) {
  const size_t n = k.n;
  const double bound = std::max(k.row_sum_bound(), 1e-12);
  Eigen::VectorXd x = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n * n), 1.0 / static_cast<double>(n));
  std::vector<size_t> start(n);
  std::iota(start.begin(), start.end(), size_t{0});
  QapResult best = evaluate(k, start);

  const int stages = std::max(options.path_stages, 1);
  for (int st = 0; st < stages; ++st) {
    const double alpha = stages == 1 ? 1.0 : static_cast<double>(st) / static_cast<double>(stages - 1);
    const double mu = (2.0 * alpha - 1.0) * bound;
    for (int it = 0; it < options.path_iterations; ++it) {
      const Eigen::VectorXd kx = k.multiply(x);
      const Eigen::VectorXd g = 2.0 * (kx + mu * x);
      std::vector<size_t> vertex = solve_assignment_max(reshape(g, n));
      const Eigen::VectorXd s = indicator(vertex);
      QapResult cand = evaluate(k, std::move(vertex));
      if (cand.objective > best.objective) best = std::move(cand);

      const Eigen::VectorXd d = s - x;
      const double slope = g.dot(d);
      if (slope <= 1e-12 * bound) break;
      const double curvature = d.dot(k.multiply(d)) + mu * d.squaredNorm();
      double t;
      if (curvature < 0.0)
        t = std::clamp(-slope / (2.0 * curvature), 0.0, 1.0);
      else
        t = slope + curvature > 0.0 ? 1.0 : 0.0;
      if (t <= 0.0) break;
      x += t * d;
    }
    QapResult rounded = evaluate(k, solve_assignment_max(reshape(x, n)));
    if (rounded.objective > best.objective) best = std::move(rounded);
  }
  return best;
}

}  // namespace

QapResult qap_spectral(const AffinityMatrix& k) {
  const size_t n = k.n;
  if (n == 0) return {};
  const auto m = static_cast<Eigen::Index>(n * n);
  // Shift keeps a possible eigenvalue -rho from competing with the Perron value.
  const double shift = 0.1 * k.row_sum_bound();
  Eigen::VectorXd x = Eigen::VectorXd::Constant(m, 1.0 / std::sqrt(static_cast<double>(m)));
  for (int it = 0; it < 500; ++it) {
    Eigen::VectorXd y = k.multiply(x) + shift * x;
    const double norm = y.norm();
    if (norm == 0.0) break;
    y /= norm;
    const double change = (y - x).norm();
    x = std::move(y);
    if (change < 1e-12) break;
  }
  return evaluate(k, solve_assignment_max(reshape(x.cwiseAbs(), n)));
}

QapResult qap_local_search(const AffinityMatrix& k, std::vector<size_t> perm) {
  require_permutation(perm, k.n);
  const double scale = std::max(1.0, k.node.cwiseAbs().maxCoeff());
  bool improved = true;
  while (improved) {
    improved = false;
    for (size_t a = 0; a < k.n; ++a)
      for (size_t b = a + 1; b < k.n; ++b)
        if (k.swap_delta(perm, a, b) > 1e-12 * scale) {
          std::swap(perm[a], perm[b]);
          improved = true;
        }
  }
  return evaluate(k, std::move(perm));
}

QapResult qap_solve(const AffinityMatrix& k, const SolverOptions& options,
                    std::span<const std::vector<size_t>> warm_starts) {
  const size_t n = k.n;
  if (n == 0) return {};
  std::vector<std::vector<size_t>> starts;
  std::vector<size_t> identity(n);
  std::iota(identity.begin(), identity.end(), size_t{0});
  starts.push_back(qap_spectral(k).permutation);
  starts.push_back(relaxation_path(k, options).permutation);
  starts.push_back(solve_assignment_max(k.node));
  starts.push_back(identity);
  for (const auto& w : warm_starts) {
    require_permutation(w, n);
    starts.push_back(w);
  }
  std::mt19937_64 rng(options.seed);
  for (int r = 0; r < options.restarts; ++r) {
    std::vector<size_t> p = identity;
    std::shuffle(p.begin(), p.end(), rng);
    starts.push_back(std::move(p));
  }

  QapResult best;
  bool have = false;
  for (auto& s : starts) {
    QapResult cand = options.local_search ? qap_local_search(k, std::move(s)) : evaluate(k, std::move(s));
    if (!have || cand.objective > best.objective) {
      best = std::move(cand);
      have = true;
    }
  }
  return best;
}

}  // namespace shapegraph
