#include "shapegraph/synthetic.hpp"

#include "shapegraph/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <unordered_map>

namespace shapegraph {

PlanarCurve bent_curve(const Point& p, const Point& q, double offset, int points) {
  if (points < 2) throw ArgumentError("bent_curve: need at least 2 points");
  const Point chord = q - p;
  const Point normal(-chord.y(), chord.x());
  const Point control = 0.5 * (p + q) + offset * normal;
  Eigen::Matrix2Xd pts(2, points);
  for (int s = 0; s < points; ++s) {
    const double t = static_cast<double>(s) / static_cast<double>(points - 1);
    pts.col(s) = (1 - t) * (1 - t) * p + 2 * t * (1 - t) * control + t * t * q;
  }
  pts.col(0) = p;
  pts.col(points - 1) = q;
  return PlanarCurve(std::move(pts));
}

namespace {

// Relative bulge of a curve produced by bent_curve, read off its second sample.
double bulge_of(const PlanarCurve& c) {
  const Eigen::Index n = c.size();
  if (n < 3) return 0.0;
  const Point p = c.front();
  const Point q = c.back();
  const Point chord = q - p;
  const double len2 = chord.squaredNorm();
  if (len2 == 0.0) return 0.0;
  const double t = 1.0 / static_cast<double>(n - 1);
  const Point lerp = (1 - t) * p + t * q;
  const Point excess = (c.points.col(1) - lerp) / (2 * t * (1 - t));
  return excess.dot(Point(-chord.y(), chord.x())) / len2;
}

}  // namespace

ShapeGraph random_graph(size_t nodes, std::mt19937_64& rng, const SyntheticOptions& options) {
  std::uniform_real_distribution<double> coord(0.0, options.extent);
  std::uniform_real_distribution<double> bend(-options.bend, options.bend);
  const double min_sep = nodes > 1 ? 0.5 * options.extent / std::sqrt(static_cast<double>(nodes)) : 0.0;

  ShapeGraph g;
  std::vector<Point> pos;
  for (size_t i = 0; i < nodes; ++i) {
    Point p;
    for (int attempt = 0; attempt < 1000; ++attempt) {
      p = Point(coord(rng), coord(rng));
      bool ok = true;
      for (const auto& other : pos)
        if ((other - p).norm() < min_sep) ok = false;
      if (ok) break;
    }
    pos.push_back(p);
    g.nodes.push_back({"n" + std::to_string(i), p});
  }

  std::set<std::pair<size_t, size_t>> edges;
  auto nearest = [&](size_t i, size_t limit, bool skip_adjacent) {
    size_t best = i;
    double best_d = std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < limit; ++j) {
      if (j == i || (skip_adjacent && edges.count(std::minmax(i, j)))) continue;
      const double d = (pos[i] - pos[j]).norm();
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    return best;
  };
  for (size_t i = 1; i < nodes; ++i) edges.insert(std::minmax(i, nearest(i, i, false)));
  const auto extra = static_cast<size_t>(std::lround(options.extra_edges * static_cast<double>(nodes)));
  if (nodes > 2) {
    std::uniform_int_distribution<size_t> pick(0, nodes - 1);
    for (size_t k = 0; k < extra; ++k) {
      const size_t i = pick(rng);
      const size_t j = nearest(i, nodes, true);
      if (j != i) edges.insert(std::minmax(i, j));
    }
  }
  for (const auto& [a, b] : edges)
    g.edges.push_back({g.nodes[a].id, g.nodes[b].id, bent_curve(pos[a], pos[b], bend(rng), options.curve_points), {}});
  return g;
}

PerturbedGraph perturb(const ShapeGraph& base, std::mt19937_64& rng, const PerturbOptions& options) {
  std::normal_distribution<double> jitter(0.0, 1.0);
  std::uniform_real_distribution<double> bend(-options.bend_jitter, options.bend_jitter);
  const size_t n = base.nodes.size();
  std::unordered_map<std::string, size_t> index;
  for (size_t i = 0; i < n; ++i) index.emplace(base.nodes[i].id, i);

  std::vector<Point> pos(n);
  for (size_t i = 0; i < n; ++i) {
    if (!base.nodes[i].position) throw PreconditionError("perturb: null nodes are not supported");
    pos[i] = *base.nodes[i].position + options.node_jitter * Point(jitter(rng), jitter(rng));
  }
  std::vector<double> offsets;
  for (const auto& e : base.edges) offsets.push_back(bulge_of(e.curve) + bend(rng));

  std::vector<char> edge_alive(base.edges.size(), 1);
  std::vector<char> node_alive(n, 1);
  if (options.stretch > 0.0 && !base.edges.empty()) {
    std::uniform_int_distribution<size_t> pick(0, base.edges.size() - 1);
    const size_t k = pick(rng);
    offsets[k] += offsets[k] >= 0.0 ? options.stretch : -options.stretch;
  }
  if (options.delete_node) {
    std::vector<int> deg(n, 0);
    for (const auto& e : base.edges) {
      ++deg[index.at(e.u)];
      ++deg[index.at(e.v)];
    }
    std::vector<size_t> leaves;
    for (size_t i = 0; i < n; ++i)
      if (deg[i] == 1) leaves.push_back(i);
    if (!leaves.empty()) {
      std::uniform_int_distribution<size_t> pick(0, leaves.size() - 1);
      const size_t victim = leaves[pick(rng)];
      node_alive[victim] = 0;
      for (size_t k = 0; k < base.edges.size(); ++k)
        if (index.at(base.edges[k].u) == victim || index.at(base.edges[k].v) == victim) edge_alive[k] = 0;
    }
  }
  if (options.delete_edge) {
    std::vector<size_t> alive;
    for (size_t k = 0; k < base.edges.size(); ++k)
      if (edge_alive[k]) alive.push_back(k);
    if (!alive.empty()) {
      std::uniform_int_distribution<size_t> pick(0, alive.size() - 1);
      edge_alive[alive[pick(rng)]] = 0;
    }
  }

  std::vector<size_t> order;
  for (size_t i = 0; i < n; ++i)
    if (node_alive[i]) order.push_back(i);
  if (options.reorder) std::shuffle(order.begin(), order.end(), rng);

  PerturbedGraph out;
  out.graph.metadata = base.metadata;
  out.correspondence.assign(n, std::nullopt);
  for (size_t k = 0; k < order.size(); ++k) {
    out.correspondence[order[k]] = k;
    out.graph.nodes.push_back({base.nodes[order[k]].id, pos[order[k]]});
  }
  for (size_t k = 0; k < base.edges.size(); ++k) {
    if (!edge_alive[k]) continue;
    const auto& e = base.edges[k];
    const size_t a = index.at(e.u);
    const size_t b = index.at(e.v);
    out.graph.edges.push_back({e.u, e.v, bent_curve(pos[a], pos[b], offsets[k], static_cast<int>(e.curve.size())), {}});
  }
  return out;
}

}  // namespace shapegraph
