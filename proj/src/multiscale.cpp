#include "shapegraph/multiscale.hpp"

#include "parallel.hpp"
#include "shapegraph/errors.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <unordered_map>

namespace shapegraph {

std::string to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::kEuclidean:
      return "euclidean";
    case MetricKind::kGeodesic:
      return "geodesic";
    case MetricKind::kResistance:
      return "resistance";
  }
  return "resistance";
}

MetricKind metric_kind_from_string(const std::string& name) {
  if (name == "euclidean") return MetricKind::kEuclidean;
  if (name == "geodesic") return MetricKind::kGeodesic;
  if (name == "resistance" || name == "effective_resistance") return MetricKind::kResistance;
  throw ArgumentError("unknown metric '" + name + "' (expected euclidean, geodesic or resistance)");
}

namespace {

struct WeightedEdge {
  size_t a;
  size_t b;
  double length;
};

std::vector<WeightedEdge> edge_lengths(const ShapeGraph& g) {
  std::unordered_map<std::string, size_t> index;
  for (size_t i = 0; i < g.nodes.size(); ++i) index.emplace(g.nodes[i].id, i);
  std::vector<WeightedEdge> out;
  for (const auto& e : g.edges) {
    const auto iu = index.find(e.u);
    const auto iv = index.find(e.v);
    if (iu == index.end() || iv == index.end()) throw DataError("edge references a missing node");
    if (iu->second == iv->second) continue;
    const double len = arc_length(e.curve);
    if (!(len > 0.0)) throw PreconditionError("internal_metric: edge (" + e.u + ", " + e.v + ") has zero length");
    out.push_back({iu->second, iv->second, len});
  }
  return out;
}

Eigen::MatrixXd shortest_paths(size_t n, const std::vector<WeightedEdge>& edges) {
  std::vector<std::vector<std::pair<size_t, double>>> adj(n);
  for (const auto& e : edges) {
    adj[e.a].emplace_back(e.b, e.length);
    adj[e.b].emplace_back(e.a, e.length);
  }
  const double inf = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd d = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n), inf);
  for (size_t s = 0; s < n; ++s) {
    std::vector<double> dist(n, inf);
    using Item = std::pair<double, size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[s] = 0.0;
    heap.emplace(0.0, s);
    while (!heap.empty()) {
      const auto [du, u] = heap.top();
      heap.pop();
      if (du > dist[u]) continue;
      for (const auto& [v, w] : adj[u])
        if (du + w < dist[v]) {
          dist[v] = du + w;
          heap.emplace(dist[v], v);
        }
    }
    for (size_t t = 0; t < n; ++t) d(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) = dist[t];
  }
  return d;
}

std::vector<std::vector<size_t>> components(size_t n, const std::vector<WeightedEdge>& edges) {
  std::vector<size_t> parent(n);
  std::iota(parent.begin(), parent.end(), size_t{0});
  auto find = [&](size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& e : edges) {
    const size_t ra = find(e.a);
    const size_t rb = find(e.b);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  std::vector<std::vector<size_t>> out;
  std::vector<long> slot(n, -1);
  for (size_t i = 0; i < n; ++i) {
    const size_t r = find(i);
    if (slot[r] < 0) {
      slot[r] = static_cast<long>(out.size());
      out.emplace_back();
    }
    out[static_cast<size_t>(slot[r])].push_back(i);
  }
  return out;
}

// Effective resistances within each component from the pseudoinverse of the
// component Laplacian, (L + J/m)^-1 - J/m. On a tree component the resistance
// is the unique path length, taken directly so that series chains stay exact.
Eigen::MatrixXd resistances(size_t n, const std::vector<WeightedEdge>& edges) {
  const double inf = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd r = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n), inf);
  std::vector<size_t> local(n);
  std::vector<size_t> comp_of(n);
  const auto comps = components(n, edges);
  for (size_t c = 0; c < comps.size(); ++c)
    for (size_t k = 0; k < comps[c].size(); ++k) {
      local[comps[c][k]] = k;
      comp_of[comps[c][k]] = c;
    }
  std::vector<Eigen::MatrixXd> laplacians;
  for (const auto& comp : comps) {
    const auto m = static_cast<Eigen::Index>(comp.size());
    laplacians.push_back(Eigen::MatrixXd::Zero(m, m));
  }
  for (const auto& e : edges) {
    auto& lap = laplacians[comp_of[e.a]];
    const auto a = static_cast<Eigen::Index>(local[e.a]);
    const auto b = static_cast<Eigen::Index>(local[e.b]);
    const double w = 1.0 / e.length;
    lap(a, a) += w;
    lap(b, b) += w;
    lap(a, b) -= w;
    lap(b, a) -= w;
  }
  std::vector<size_t> edge_count(comps.size(), 0);
  for (const auto& e : edges) ++edge_count[comp_of[e.a]];
  Eigen::MatrixXd paths;
  for (size_t c = 0; c < comps.size(); ++c) {
    const auto m = static_cast<Eigen::Index>(comps[c].size());
    if (edge_count[c] + 1 == comps[c].size()) {
      if (paths.size() == 0) paths = shortest_paths(n, edges);
      for (size_t i : comps[c])
        for (size_t j : comps[c]) {
          const auto a = static_cast<Eigen::Index>(i);
          const auto b = static_cast<Eigen::Index>(j);
          r(a, b) = paths(a, b);
        }
      continue;
    }
    const double jm = 1.0 / static_cast<double>(m);
    const Eigen::MatrixXd shifted = laplacians[c] + Eigen::MatrixXd::Constant(m, m, jm);
    const Eigen::MatrixXd pinv = shifted.ldlt().solve(Eigen::MatrixXd::Identity(m, m)) - Eigen::MatrixXd::Constant(m, m, jm);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j) {
        const double v = i == j ? 0.0 : std::max(0.0, pinv(i, i) + pinv(j, j) - 2.0 * pinv(i, j));
        r(static_cast<Eigen::Index>(comps[c][static_cast<size_t>(i)]),
          static_cast<Eigen::Index>(comps[c][static_cast<size_t>(j)])) = v;
      }
  }
  return r;
}

void fill_disconnected(Eigen::MatrixXd& d) {
  double largest = 0.0;
  for (Eigen::Index i = 0; i < d.size(); ++i)
    if (std::isfinite(d.data()[i])) largest = std::max(largest, d.data()[i]);
  const double sentinel = largest > 0.0 ? 10.0 * largest : 1.0;
  for (Eigen::Index i = 0; i < d.size(); ++i)
    if (!std::isfinite(d.data()[i])) d.data()[i] = sentinel;
}

}  // namespace

InternalMetric internal_metric(const ShapeGraph& g, MetricKind kind) {
  const size_t n = g.nodes.size();
  for (const auto& node : g.nodes)
    if (node.is_null()) throw PreconditionError("internal_metric: null node '" + node.id + "' has no position");
  InternalMetric out;
  out.kind = kind;
  if (kind == MetricKind::kEuclidean) {
    out.matrix.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j)
        out.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            (*g.nodes[i].position - *g.nodes[j].position).norm();
    return out;
  }
  const auto edges = edge_lengths(g);
  out.matrix = kind == MetricKind::kGeodesic ? shortest_paths(n, edges) : resistances(n, edges);
  fill_disconnected(out.matrix);
  return out;
}

std::vector<size_t> Dendrogram::cut(size_t k) const {
  if (leaves == 0) return {};
  if (k < 1 || k > leaves) throw ArgumentError("dendrogram cut: cluster count must lie in [1, n]");
  std::vector<size_t> parent(leaves + merges.size());
  std::iota(parent.begin(), parent.end(), size_t{0});
  auto find = [&](size_t x) {
    while (parent[x] != x) x = parent[x];
    return x;
  };
  for (size_t t = 0; t < leaves - k; ++t) {
    parent[merges[t].left] = leaves + t;
    parent[merges[t].right] = leaves + t;
  }
  std::vector<size_t> label(leaves);
  std::unordered_map<size_t, size_t> ids;
  for (size_t i = 0; i < leaves; ++i) {
    const size_t root = find(i);
    const auto it = ids.emplace(root, ids.size()).first;
    label[i] = it->second;
  }
  return label;
}

Dendrogram build_dendrogram(const Eigen::MatrixXd& distances) {
  if (distances.rows() != distances.cols()) throw ArgumentError("build_dendrogram: matrix must be square");
  const size_t n = static_cast<size_t>(distances.rows());
  Dendrogram out;
  out.leaves = n;
  if (n == 0) return out;
  const size_t total = 2 * n - 1;
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(total));
  d.topLeftCorner(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) = distances;
  std::vector<size_t> active(n);
  std::iota(active.begin(), active.end(), size_t{0});

  while (active.size() > 1) {
    size_t bi = 0;
    size_t bj = 1;
    double best = std::numeric_limits<double>::infinity();
    // `active` stays sorted, so the scan visits pairs in (i, j) order.
    for (size_t x = 0; x < active.size(); ++x)
      for (size_t y = x + 1; y < active.size(); ++y) {
        const double v = d(static_cast<Eigen::Index>(active[x]), static_cast<Eigen::Index>(active[y]));
        if (v < best) {
          best = v;
          bi = x;
          bj = y;
        }
      }
    const size_t left = active[bi];
    const size_t right = active[bj];
    const size_t id = n + out.merges.size();
    out.merges.push_back({left, right, best});
    active.erase(active.begin() + static_cast<long>(bj));
    active.erase(active.begin() + static_cast<long>(bi));
    for (size_t other : active) {
      const auto o = static_cast<Eigen::Index>(other);
      const double v = std::max(d(static_cast<Eigen::Index>(left), o), d(static_cast<Eigen::Index>(right), o));
      d(static_cast<Eigen::Index>(id), o) = d(o, static_cast<Eigen::Index>(id)) = v;
    }
    active.push_back(id);
  }
  return out;
}

size_t cluster_count(double h, size_t n) {
  if (!(h > 0.0 && h <= 1.0)) throw ArgumentError("resolution h must lie in (0, 1]");
  return std::max<size_t>(1, static_cast<size_t>(std::llround(h * static_cast<double>(n))));
}

CoarseGraph coarsen(const ShapeGraph& g, const Dendrogram& dendrogram, double h, int samples) {
  const size_t n = g.nodes.size();
  if (dendrogram.leaves != n) throw ArgumentError("coarsen: dendrogram was built on a different node set");
  CoarseGraph out;
  out.h = h;
  if (n == 0) {
    cluster_count(h, 1);
    return out;
  }
  const size_t k = cluster_count(h, n);
  out.assignment = dendrogram.cut(k);

  std::vector<std::vector<size_t>> members(k);
  for (size_t i = 0; i < n; ++i) members[out.assignment[i]].push_back(i);
  std::vector<Point> rep(k, Point::Zero());
  for (size_t c = 0; c < k; ++c) {
    for (size_t i : members[c]) {
      if (g.nodes[i].is_null()) throw PreconditionError("coarsen: null node '" + g.nodes[i].id + "'");
      rep[c] += *g.nodes[i].position;
    }
    rep[c] /= static_cast<double>(members[c].size());
    const std::string id = members[c].size() == 1 ? g.nodes[members[c][0]].id : "c" + std::to_string(c);
    out.graph.nodes.push_back({id, rep[c]});
  }
  out.graph.metadata = g.metadata;

  std::unordered_map<std::string, size_t> index;
  for (size_t i = 0; i < n; ++i) index.emplace(g.nodes[i].id, i);
  std::map<std::pair<size_t, size_t>, std::vector<SrvCurve>> joining;
  for (const auto& e : g.edges) {
    const size_t cu = out.assignment[index.at(e.u)];
    const size_t cv = out.assignment[index.at(e.v)];
    if (cu == cv) continue;
    const PlanarCurve oriented = cu < cv ? e.curve : reversed(e.curve);
    joining[std::minmax(cu, cv)].push_back(to_srvf(resample(oriented, samples)));
  }

  for (const auto& [key, curves] : joining) {
    const Point& p = rep[key.first];
    const Point& q = rep[key.second];
    if ((p - q).norm() == 0.0) continue;
    const SrvCurve mean = karcher_mean_curves(curves).mean;
    PlanarCurve curve = curve_between(mean, p, q);
    const double w = arc_length(curve);
    out.graph.edges.push_back({out.graph.nodes[key.first].id, out.graph.nodes[key.second].id, std::move(curve), w});
  }
  return out;
}

std::vector<double> default_levels(int count) {
  if (count < 1) throw ArgumentError("default_levels: count must be positive");
  std::vector<double> out;
  for (int k = 1; k <= count; ++k) out.push_back(static_cast<double>(k) / static_cast<double>(count));
  return out;
}

ResolutionSelection select_resolution(const ShapeGraph& g1, const ShapeGraph& g2, const std::vector<double>& levels,
                                      const RegistrationParams& params, MetricKind kind) {
  if (levels.empty()) throw ArgumentError("select_resolution: no levels given");
  for (double h : levels) cluster_count(h, 1);
  const Dendrogram dend = build_dendrogram(internal_metric(g2, kind).matrix);

  std::vector<CoarseGraph> coarse(levels.size());
  std::vector<double> dist(levels.size());
  detail::parallel_for(levels.size(), [&](size_t i) {
    coarse[i] = coarsen(g2, dend, levels[i], params.samples);
    dist[i] = register_pair(g1, coarse[i].graph, params).distance;
  });

  size_t best = 0;
  for (size_t i = 1; i < levels.size(); ++i)
    if (dist[i] < dist[best] || (dist[i] == dist[best] && levels[i] > levels[best])) best = i;
  ResolutionSelection out;
  out.h = levels[best];
  out.coarse = coarse[best];
  out.levels = levels;
  out.distances = std::move(dist);
  return out;
}

}  // namespace shapegraph
