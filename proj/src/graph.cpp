#include "shapegraph/graph.hpp"

#include "shapegraph/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace shapegraph {

std::optional<size_t> ShapeGraph::index_of(const std::string& id) const {
  for (size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].id == id) return i;
  return std::nullopt;
}

size_t ShapeGraph::real_node_count() const {
  return static_cast<size_t>(std::count_if(nodes.begin(), nodes.end(), [](const Node& n) { return !n.is_null(); }));
}

double ShapeGraph::total_edge_length() const {
  double total = 0.0;
  for (const auto& e : edges) total += arc_length(e.curve);
  return total;
}

std::string to_string(WeightPolicy policy) { return policy == WeightPolicy::kBinary ? "binary" : "length"; }

WeightPolicy weight_policy_from_string(const std::string& name) {
  if (name == "binary") return WeightPolicy::kBinary;
  if (name == "length") return WeightPolicy::kLength;
  throw ArgumentError("unknown weight policy '" + name + "' (expected binary or length)");
}

std::vector<Violation> validate(const ShapeGraph& g) {
  std::vector<Violation> out;
  std::unordered_map<std::string, size_t> index;
  for (size_t i = 0; i < g.nodes.size(); ++i) {
    const auto& n = g.nodes[i];
    if (!index.emplace(n.id, i).second) out.push_back({"duplicate-node", "duplicate node id '" + n.id + "'"});
    if (n.position && !n.position->allFinite())
      out.push_back({"non-finite-position", "node '" + n.id + "' has a non-finite position"});
  }

  std::set<std::pair<std::string, std::string>> pairs;
  for (size_t k = 0; k < g.edges.size(); ++k) {
    const auto& e = g.edges[k];
    const std::string label = "edge " + std::to_string(k) + " (" + e.u + ", " + e.v + ")";
    if (e.u == e.v) out.push_back({"self-loop", "self-loop at node '" + e.u + "'"});
    const auto key = std::minmax(e.u, e.v);
    if (e.u != e.v && !pairs.insert({key.first, key.second}).second)
      out.push_back({"multi-edge", "more than one curve between '" + e.u + "' and '" + e.v + "'"});
    if (e.weight && !(std::isfinite(*e.weight) && *e.weight >= 0.0))
      out.push_back({"bad-weight", label + " has a negative or non-finite weight"});
    if (e.curve.size() < 2) {
      out.push_back({"short-curve", label + " has fewer than 2 curve points"});
      continue;
    }
    if (!e.curve.points.allFinite()) out.push_back({"non-finite-curve", label + " has non-finite curve points"});

    const auto iu = index.find(e.u);
    const auto iv = index.find(e.v);
    if (iu == index.end()) out.push_back({"missing-node", label + " references missing node '" + e.u + "'"});
    if (iv == index.end()) out.push_back({"missing-node", label + " references missing node '" + e.v + "'"});
    if (iu == index.end() || iv == index.end()) continue;
    const auto& nu = g.nodes[iu->second];
    const auto& nv = g.nodes[iv->second];
    const bool real = !e.weight || *e.weight > 0.0;
    if ((nu.is_null() || nv.is_null()) && real)
      out.push_back({"null-node-edge", label + " is a real edge incident to a null node"});
    if (nu.position && (e.curve.front() - *nu.position).norm() > kEndpointTolerance)
      out.push_back({"endpoint-mismatch", label + " starts away from node '" + e.u + "'"});
    if (nv.position && (e.curve.back() - *nv.position).norm() > kEndpointTolerance)
      out.push_back({"endpoint-mismatch", label + " ends away from node '" + e.v + "'"});
  }
  return out;
}

ShapeGraph assign_weights(ShapeGraph g, WeightPolicy policy) {
  for (auto& e : g.edges) e.weight = policy == WeightPolicy::kBinary ? 1.0 : arc_length(e.curve);
  return g;
}

namespace {

std::string unique_id(const std::string& base, const std::unordered_set<std::string>& taken) {
  std::string id = base;
  while (taken.count(id)) id += "'";
  return id;
}

ShapeGraph padded_with(const ShapeGraph& g, const ShapeGraph& other) {
  ShapeGraph out = g;
  std::unordered_set<std::string> taken;
  for (const auto& n : g.nodes) taken.insert(n.id);
  for (const auto& n : other.nodes) {
    const std::string id = unique_id("null:" + n.id, taken);
    taken.insert(id);
    out.nodes.push_back({id, std::nullopt});
  }
  return out;
}

}  // namespace

std::pair<ShapeGraph, ShapeGraph> pad_nulls(const ShapeGraph& g0, const ShapeGraph& g1) {
  return {padded_with(g0, g1), padded_with(g1, g0)};
}

std::vector<std::vector<size_t>> connected_components(const ShapeGraph& g) {
  const size_t n = g.nodes.size();
  std::unordered_map<std::string, size_t> index;
  for (size_t i = 0; i < n; ++i) index.emplace(g.nodes[i].id, i);
  std::vector<std::vector<size_t>> adj(n);
  for (const auto& e : g.edges) {
    const auto iu = index.find(e.u);
    const auto iv = index.find(e.v);
    if (iu == index.end() || iv == index.end()) continue;
    adj[iu->second].push_back(iv->second);
    adj[iv->second].push_back(iu->second);
  }

  std::vector<std::vector<size_t>> comps;
  std::vector<bool> seen(n, false);
  for (size_t start = 0; start < n; ++start) {
    if (seen[start]) continue;
    std::vector<size_t> comp;
    std::vector<size_t> stack{start};
    seen[start] = true;
    while (!stack.empty()) {
      const size_t v = stack.back();
      stack.pop_back();
      comp.push_back(v);
      for (size_t w : adj[v])
        if (!seen[w]) {
          seen[w] = true;
          stack.push_back(w);
        }
    }
    std::sort(comp.begin(), comp.end());
    comps.push_back(std::move(comp));
  }
  return comps;
}

ShapeGraph induced_subgraph(const ShapeGraph& g, std::span<const size_t> node_indices) {
  ShapeGraph out;
  out.metadata = g.metadata;
  std::unordered_set<std::string> keep;
  std::vector<size_t> sorted(node_indices.begin(), node_indices.end());
  std::sort(sorted.begin(), sorted.end());
  for (size_t i : sorted) {
    out.nodes.push_back(g.nodes.at(i));
    keep.insert(g.nodes[i].id);
  }
  for (const auto& e : g.edges)
    if (keep.count(e.u) && keep.count(e.v)) out.edges.push_back(e);
  return out;
}

ShapeGraph remove_small_components(const ShapeGraph& g, size_t min_nodes) {
  if (min_nodes == 0) return g;
  std::vector<size_t> keep;
  for (const auto& comp : connected_components(g))
    if (comp.size() >= min_nodes) keep.insert(keep.end(), comp.begin(), comp.end());
  return induced_subgraph(g, keep);
}

std::pair<ShapeGraph, ShapeGraph> fiedler_bipartition(const ShapeGraph& g) {
  const size_t n = g.nodes.size();
  if (n < 2) throw PreconditionError("fiedler_bipartition: need at least 2 nodes");

  // Work in node-id order so the result does not depend on storage order.
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return g.nodes[a].id < g.nodes[b].id; });
  std::unordered_map<std::string, size_t> rank;
  for (size_t r = 0; r < n; ++r) rank.emplace(g.nodes[order[r]].id, r);

  ShapeGraph binary;
  binary.nodes = g.nodes;
  for (const auto& e : g.edges)
    if (!e.weight || *e.weight > 0.0) binary.edges.push_back(e);
  if (connected_components(binary).size() != 1)
    throw PreconditionError("fiedler_bipartition: graph is disconnected; remove small components first");

  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::set<std::pair<size_t, size_t>> seen;
  for (const auto& e : binary.edges) {
    auto a = rank.at(e.u);
    auto b = rank.at(e.v);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (!seen.insert({a, b}).second) continue;
    const auto ia = static_cast<Eigen::Index>(a);
    const auto ib = static_cast<Eigen::Index>(b);
    lap(ia, ia) += 1.0;
    lap(ib, ib) += 1.0;
    lap(ia, ib) -= 1.0;
    lap(ib, ia) -= 1.0;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(lap);
  const Eigen::VectorXd& values = eig.eigenvalues();
  const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
  const double fiedler = values(1);
  Eigen::Index last = 1;
  while (last + 1 < values.size() && std::abs(values(last + 1) - fiedler) <= 1e-9 * scale) ++last;

  Eigen::VectorXd v;
  if (last == 1) {
    v = eig.eigenvectors().col(1);
  } else {
    // Degenerate eigenspace: project a balanced split indicator (first half of
    // the id order against the second half). The projection does not depend
    // on which basis the eigensolver returned.
    const Eigen::MatrixXd basis = eig.eigenvectors().middleCols(1, last);
    Eigen::VectorXd indicator(static_cast<Eigen::Index>(n));
    for (size_t r = 0; r < n; ++r) indicator(static_cast<Eigen::Index>(r)) = r < n / 2 ? -1.0 : 1.0;
    v = basis * (basis.transpose() * indicator);
    for (size_t r = 0; r < n && v.norm() < 1e-12; ++r)
      v = basis * basis.row(static_cast<Eigen::Index>(r)).transpose();
  }

  const double zero = 1e-12 * v.cwiseAbs().maxCoeff();
  for (Eigen::Index r = 0; r < v.size(); ++r) {
    if (std::abs(v(r)) > zero) {
      if (v(r) > 0.0) v = -v;
      break;
    }
  }

  std::vector<size_t> negative;
  std::vector<size_t> nonnegative;
  for (size_t r = 0; r < n; ++r) {
    const double x = v(static_cast<Eigen::Index>(r));
    (x < -zero ? negative : nonnegative).push_back(order[r]);
  }
  return {induced_subgraph(g, negative), induced_subgraph(g, nonnegative)};
}

namespace {

// Splits a polyline at half its arc length.
std::pair<PlanarCurve, PlanarCurve> split_at_midpoint(const PlanarCurve& c) {
  const double half = 0.5 * arc_length(c);
  double run = 0.0;
  for (Eigen::Index s = 1; s < c.size(); ++s) {
    const double len = (c.points.col(s) - c.points.col(s - 1)).norm();
    if (run + len >= half && len > 0.0) {
      const double frac = (half - run) / len;
      const Point mid = (1.0 - frac) * c.points.col(s - 1) + frac * c.points.col(s);
      Eigen::Matrix2Xd first(2, s + 1);
      first.leftCols(s) = c.points.leftCols(s);
      first.col(s) = mid;
      Eigen::Matrix2Xd second(2, c.size() - s + 1);
      second.col(0) = mid;
      second.rightCols(c.size() - s) = c.points.rightCols(c.size() - s);
      return {PlanarCurve(std::move(first)), PlanarCurve(std::move(second))};
    }
    run += len;
  }
  throw DegenerateInputError("simplify_multiedges: cannot split a zero-length curve");
}

}  // namespace

ShapeGraph simplify_multiedges(const ShapeGraph& g) {
  ShapeGraph out;
  out.nodes = g.nodes;
  out.metadata = g.metadata;
  std::unordered_set<std::string> taken;
  for (const auto& n : g.nodes) taken.insert(n.id);
  std::map<std::pair<std::string, std::string>, int> count;
  for (const auto& e : g.edges) {
    const auto key = std::minmax(e.u, e.v);
    const int seen = count[{key.first, key.second}]++;
    if (seen == 0 || e.u == e.v) {
      out.edges.push_back(e);
      continue;
    }
    auto [first, second] = split_at_midpoint(e.curve);
    const std::string id = unique_id(e.u + "~" + e.v + "#" + std::to_string(seen), taken);
    taken.insert(id);
    out.nodes.push_back({id, second.front()});
    std::optional<double> half;
    if (e.weight) half = 0.5 * *e.weight;
    out.edges.push_back({e.u, id, std::move(first), half});
    out.edges.push_back({id, e.v, std::move(second), half});
  }
  return out;
}

const WeightedShape* AttributedGraph::find(size_t i, size_t j) const {
  const auto it = edges.find(std::minmax(i, j));
  return it == edges.end() ? nullptr : &it->second;
}

WeightedShape AttributedGraph::edge(size_t i, size_t j) const {
  const WeightedShape* ws = find(i, j);
  if (!ws) return WeightedShape::null(samples);
  if (i < j) return *ws;
  return {reversed(ws->shape), ws->weight};
}

void AttributedGraph::set_edge(size_t i, size_t j, WeightedShape shape) {
  if (i == j) throw ArgumentError("AttributedGraph: self-loops are not allowed");
  if (shape.weight <= 0.0) {
    edges.erase(std::minmax(i, j));
    return;
  }
  if (i > j) {
    shape.shape = reversed(shape.shape);
    std::swap(i, j);
  }
  edges[{i, j}] = std::move(shape);
}

std::vector<std::vector<size_t>> AttributedGraph::neighbours() const {
  std::vector<std::vector<size_t>> adj(size());
  for (const auto& [key, ws] : edges) {
    adj[key.first].push_back(key.second);
    adj[key.second].push_back(key.first);
  }
  return adj;
}

AttributedGraph to_attributed(const ShapeGraph& g, int samples, WeightPolicy fallback) {
  AttributedGraph out;
  out.samples = samples;
  std::unordered_map<std::string, size_t> index;
  for (size_t i = 0; i < g.nodes.size(); ++i) {
    if (!index.emplace(g.nodes[i].id, i).second) throw DataError("duplicate node id '" + g.nodes[i].id + "'");
    out.ids.push_back(g.nodes[i].id);
    out.positions.push_back(g.nodes[i].position);
  }
  for (const auto& e : g.edges) {
    const auto iu = index.find(e.u);
    const auto iv = index.find(e.v);
    if (iu == index.end()) throw DataError("edge references missing node id '" + e.u + "'");
    if (iv == index.end()) throw DataError("edge references missing node id '" + e.v + "'");
    if (iu->second == iv->second) throw PreconditionError("self-loop at node '" + e.u + "'");
    const double w = e.weight ? *e.weight : (fallback == WeightPolicy::kBinary ? 1.0 : arc_length(e.curve));
    if (w <= 0.0) continue;
    if (out.find(iu->second, iv->second))
      throw PreconditionError("multiple curves between '" + e.u + "' and '" + e.v + "'; run simplify_multiedges");
    out.set_edge(iu->second, iv->second, {to_srvf(resample(e.curve, samples)), w});
  }
  return out;
}

AttributedGraph pad(const AttributedGraph& g, size_t extra, const std::string& prefix) {
  AttributedGraph out = g;
  std::unordered_set<std::string> taken(g.ids.begin(), g.ids.end());
  for (size_t k = 0; k < extra; ++k) {
    const std::string id = unique_id(prefix + std::to_string(k), taken);
    taken.insert(id);
    out.ids.push_back(id);
    out.positions.emplace_back(std::nullopt);
  }
  return out;
}

PlanarCurve curve_between(const SrvCurve& q, const Point& p, const Point& q_end) {
  const Eigen::Index n = std::max<Eigen::Index>(q.size(), 2);
  const PlanarCurve raw = from_srvf(q.size() >= 2 ? q : SrvCurve::null(2), p);
  const double span = (raw.back() - raw.front()).norm();
  const double length = arc_length(raw);
  if (length > 0.0 && span > 1e-9 * length && (q_end - p).norm() > 0.0) return fit_to_endpoints(raw, p, q_end);
  Eigen::Matrix2Xd pts(2, n);
  for (Eigen::Index s = 0; s < n; ++s) {
    const double t = static_cast<double>(s) / static_cast<double>(n - 1);
    pts.col(s) = (1.0 - t) * p + t * q_end;
  }
  return PlanarCurve(std::move(pts));
}

ShapeGraph to_shape_graph(const AttributedGraph& g) {
  ShapeGraph out;
  for (size_t i = 0; i < g.size(); ++i) out.nodes.push_back({g.ids[i], g.positions[i]});
  for (const auto& [key, ws] : g.edges) {
    const auto& p = g.positions[key.first];
    const auto& q = g.positions[key.second];
    if (!p || !q) continue;
    out.edges.push_back({g.ids[key.first], g.ids[key.second], curve_between(ws.shape, *p, *q), ws.weight});
  }
  return out;
}

double estimate_mean_distance(std::span<const std::optional<Point>> a, std::span<const std::optional<Point>> b,
                              std::uint64_t seed) {
  std::vector<Point> pa;
  std::vector<Point> pb;
  for (const auto& p : a)
    if (p) pa.push_back(*p);
  for (const auto& p : b)
    if (p) pb.push_back(*p);
  if (pa.empty() || pb.empty()) return 0.0;

  constexpr size_t kBudget = 10000;
  double total = 0.0;
  if (pa.size() * pb.size() <= kBudget) {
    for (const auto& x : pa)
      for (const auto& y : pb) total += (x - y).norm();
    return total / static_cast<double>(pa.size() * pb.size());
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<size_t> pick_a(0, pa.size() - 1);
  std::uniform_int_distribution<size_t> pick_b(0, pb.size() - 1);
  for (size_t k = 0; k < kBudget; ++k) {
    const size_t i = pick_a(rng);
    const size_t j = pick_b(rng);
    total += (pa[i] - pb[j]).norm();
  }
  return total / static_cast<double>(kBudget);
}

}  // namespace shapegraph
