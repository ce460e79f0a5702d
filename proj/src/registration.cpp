#include "shapegraph/registration.hpp"

#include "parallel.hpp"
#include "shapegraph/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace shapegraph {

void check_params(const RegistrationParams& p) {
  if (!(p.lambda >= 0.0 && p.lambda <= 1.0)) throw ArgumentError("lambda must lie in [0, 1]");
  if (!(p.eta > 0.0)) throw ArgumentError("eta must be positive");
  if (!(p.e > 0.0)) throw ArgumentError("e must be positive");
  if (p.samples < 2) throw ArgumentError("samples must be at least 2");
}

namespace {

void index_edges(const AttributedGraph& g, std::vector<std::pair<size_t, size_t>>& edges, std::vector<double>& weights,
                 Eigen::MatrixXi& index) {
  const auto n = static_cast<Eigen::Index>(g.size());
  index = Eigen::MatrixXi::Constant(n, n, -1);
  for (const auto& [key, ws] : g.edges) {
    const int p = static_cast<int>(edges.size());
    index(static_cast<Eigen::Index>(key.first), static_cast<Eigen::Index>(key.second)) = p;
    index(static_cast<Eigen::Index>(key.second), static_cast<Eigen::Index>(key.first)) = p;
    edges.push_back(key);
    weights.push_back(ws.weight);
  }
}

}  // namespace

PairContext::PairContext(AttributedGraph first, AttributedGraph second, const RegistrationParams& params)
    : g0_(std::move(first)), g1_(std::move(second)), params_(params) {
  check_params(params_);
  if (g0_.size() != g1_.size()) throw ArgumentError("PairContext: padded graphs must have equal node counts");
  if (g0_.samples != g1_.samples) throw ArgumentError("PairContext: graphs use different curve sample counts");
  const size_t n = g0_.size();

  mean_distance_ = estimate_mean_distance(g0_.positions, g1_.positions, params_.seed);
  const double null_cost = params_.e * mean_distance_;
  node_dist_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (size_t a = 0; a < n; ++a)
    for (size_t j = 0; j < n; ++j) {
      const auto& p = g0_.positions[a];
      const auto& q = g1_.positions[j];
      double d = 0.0;
      if (p && q)
        d = (*p - *q).norm();
      else if (p || q)
        d = null_cost;
      node_dist_(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(j)) = d;
    }

  index_edges(g0_, edges0_, weights0_, index0_);
  index_edges(g1_, edges1_, weights1_, index1_);
  const auto rows = static_cast<Eigen::Index>(edges0_.size());
  const auto cols = static_cast<Eigen::Index>(edges1_.size());
  same_.resize(rows, cols);
  flipped_.resize(rows, cols);
  std::vector<WeightedShape> shapes0;
  std::vector<WeightedShape> shapes1;
  std::vector<WeightedShape> shapes1_rev;
  for (const auto& [key, ws] : g0_.edges) shapes0.push_back(ws);
  for (const auto& [key, ws] : g1_.edges) {
    shapes1.push_back(ws);
    shapes1_rev.push_back({reversed(ws.shape), ws.weight});
  }
  detail::parallel_for(static_cast<size_t>(rows * cols), [&](size_t idx) {
    const auto p = static_cast<Eigen::Index>(idx) / std::max<Eigen::Index>(cols, 1);
    const auto r = static_cast<Eigen::Index>(idx) % std::max<Eigen::Index>(cols, 1);
    same_(p, r) = d_eta(shapes0[p], shapes1[r], params_.eta);
    flipped_(p, r) = d_eta(shapes0[p], shapes1_rev[r], params_.eta);
  });
}

double PairContext::node_distance(size_t a, size_t j) const {
  return node_dist_(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(j));
}

double PairContext::edge_distance(size_t i, size_t j, size_t k, size_t l) const {
  const int p = i == j ? -1 : index0_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  const int r = k == l ? -1 : index1_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l));
  if (p < 0 && r < 0) return 0.0;
  if (p < 0) return params_.eta * weights1_[static_cast<size_t>(r)];
  if (r < 0) return params_.eta * weights0_[static_cast<size_t>(p)];
  return ((i < j) == (k < l)) ? same_(p, r) : flipped_(p, r);
}

AffinityMatrix PairContext::affinity() const {
  const double lambda = params_.lambda;
  const double max_node = node_dist_.size() ? node_dist_.maxCoeff() : 0.0;
  Eigen::MatrixXd node = Eigen::MatrixXd::Constant(node_dist_.rows(), node_dist_.cols(), 1.0 - lambda);
  if (max_node > 0.0) node = (1.0 - lambda) * (1.0 - node_dist_.array() / max_node).matrix();

  std::vector<std::pair<size_t, size_t>> oriented;
  for (const auto& [j, k] : edges1_) {
    oriented.emplace_back(j, k);
    oriented.emplace_back(k, j);
  }
  const auto rows = static_cast<Eigen::Index>(edges0_.size());
  Eigen::MatrixXd dist(rows, static_cast<Eigen::Index>(oriented.size()));
  for (Eigen::Index r = 0; r < same_.cols(); ++r) {
    dist.col(2 * r) = same_.col(r);
    dist.col(2 * r + 1) = flipped_.col(r);
  }
  const double max_edge = dist.size() ? dist.maxCoeff() : 0.0;
  Eigen::MatrixXd value = Eigen::MatrixXd::Constant(dist.rows(), dist.cols(), lambda);
  if (max_edge > 0.0) value = lambda * (1.0 - dist.array() / max_edge).matrix();
  return AffinityMatrix(std::move(node), edges0_, std::move(oriented), std::move(value));
}

double PairContext::d_graph_squared(std::span<const size_t> perm) const {
  const size_t n = size();
  require_permutation(perm, n);
  std::vector<size_t> inverse(n);
  for (size_t a = 0; a < n; ++a) inverse[perm[a]] = a;

  // Ordered pairs: every unordered pair counts twice.
  double edges = 0.0;
  for (const auto& [i, j] : edges0_) {
    const double d = edge_distance(i, j, perm[i], perm[j]);
    edges += d * d;
  }
  for (size_t r = 0; r < edges1_.size(); ++r) {
    const auto [k, l] = edges1_[r];
    const size_t i = inverse[k];
    const size_t j = inverse[l];
    if (index0_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) >= 0) continue;
    const double d = params_.eta * weights1_[r];
    edges += d * d;
  }
  double nodes = 0.0;
  for (size_t a = 0; a < n; ++a) {
    const double d = node_distance(a, perm[a]);
    nodes += d * d;
  }
  return params_.lambda * 2.0 * edges + (1.0 - params_.lambda) * nodes;
}

double PairContext::d_graph(std::span<const size_t> perm) const { return std::sqrt(d_graph_squared(perm)); }

double PairContext::swap_delta(std::span<const size_t> perm, size_t a, size_t b) const {
  if (a == b) return 0.0;
  const size_t n = size();
  const size_t ja = perm[a];
  const size_t jb = perm[b];
  auto sq = [](double x) { return x * x; };
  double edges = 0.0;
  for (size_t x = 0; x < n; ++x) {
    if (x == a || x == b) continue;
    const size_t jx = perm[x];
    edges += sq(edge_distance(a, x, jb, jx)) - sq(edge_distance(a, x, ja, jx));
    edges += sq(edge_distance(b, x, ja, jx)) - sq(edge_distance(b, x, jb, jx));
  }
  edges += sq(edge_distance(a, b, jb, ja)) - sq(edge_distance(a, b, ja, jb));
  const double nodes = sq(node_distance(a, jb)) + sq(node_distance(b, ja)) - sq(node_distance(a, ja)) -
                       sq(node_distance(b, jb));
  return params_.lambda * 2.0 * edges + (1.0 - params_.lambda) * nodes;
}

PairContext make_context(const AttributedGraph& g0, const AttributedGraph& g1, const RegistrationParams& params) {
  return PairContext(pad(g0, g1.size()), pad(g1, g0.size()), params);
}

AffinityMatrix build_affinity(const ShapeGraph& g0, const ShapeGraph& g1, const RegistrationParams& params) {
  check_params(params);
  return make_context(to_attributed(g0, params.samples, params.weights), to_attributed(g1, params.samples, params.weights),
                      params)
      .affinity();
}

double d_graph(const ShapeGraph& g0, const ShapeGraph& g1, std::span<const size_t> perm,
               const RegistrationParams& params) {
  check_params(params);
  return make_context(to_attributed(g0, params.samples, params.weights), to_attributed(g1, params.samples, params.weights),
                      params)
      .d_graph(perm);
}

double d_graph_padded(const AttributedGraph& g0, const AttributedGraph& g1, std::span<const size_t> perm,
                      const RegistrationParams& params) {
  check_params(params);
  if (g0.size() != g1.size()) throw ArgumentError("d_graph: padded graphs must have equal node counts");
  const size_t n = g0.size();
  require_permutation(perm, n);
  const double null_cost = params.e * estimate_mean_distance(g0.positions, g1.positions, params.seed);

  double edges = 0.0;
  for (const auto& [key, ws] : g0.edges) {
    const auto [i, j] = key;
    const WeightedShape* other = g1.find(perm[i], perm[j]);
    double d;
    if (!other)
      d = params.eta * ws.weight;
    else if (perm[i] < perm[j])
      d = d_eta(ws, *other, params.eta);
    else
      d = d_eta(ws, {reversed(other->shape), other->weight}, params.eta);
    edges += d * d;
  }
  std::vector<size_t> inverse(n);
  for (size_t a = 0; a < n; ++a) inverse[perm[a]] = a;
  for (const auto& [key, ws] : g1.edges) {
    if (g0.find(inverse[key.first], inverse[key.second])) continue;
    const double d = params.eta * ws.weight;
    edges += d * d;
  }
  double nodes = 0.0;
  for (size_t a = 0; a < n; ++a) {
    const auto& p = g0.positions[a];
    const auto& q = g1.positions[perm[a]];
    const double d = p && q ? (*p - *q).norm() : (p || q ? null_cost : 0.0);
    nodes += d * d;
  }
  return std::sqrt(params.lambda * 2.0 * edges + (1.0 - params.lambda) * nodes);
}

namespace {

// Pairwise exchanges accepted while they lower d_graph^2.
std::vector<size_t> polish(const PairContext& ctx, std::vector<size_t> perm) {
  const size_t n = ctx.size();
  const double scale = std::max(1.0, ctx.d_graph_squared(perm));
  bool improved = true;
  while (improved) {
    improved = false;
    for (size_t a = 0; a < n; ++a)
      for (size_t b = a + 1; b < n; ++b) {
        // Exchanging two nodes that both map to nulls changes nothing.
        if (ctx.first().is_null_node(a) && ctx.first().is_null_node(b)) continue;
        if (ctx.swap_delta(perm, a, b) < -1e-12 * scale) {
          std::swap(perm[a], perm[b]);
          improved = true;
        }
      }
  }
  return perm;
}

}  // namespace

Registration register_attributed(const AttributedGraph& g0, const AttributedGraph& g1, const RegistrationParams& params,
                                 std::span<const std::vector<size_t>> warm_starts) {
  check_params(params);
  const PairContext ctx = make_context(g0, g1, params);
  const AffinityMatrix k = ctx.affinity();
  SolverOptions options = params.solver;
  options.seed = params.seed;
  std::vector<size_t> perm = qap_solve(k, options, warm_starts).permutation;

  if (params.polish) {
    perm = polish(ctx, std::move(perm));
    double best = ctx.d_graph_squared(perm);
    for (const auto& w : warm_starts) {
      std::vector<size_t> cand = polish(ctx, w);
      const double d = ctx.d_graph_squared(cand);
      if (d < best) {
        best = d;
        perm = std::move(cand);
      }
    }
  }

  Registration reg;
  reg.objective = k.score(perm);
  reg.distance = ctx.d_graph(perm);
  reg.permutation = std::move(perm);
  reg.mean_distance = ctx.mean_distance();
  reg.first = ctx.first();
  reg.second = ctx.second();
  reg.params = params;
  return reg;
}

Registration register_pair(const ShapeGraph& g0, const ShapeGraph& g1, const RegistrationParams& params) {
  check_params(params);
  return register_attributed(to_attributed(g0, params.samples, params.weights),
                             to_attributed(g1, params.samples, params.weights), params);
}

namespace {

std::vector<int> degrees(const AttributedGraph& g) {
  std::vector<int> deg(g.size(), 0);
  for (const auto& [key, ws] : g.edges) {
    ++deg[key.first];
    ++deg[key.second];
  }
  return deg;
}

PlanarCurve scale_toward(const PlanarCurve& c, const Point& anchor, double factor) {
  Eigen::Matrix2Xd pts = c.points;
  pts.colwise() -= anchor;
  pts *= factor;
  pts.colwise() += anchor;
  return PlanarCurve(std::move(pts));
}

}  // namespace

GraphGeodesic graph_geodesic(const Registration& reg, int n_frames) {
  if (n_frames < 2) throw ArgumentError("graph_geodesic: need at least 2 frames");
  const AttributedGraph& g0 = reg.first;
  const AttributedGraph& g1 = reg.second;
  const size_t n = g0.size();
  require_permutation(reg.permutation, n);
  const auto& perm = reg.permutation;
  const double eta = reg.params.eta;

  double max_weight = 0.0;
  for (const auto& [key, ws] : g0.edges) max_weight = std::max(max_weight, ws.weight);
  for (const auto& [key, ws] : g1.edges) max_weight = std::max(max_weight, ws.weight);

  const std::vector<int> deg0 = degrees(g0);
  const std::vector<int> deg1 = degrees(g1);

  struct Track {
    size_t i, j;
    WeightedShape a, b;  // b registered to a when both are real
    int leaf = -1;       // 0: node i shrinks away, 1: node j
  };
  std::vector<Track> tracks;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j) {
      WeightedShape a = g0.edge(i, j);
      WeightedShape b = g1.edge(perm[i], perm[j]);
      if (a.is_null() && b.is_null()) continue;
      Track t{i, j, std::move(a), std::move(b)};
      if (!t.a.is_null() && !t.b.is_null()) {
        t.b.shape = register_curve(t.a.shape, t.b.shape).registered;
      } else if (t.b.is_null()) {
        if (deg0[i] == 1 && g1.is_null_node(perm[i])) t.leaf = 0;
        else if (deg0[j] == 1 && g1.is_null_node(perm[j])) t.leaf = 1;
      } else {
        if (deg1[perm[i]] == 1 && g0.is_null_node(i)) t.leaf = 0;
        else if (deg1[perm[j]] == 1 && g0.is_null_node(j)) t.leaf = 1;
      }
      tracks.push_back(std::move(t));
    }

  GraphGeodesic out;
  for (int f = 0; f < n_frames; ++f) {
    const double u = static_cast<double>(f) / static_cast<double>(n_frames - 1);
    GeodesicFrame frame;
    frame.u = u;
    std::vector<std::optional<Point>> pos(n);
    std::vector<std::string> ids(n);
    for (size_t i = 0; i < n; ++i) {
      const auto& p = g0.positions[i];
      const auto& q = g1.positions[perm[i]];
      if (p && q)
        pos[i] = ((1.0 - u) * *p + u * *q).eval();
      else
        pos[i] = p ? p : q;
      ids[i] = p ? g0.ids[i] : g1.ids[perm[i]];
    }

    std::vector<std::optional<Point>> shown = pos;
    for (const auto& t : tracks) {
      const WeightedShape w = weighted_geodesic(t.a, t.b, eta, u);
      if (!pos[t.i] || !pos[t.j]) continue;
      const double full = t.a.is_null() ? t.b.weight : t.a.weight;
      PlanarCurve curve;
      if (t.leaf >= 0) {
        // Draw the full-size edge, then contract it onto the surviving endpoint.
        const WeightedShape& real = t.a.is_null() ? t.b : t.a;
        curve = curve_between(real.shape, *pos[t.i], *pos[t.j]);
        const Point anchor = t.leaf == 0 ? *pos[t.j] : *pos[t.i];
        curve = scale_toward(curve, anchor, full > 0.0 ? w.weight / full : 0.0);
        shown[t.leaf == 0 ? t.i : t.j] = t.leaf == 0 ? curve.front() : curve.back();
      } else {
        curve = curve_between(w.shape, *pos[t.i], *pos[t.j]);
      }
      frame.graph.edges.push_back({ids[t.i], ids[t.j], std::move(curve), w.weight});
      frame.opacity.push_back(max_weight > 0.0 ? w.weight / max_weight : 0.0);
    }
    for (size_t i = 0; i < n; ++i)
      if (shown[i]) frame.graph.nodes.push_back({ids[i], shown[i]});
    out.frames.push_back(std::move(frame));
  }
  return out;
}

std::string format_registration(const Registration& reg) {
  nlohmann::ordered_json doc;
  nlohmann::ordered_json perm = nlohmann::ordered_json::object();
  for (size_t a = 0; a < reg.permutation.size(); ++a) perm[reg.first.ids[a]] = reg.second.ids[reg.permutation[a]];
  doc["permutation"] = std::move(perm);
  doc["d_graph"] = reg.distance;
  doc["objective"] = reg.objective;
  doc["mean_distance"] = reg.mean_distance;
  doc["params"] = {{"lambda", reg.params.lambda},
                   {"eta", reg.params.eta},
                   {"e", reg.params.e},
                   {"samples", reg.params.samples},
                   {"weights", to_string(reg.params.weights)}};
  doc["seed"] = reg.params.seed;
  return doc.dump(1) + "\n";
}

}  // namespace shapegraph
