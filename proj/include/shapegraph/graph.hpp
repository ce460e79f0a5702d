#pragma once

#include "shapegraph/curves.hpp"
#include "shapegraph/weighted_shape.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace shapegraph {

/// A node label with its planar position; nullopt marks an abstract null node.
struct Node {
  std::string id;
  std::optional<Point> position;

  bool is_null() const { return !position.has_value(); }
};

/// A curve between two nodes, oriented from u to v. A missing weight is
/// filled in by a WeightPolicy when the graph is analysed.
struct Edge {
  std::string u;
  std::string v;
  PlanarCurve curve;
  std::optional<double> weight;
};

/// Nodes joined by planar curves. This is the file-level representation; the
/// analysis works on AttributedGraph (adjacency of weighted SRV shapes).
struct ShapeGraph {
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  std::map<std::string, std::string> metadata;

  std::optional<size_t> index_of(const std::string& id) const;
  size_t real_node_count() const;
  double total_edge_length() const;
};

enum class WeightPolicy { kBinary, kLength };

std::string to_string(WeightPolicy policy);
WeightPolicy weight_policy_from_string(const std::string& name);

/// Endpoint tolerance for stored graphs.
inline constexpr double kEndpointTolerance = 1e-6;

struct Violation {
  std::string code;
  std::string message;
};

/// Every invariant violation found; an empty list means the graph is valid.
std::vector<Violation> validate(const ShapeGraph& g);

ShapeGraph assign_weights(ShapeGraph g, WeightPolicy policy);

/// Pads both graphs to |V0| + |V1| nodes by appending null nodes. Each graph
/// keeps its own nodes first.
std::pair<ShapeGraph, ShapeGraph> pad_nulls(const ShapeGraph& g0, const ShapeGraph& g1);

/// Node index lists of connected components, ordered by smallest member index.
std::vector<std::vector<size_t>> connected_components(const ShapeGraph& g);

ShapeGraph induced_subgraph(const ShapeGraph& g, std::span<const size_t> node_indices);

ShapeGraph remove_small_components(const ShapeGraph& g, size_t min_nodes);

/// Spectral bipartition by the sign of the Fiedler vector of the binary
/// Laplacian. Returns (negative side, nonnegative side). Throws
/// PreconditionError for disconnected input or fewer than 2 nodes.
std::pair<ShapeGraph, ShapeGraph> fiedler_bipartition(const ShapeGraph& g);

/// Splits all but one curve of every repeated node pair at its arc-length
/// midpoint, inserting a degree-2 node there.
ShapeGraph simplify_multiedges(const ShapeGraph& g);

/// Weighted SRV adjacency over an indexed node set. Edge keys satisfy i < j and
/// the stored shape is oriented i -> j. Only positive-weight edges are stored.
struct AttributedGraph {
  std::vector<std::string> ids;
  std::vector<std::optional<Point>> positions;
  std::map<std::pair<size_t, size_t>, WeightedShape> edges;
  int samples = 30;

  size_t size() const { return ids.size(); }
  bool is_null_node(size_t i) const { return !positions[i].has_value(); }
  const WeightedShape* find(size_t i, size_t j) const;
  /// Edge oriented i -> j, or the null weighted shape.
  WeightedShape edge(size_t i, size_t j) const;
  void set_edge(size_t i, size_t j, WeightedShape shape);
  std::vector<std::vector<size_t>> neighbours() const;
};

AttributedGraph to_attributed(const ShapeGraph& g, int samples, WeightPolicy fallback = WeightPolicy::kLength);

/// Appends `extra` null nodes.
AttributedGraph pad(const AttributedGraph& g, size_t extra, const std::string& prefix = "null:");

/// Rebuilds planar curves from SRV shapes: integrate from node i, then apply
/// the similarity that pins the endpoints to the node positions.
ShapeGraph to_shape_graph(const AttributedGraph& g);

/// Curve with SRV `q` whose endpoints are p and q_end. Falls back to a straight
/// segment when the integrated curve is closed or null.
PlanarCurve curve_between(const SrvCurve& q, const Point& p, const Point& q_end);

/// Mean Euclidean distance between real nodes of the two position sets: exact
/// when n0*n1 <= 10^4, otherwise an average over 10^4 seeded random pairs.
double estimate_mean_distance(std::span<const std::optional<Point>> a,
                              std::span<const std::optional<Point>> b, std::uint64_t seed);

}  // namespace shapegraph
