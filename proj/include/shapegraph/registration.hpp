#pragma once

#include "shapegraph/graph.hpp"
#include "shapegraph/qap.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace shapegraph {

struct RegistrationParams {
  double lambda = 0.5;  ///< balance between edge (lambda) and node (1 - lambda) terms
  double eta = 1.0;
  double e = 0.7;       ///< real-to-null node cost as a multiple of the mean node distance
  int samples = 30;     ///< curve samples per edge
  std::uint64_t seed = 0;
  WeightPolicy weights = WeightPolicy::kLength;  ///< fills in edges without a stored weight
  SolverOptions solver;  ///< solver.seed is replaced by seed
  bool polish = true;    ///< finish with pairwise exchanges that lower d_graph directly
};

/// Throws ArgumentError for lambda outside [0,1], eta <= 0, e <= 0 or samples < 2.
void check_params(const RegistrationParams& p);

/// Distances between the nodes and edges of two equally sized padded graphs,
/// computed once and shared by the affinity matrix and d_graph.
class PairContext {
 public:
  PairContext(AttributedGraph first, AttributedGraph second, const RegistrationParams& params);

  const AttributedGraph& first() const { return g0_; }
  const AttributedGraph& second() const { return g1_; }
  size_t size() const { return g0_.size(); }
  const RegistrationParams& params() const { return params_; }

  /// Estimated mean distance M between real nodes.
  double mean_distance() const { return mean_distance_; }
  /// Node divergence: Euclidean between real nodes, e*M between real and null, 0 between nulls.
  double node_distance(size_t a, size_t j) const;
  /// d_eta between the first graph's edge i -> j and the second graph's edge k -> l.
  double edge_distance(size_t i, size_t j, size_t k, size_t l) const;

  /// Diagonal node affinities and real-edge pair affinities.
  AffinityMatrix affinity() const;

  double d_graph(std::span<const size_t> perm) const;
  double d_graph_squared(std::span<const size_t> perm) const;
  /// Change of d_graph^2 when perm[a] and perm[b] are exchanged.
  double swap_delta(std::span<const size_t> perm, size_t a, size_t b) const;

 private:
  AttributedGraph g0_;
  AttributedGraph g1_;
  RegistrationParams params_;
  double mean_distance_ = 0.0;
  Eigen::MatrixXd node_dist_;
  std::vector<std::pair<size_t, size_t>> edges0_;
  std::vector<std::pair<size_t, size_t>> edges1_;
  std::vector<double> weights0_;
  std::vector<double> weights1_;
  Eigen::MatrixXi index0_;
  Eigen::MatrixXi index1_;
  Eigen::MatrixXd same_;     ///< d_eta with both edges in stored (low -> high) orientation
  Eigen::MatrixXd flipped_;  ///< d_eta with the second edge reversed
};

struct Registration {
  std::vector<size_t> permutation;  ///< padded first-graph index -> padded second-graph index
  double objective = 0.0;           ///< affinity score of the permutation
  double distance = 0.0;            ///< d_graph at the permutation
  double mean_distance = 0.0;       ///< M used for the null cost
  AttributedGraph first;            ///< padded first graph
  AttributedGraph second;           ///< padded second graph
  RegistrationParams params;
};

/// Pads both graphs to |V0| + |V1| nodes and builds their PairContext.
PairContext make_context(const AttributedGraph& g0, const AttributedGraph& g1, const RegistrationParams& params);

AffinityMatrix build_affinity(const ShapeGraph& g0, const ShapeGraph& g1, const RegistrationParams& params);

/// d_graph at a permutation of the padded node sets (first graph nodes then
/// nulls, on both sides).
double d_graph(const ShapeGraph& g0, const ShapeGraph& g1, std::span<const size_t> perm,
               const RegistrationParams& params);

/// d_graph of two equally sized padded graphs at perm. Agrees with
/// PairContext::d_graph but evaluates only the matched edge pairs.
double d_graph_padded(const AttributedGraph& g0, const AttributedGraph& g1, std::span<const size_t> perm,
                      const RegistrationParams& params);

Registration register_attributed(const AttributedGraph& g0, const AttributedGraph& g1, const RegistrationParams& params,
                                 std::span<const std::vector<size_t>> warm_starts = {});

Registration register_pair(const ShapeGraph& g0, const ShapeGraph& g1, const RegistrationParams& params = {});

struct GeodesicFrame {
  double u = 0.0;
  ShapeGraph graph;
  std::vector<double> opacity;  ///< per graph.edges entry, weight relative to the pair's largest weight
};

struct GraphGeodesic {
  std::vector<GeodesicFrame> frames;
};

/// Frames at u = k / (n_frames - 1) along the weighted-shape geodesics of all
/// matched edge pairs. Real-real node matches move linearly; nodes matched to
/// null stay put. A vanishing or appearing edge at a leaf shrinks toward, or
/// grows from, its surviving endpoint.
GraphGeodesic graph_geodesic(const Registration& reg, int n_frames);

/// JSON record: permutation as an id -> id map, d_graph, objective and parameters.
std::string format_registration(const Registration& reg);

}  // namespace shapegraph
