#pragma once

#include "shapegraph/graph.hpp"
#include "shapegraph/registration.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace shapegraph {

enum class MetricKind { kEuclidean, kGeodesic, kResistance };

std::string to_string(MetricKind kind);
MetricKind metric_kind_from_string(const std::string& name);

/// Pairwise node distances. Geodesic and resistance entries between different
/// connected components are set to 10x the largest finite entry (1.0 if there
/// is none), so components separate early in the dendrogram.
struct InternalMetric {
  MetricKind kind = MetricKind::kResistance;
  Eigen::MatrixXd matrix;
};

/// Node order follows g.nodes. Edge lengths are curve arc lengths; the
/// resistance kind uses conductance 1/length and the Laplacian pseudoinverse.
/// Throws PreconditionError for null nodes or zero-length edges.
InternalMetric internal_metric(const ShapeGraph& g, MetricKind kind);

/// Complete-linkage merge tree. Leaves are 0..n-1; merge t creates cluster n+t.
struct Dendrogram {
  struct Merge {
    size_t left;
    size_t right;
    double height;
  };
  size_t leaves = 0;
  std::vector<Merge> merges;

  /// Cluster label per leaf after applying the first n - k merges. Labels are
  /// 0..k-1, numbered by smallest member.
  std::vector<size_t> cut(size_t k) const;
};

/// Ties between equal linkage distances go to the smallest (i, j) cluster pair.
Dendrogram build_dendrogram(const Eigen::MatrixXd& distances);

struct CoarseGraph {
  double h = 1.0;
  std::vector<size_t> assignment;  ///< g.nodes index -> cluster (node index in graph)
  ShapeGraph graph;
};

/// Cluster count for level h on n nodes: max(1, round(h n)).
size_t cluster_count(double h, size_t n);

/// G^h: cluster-mean node positions and, per cluster pair joined in g, the
/// Karcher mean of the joining curves (oriented from the lower to the higher
/// cluster id) fitted to the two representatives. Weight = fitted arc length.
CoarseGraph coarsen(const ShapeGraph& g, const Dendrogram& dendrogram, double h, int samples = 30);

/// k / count for k = 1..count.
std::vector<double> default_levels(int count = 8);

struct ResolutionSelection {
  double h = 1.0;
  CoarseGraph coarse;
  std::vector<double> levels;
  std::vector<double> distances;
};

/// Registers g1 against coarsen(g2, h) for every level; returns the level with
/// the smallest d_graph, preferring the larger h on exact ties.
ResolutionSelection select_resolution(const ShapeGraph& g1, const ShapeGraph& g2, const std::vector<double>& levels,
                                      const RegistrationParams& params = {},
                                      MetricKind kind = MetricKind::kResistance);

}  // namespace shapegraph
