#pragma once

#include "shapegraph/graph.hpp"
#include "shapegraph/registration.hpp"

#include <Eigen/Core>

#include <optional>
#include <span>
#include <vector>

namespace shapegraph {

/// Symmetric matrix of d_graph values; each entry averages both registration
/// directions. Zero diagonal.
Eigen::MatrixXd pairwise_distances(std::span<const ShapeGraph> graphs, const RegistrationParams& params = {});

enum class MeanInit { kLargest, kIndex };

struct MeanOptions {
  double tol = 1e-6;  ///< stop when the objective changes by less than tol (relative)
  int max_iter = 10;
  MeanInit init = MeanInit::kLargest;
  size_t init_index = 0;
};

struct MeanResult {
  /// Mean over the fixed template node set (the initial graph's nodes).
  AttributedGraph mean;
  /// Registration of the mean (first) to each input (second).
  std::vector<Registration> registrations;
  /// Each input expressed on the template nodes under its registration; these
  /// are the graphs whose average is `mean`.
  std::vector<AttributedGraph> matched;
  /// Sum of squared d_graph per accepted iterate, starting at the initial template.
  std::vector<double> objective_trace;
  int iterations = 0;
  RegistrationParams params;
  /// The template input, kept when the mean never moved away from it.
  std::optional<ShapeGraph> source;

  /// Curves are rebuilt from the mean SRVs unless `source` is set.
  ShapeGraph mean_graph() const { return source ? *source : to_shape_graph(mean); }
};

/// Index of the initial template: most nodes, then most edges, then input order.
size_t largest_graph(std::span<const ShapeGraph> graphs);

/// Input `reg.second` on the node set of `reg.first` (template nodes only).
/// Edges matched to real template edges are reparameterized onto them.
AttributedGraph matched_graph(const Registration& reg, const AttributedGraph& templ);

/// Karcher mean under d_graph with a fixed template. An update that raises
/// the objective by more than 1e-6 (relative) is discarded and ends the loop.
MeanResult karcher_mean_graphs(std::span<const ShapeGraph> graphs, const RegistrationParams& params = {},
                               const MeanOptions& options = {});

/// Flattened shooting-vector layout: for each template node pair in `pairs`, the
/// SRV samples (x, y interleaved) scaled by sqrt(lambda); then the pair weights
/// scaled by sqrt(lambda); then node positions scaled by sqrt(1 - lambda).
struct TangentModel {
  AttributedGraph mean;
  double lambda = 0.5;
  std::vector<std::pair<size_t, size_t>> pairs;
  Eigen::MatrixXd vectors;          ///< one shooting vector per row
  Eigen::VectorXd center;           ///< average shooting vector
  Eigen::VectorXd singular_values;  ///< nonincreasing, sigma / sqrt(m)
  Eigen::MatrixXd directions;       ///< orthonormal columns, one per nonzero singular value
  Eigen::MatrixXd scores;           ///< (vectors - center) projected on directions

  size_t components() const { return static_cast<size_t>(directions.cols()); }
};

/// Singular values below this are treated as zero.
inline constexpr double kSingularTolerance = 1e-9;

/// Flattened coordinates of a graph on the template nodes (not centered at the
/// mean). Node positions missing in `g` fall back to the mean's.
Eigen::VectorXd flatten(const TangentModel& model, const AttributedGraph& g);
/// Inverse of flatten; weights are clamped at zero and zero-weight edges dropped.
AttributedGraph unflatten(const TangentModel& model, const Eigen::VectorXd& x);

TangentModel tangent_pca(const MeanResult& mean);

/// mean + t * s_d * direction_d on the template nodes.
AttributedGraph pc_deformation_attributed(const TangentModel& model, size_t direction, double t);
ShapeGraph pc_deformation(const TangentModel& model, size_t direction, double t);

struct ClusterReport {
  std::vector<int> labels;     ///< cluster per item, -1 for outliers
  std::vector<size_t> modes;   ///< medoid index per cluster
  size_t k = 0;
  double silhouette = 0.0;     ///< mean silhouette of the chosen k
  std::vector<std::pair<size_t, double>> silhouette_by_k;
};

/// k-medoids (greedy build + swap) for k = 2..min(8, m-1), choosing k by mean
/// silhouette (ties to the smaller k). With outlier_fraction > 0, items farther
/// from their medoid than the (1 - fraction) quantile of those distances are
/// labelled -1. Throws ArgumentError for m < 3 or an invalid matrix.
ClusterReport cluster_distances(const Eigen::MatrixXd& distances, double outlier_fraction = 0.0);

}  // namespace shapegraph
