#pragma once

// Seeded random shape graphs for tests, benchmarks and demos.

#include "shapegraph/graph.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace shapegraph {

struct SyntheticOptions {
  double extent = 10.0;        ///< nodes fall in [0, extent]^2
  int curve_points = 20;       ///< samples per generated curve
  double bend = 0.25;          ///< max sideways bulge relative to chord length
  double extra_edges = 0.3;    ///< fraction of n extra non-tree edges
};

/// Bent curve from p to q: quadratic Bezier whose control point sits
/// `offset * |q - p|` to the left of the chord midpoint.
PlanarCurve bent_curve(const Point& p, const Point& q, double offset, int points);

/// Connected graph: each new node joins its nearest predecessor, then a few
/// extra short edges are added. Node ids are "n0", "n1", ...
ShapeGraph random_graph(size_t nodes, std::mt19937_64& rng, const SyntheticOptions& options = {});

struct PerturbOptions {
  double node_jitter = 0.05;   ///< absolute position noise
  double bend_jitter = 0.05;   ///< change in relative bulge per edge
  double stretch = 0.0;        ///< if > 0, one edge gets this much extra bulge
  bool delete_edge = false;
  bool delete_node = false;    ///< removes one degree-1 node if there is one
  bool reorder = false;        ///< shuffles node storage order
};

struct PerturbedGraph {
  ShapeGraph graph;
  /// base node index -> index in graph.nodes, nullopt for deleted nodes
  std::vector<std::optional<size_t>> correspondence;
};

/// Jitters node positions and edge bends of a graph produced by random_graph
/// (curves are regenerated as bent curves) and applies the requested edits.
PerturbedGraph perturb(const ShapeGraph& base, std::mt19937_64& rng, const PerturbOptions& options = {});

}  // namespace shapegraph
