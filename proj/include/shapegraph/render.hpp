#pragma once

#include "shapegraph/graph.hpp"

#include <Eigen/Core>

#include <span>
#include <string>
#include <vector>

namespace shapegraph {

struct Bounds {
  Point lo{0.0, 0.0};
  Point hi{0.0, 0.0};
  bool empty = true;

  void include(const Point& p);
  void include(const Bounds& other);
};

Bounds bounds_of(const ShapeGraph& g);

/// SVG drawing: y axis flipped, 10% padding around `view`, nodes as filled
/// circles of radius 1% of the box diagonal, edges as polylines. Stroke
/// opacity comes from `opacity` (one per edge) when given, otherwise from
/// weight relative to the largest weight in g.
std::string render_svg(const ShapeGraph& g, const Bounds& view, std::span<const double> opacity = {});
std::string render_svg(const ShapeGraph& g);

/// Graphs side by side in one drawing, sharing a view box, each captioned.
std::string render_panels_svg(const std::vector<ShapeGraph>& graphs, const std::vector<std::string>& captions);

/// Gray-scale matrix image with rows and columns permuted by `order`.
std::string render_heatmap_svg(const Eigen::MatrixXd& m, const std::vector<size_t>& order,
                               const std::vector<std::string>& labels);

}  // namespace shapegraph
