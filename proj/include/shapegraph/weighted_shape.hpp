#pragma once

// Weighted shapes ([q], w) in the quotient space where every zero-weight shape
// is identified with the null class, and the metric family d_eta on it.

#include "shapegraph/curves.hpp"

namespace shapegraph {

struct WeightedShape {
  SrvCurve shape;
  double weight = 0.0;

  static WeightedShape null(Eigen::Index samples) { return {SrvCurve::null(samples), 0.0}; }
  bool is_null() const { return weight == 0.0; }
};

/// Equality of quotient classes: shapes are ignored when both weights are 0.
bool same_class(const WeightedShape& a, const WeightedShape& b);

/// min{ d_srv + eta |w0 - w1|, eta (w0 + w1) }. Throws ArgumentError for eta <= 0.
double d_eta(const WeightedShape& a, const WeightedShape& b, double eta);

/// Same formula with a precomputed shape distance. Skips the elastic
/// registration when the shortcut through the null class is already cheaper.
double d_eta_from_srv(double srv_distance, double w0, double w1, double eta);

enum class GeodesicCase { kShapeAndWeight, kThroughNull, kOneNull, kBothNull };

GeodesicCase geodesic_case(const WeightedShape& a, const WeightedShape& b, double eta);

/// Point at parameter u on the d_eta geodesic from a to b. When both weights
/// are positive, b.shape must already be registered to a.shape.
WeightedShape weighted_geodesic(const WeightedShape& a, const WeightedShape& b, double eta, double u);

}  // namespace shapegraph
