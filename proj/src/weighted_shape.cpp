#include "shapegraph/weighted_shape.hpp"

#include "shapegraph/errors.hpp"

#include <cmath>

namespace shapegraph {

namespace {

void check_eta(double eta) {
  if (!(eta > 0.0)) throw ArgumentError("eta must be positive");
}

void check_weight(const WeightedShape& s) {
  if (!(s.weight >= 0.0)) throw ArgumentError("weights must be nonnegative");
}

}  // namespace

bool same_class(const WeightedShape& a, const WeightedShape& b) {
  if (a.weight == 0.0 && b.weight == 0.0) return true;
  return a.weight == b.weight && a.shape.values == b.shape.values;
}

double d_eta_from_srv(double srv_distance, double w0, double w1, double eta) {
  check_eta(eta);
  return std::min(srv_distance + eta * std::abs(w0 - w1), eta * (w0 + w1));
}

double d_eta(const WeightedShape& a, const WeightedShape& b, double eta) {
  check_eta(eta);
  check_weight(a);
  check_weight(b);
  // With a null endpoint the shortcut always wins: d_srv + eta*w >= eta*w.
  if (a.weight == 0.0 || b.weight == 0.0) return eta * (a.weight + b.weight);
  return d_eta_from_srv(d_srv(a.shape, b.shape), a.weight, b.weight, eta);
}

GeodesicCase geodesic_case(const WeightedShape& a, const WeightedShape& b, double eta) {
  check_eta(eta);
  check_weight(a);
  check_weight(b);
  if (a.weight == 0.0 && b.weight == 0.0) return GeodesicCase::kBothNull;
  if (a.weight == 0.0 || b.weight == 0.0) return GeodesicCase::kOneNull;
  const double direct = d_srv(a.shape, b.shape) + eta * std::abs(a.weight - b.weight);
  const double shortcut = eta * (a.weight + b.weight);
  return direct <= shortcut ? GeodesicCase::kShapeAndWeight : GeodesicCase::kThroughNull;
}

WeightedShape weighted_geodesic(const WeightedShape& a, const WeightedShape& b, double eta, double u) {
  if (!(u >= 0.0 && u <= 1.0)) throw ArgumentError("weighted_geodesic: u must lie in [0,1]");
  const double w0 = a.weight;
  const double w1 = b.weight;
  const double lerp = (1.0 - u) * w0 + u * w1;
  switch (geodesic_case(a, b, eta)) {
    case GeodesicCase::kBothNull:
      return {a.shape, 0.0};
    case GeodesicCase::kOneNull:
      return {w0 > 0.0 ? a.shape : b.shape, lerp};
    case GeodesicCase::kShapeAndWeight:
      return {srv_geodesic(a.shape, b.shape, u), lerp};
    case GeodesicCase::kThroughNull: {
      const double alpha = w0 / (w0 + w1);
      if (u <= alpha) return {a.shape, std::max(0.0, w0 - u * (w0 + w1))};
      if (u == 1.0) return b;
      return {b.shape, std::max(0.0, (u - 1.0) * w0 + u * w1)};
    }
  }
  return a;
}

}  // namespace shapegraph
