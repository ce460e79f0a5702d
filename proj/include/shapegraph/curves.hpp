#pragma once

// Elastic shape analysis of open planar curves in the square-root velocity
// (SRV) representation.
//
// All curves are sampled on a uniform parameter grid t_s = s / (n - 1),
// s = 0..n-1. SRV functions are compared with the trapezoidal L2 inner
// product on that grid, so a constant SRV of magnitude c has squared norm c^2.

#include <Eigen/Core>

#include <array>
#include <span>
#include <utility>
#include <vector>

namespace shapegraph {

using Point = Eigen::Vector2d;

/// A sampled planar curve. Column s holds the s-th sample.
struct PlanarCurve {
  Eigen::Matrix2Xd points;

  PlanarCurve() = default;
  explicit PlanarCurve(Eigen::Matrix2Xd pts) : points(std::move(pts)) {}
  PlanarCurve(std::initializer_list<Point> pts);

  Eigen::Index size() const { return points.cols(); }
  Point front() const { return points.col(0); }
  Point back() const { return points.col(points.cols() - 1); }
};

/// Discretized square-root velocity function q = beta' / sqrt(|beta'|).
struct SrvCurve {
  Eigen::Matrix2Xd values;

  SrvCurve() = default;
  explicit SrvCurve(Eigen::Matrix2Xd v) : values(std::move(v)) {}

  /// The null curve: all-zero SRV with the given sample count.
  static SrvCurve null(Eigen::Index samples);

  Eigen::Index size() const { return values.cols(); }
  bool is_null() const { return values.isZero(0.0); }
};

/// Monotone reparameterization of [0,1], stored as gamma(t_s) on the sample grid.
struct Reparameterization {
  Eigen::VectorXd gamma;
  bool identity = false;

  static Reparameterization make_identity(Eigen::Index samples);
};

double arc_length(const PlanarCurve& curve);

/// Uniform arc-length resampling. Endpoints are preserved exactly.
/// Throws DegenerateInputError on a zero-length curve and ArgumentError for samples < 2.
PlanarCurve resample(const PlanarCurve& curve, int samples);

/// Central differences in the interior, one-sided at the endpoints.
SrvCurve to_srvf(const PlanarCurve& curve);

/// Inverse SRV map. Integrates v = q|q| starting at `origin`; the integration
/// is the least-squares inverse of the finite-difference operator used by
/// to_srvf, so to_srvf(from_srvf(to_srvf(c))) reproduces to_srvf(c).
PlanarCurve from_srvf(const SrvCurve& q, const Point& origin);

PlanarCurve reversed(const PlanarCurve& curve);
/// SRV of the reversed curve: t -> -q(1 - t).
SrvCurve reversed(const SrvCurve& q);

double l2_norm_squared(const SrvCurve& q);
double l2_distance(const SrvCurve& a, const SrvCurve& b);

/// Group action (q o gamma) * sqrt(gamma'), with gamma' by central differences.
SrvCurve apply_warp(const SrvCurve& q, const Reparameterization& gamma);

/// Lattice steps (di, dj) allowed in the registration grid. Slopes lie in [1/3, 3].
inline constexpr std::array<std::pair<int, int>, 7> kWarpSteps{
    {{1, 1}, {1, 2}, {2, 1}, {1, 3}, {3, 1}, {2, 3}, {3, 2}}};

/// Cost of the linear warp segment (k,l) -> (i,j) on the registration grid:
/// trapezoidal integral over t in [t_k, t_i] of |q0(t) - sqrt(m) q1(gamma(t))|^2,
/// where m is the segment slope and q1 is linearly interpolated.
double warp_segment_cost(const SrvCurve& q0, const SrvCurve& q1, int k, int l, int i, int j);

struct CurveRegistration {
  Reparameterization gamma;
  SrvCurve registered;        ///< q1 acted on by gamma
  double objective = 0.0;     ///< minimal lattice-path cost found by dynamic programming
  double distance = 0.0;      ///< ||q0 - registered||
  std::vector<std::pair<int, int>> path;  ///< lattice vertices from (0,0) to (n-1,n-1)
};

/// Optimal reparameterization of q1 onto q0 by dynamic programming over the
/// slope-constrained lattice. O(n^2) cells. Requires equal sample counts.
CurveRegistration register_curve(const SrvCurve& q0, const SrvCurve& q1);

/// Elastic distance: the smaller of the two registration directions.
double d_srv(const SrvCurve& q0, const SrvCurve& q1);

/// Straight line (1-u) q0 + u q1; q1 is expected to be registered to q0.
SrvCurve srv_geodesic(const SrvCurve& q0, const SrvCurve& q1, double u);

struct CurveMean {
  SrvCurve mean;
  std::vector<double> objective_trace;  ///< sum of squared d_srv per accepted iterate
  int iterations = 0;
};

/// Karcher mean under d_srv, initialized at the first curve.
/// Stops when the mean moves less than `tol` in L2, after `max_iter` updates,
/// or when an update would increase the objective (that update is discarded).
CurveMean karcher_mean_curves(std::span<const SrvCurve> curves, double tol = 1e-6,
                              int max_iter = 20);

/// Similarity transform (rotation, uniform scale, translation) taking the
/// curve's endpoints onto p and q.
PlanarCurve fit_to_endpoints(const PlanarCurve& curve, const Point& p, const Point& q);

}  // namespace shapegraph
