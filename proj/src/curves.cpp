#include "shapegraph/curves.hpp"

#include "shapegraph/errors.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

namespace shapegraph {

namespace {

double grid_step(Eigen::Index n) { return 1.0 / static_cast<double>(n - 1); }

// Linear interpolation of q at fractional sample index `pos` in [0, n-1].
Point sample_at(const Eigen::Matrix2Xd& q, double pos) {
  const Eigen::Index last = q.cols() - 1;
  if (pos <= 0.0) return q.col(0);
  if (pos >= static_cast<double>(last)) return q.col(last);
  const auto lo = static_cast<Eigen::Index>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return q.col(lo);
  return (1.0 - frac) * q.col(lo) + frac * q.col(lo + 1);
}

void require_same_size(const SrvCurve& a, const SrvCurve& b) {
  if (a.size() != b.size()) throw ArgumentError("SRV curves have different sample counts");
  if (a.size() < 2) throw ArgumentError("SRV curves need at least 2 samples");
}

}  // namespace

PlanarCurve::PlanarCurve(std::initializer_list<Point> pts) : points(2, static_cast<Eigen::Index>(pts.size())) {
  Eigen::Index s = 0;
  for (const auto& p : pts) points.col(s++) = p;
}

SrvCurve SrvCurve::null(Eigen::Index samples) { return SrvCurve(Eigen::Matrix2Xd::Zero(2, samples)); }

Reparameterization Reparameterization::make_identity(Eigen::Index samples) {
  Reparameterization r;
  r.gamma.resize(samples);
  for (Eigen::Index s = 0; s < samples; ++s) r.gamma(s) = static_cast<double>(s) * grid_step(samples);
  r.gamma(samples - 1) = 1.0;
  r.identity = true;
  return r;
}

double arc_length(const PlanarCurve& curve) {
  double total = 0.0;
  for (Eigen::Index s = 1; s < curve.size(); ++s) total += (curve.points.col(s) - curve.points.col(s - 1)).norm();
  return total;
}

PlanarCurve resample(const PlanarCurve& curve, int samples) {
  if (samples < 2) throw ArgumentError("resample: sample count must be at least 2");
  if (curve.size() < 2) throw DegenerateInputError("resample: curve needs at least 2 points");
  const Eigen::Index m = curve.size();
  std::vector<double> cumulative(static_cast<size_t>(m), 0.0);
  for (Eigen::Index s = 1; s < m; ++s)
    cumulative[s] = cumulative[s - 1] + (curve.points.col(s) - curve.points.col(s - 1)).norm();
  const double total = cumulative.back();
  if (!(total > 0.0)) throw DegenerateInputError("resample: curve has zero arc length");

  Eigen::Matrix2Xd out(2, samples);
  out.col(0) = curve.front();
  out.col(samples - 1) = curve.back();
  Eigen::Index seg = 1;
  for (int k = 1; k + 1 < samples; ++k) {
    const double target = total * static_cast<double>(k) / static_cast<double>(samples - 1);
    while (seg < m - 1 && cumulative[seg] < target) ++seg;
    const double len = cumulative[seg] - cumulative[seg - 1];
    const double frac = len > 0.0 ? (target - cumulative[seg - 1]) / len : 0.0;
    out.col(k) = (1.0 - frac) * curve.points.col(seg - 1) + frac * curve.points.col(seg);
  }
  return PlanarCurve(std::move(out));
}

SrvCurve to_srvf(const PlanarCurve& curve) {
  const Eigen::Index n = curve.size();
  if (n < 2) throw DegenerateInputError("to_srvf: curve needs at least 2 samples");
  const double dt = grid_step(n);
  Eigen::Matrix2Xd q(2, n);
  for (Eigen::Index s = 0; s < n; ++s) {
    Point v;
    if (s == 0)
      v = (curve.points.col(1) - curve.points.col(0)) / dt;
    else if (s == n - 1)
      v = (curve.points.col(n - 1) - curve.points.col(n - 2)) / dt;
    else
      v = (curve.points.col(s + 1) - curve.points.col(s - 1)) / (2.0 * dt);
    const double speed = v.norm();
    q.col(s) = speed > 0.0 ? Point(v / std::sqrt(speed)) : Point::Zero();
  }
  return SrvCurve(std::move(q));
}

PlanarCurve from_srvf(const SrvCurve& q, const Point& origin) {
  const Eigen::Index n = q.size();
  if (n < 2) throw ArgumentError("from_srvf: need at least 2 samples");
  if (!q.values.allFinite()) throw ArgumentError("from_srvf: non-finite SRV values");
  const double dt = grid_step(n);

  // Velocity samples scaled by dt; rows mirror the difference stencils of to_srvf.
  Eigen::Matrix2Xd rhs(2, n);
  for (Eigen::Index s = 0; s < n; ++s) rhs.col(s) = q.values.col(s) * q.values.col(s).norm() * dt;
  if (rhs.isZero(0.0)) {
    Eigen::Matrix2Xd pts(2, n);
    pts.colwise() = origin;
    return PlanarCurve(std::move(pts));
  }

  // Unknowns are beta_1..beta_{n-1}; beta_0 = origin moves to the right-hand side.
  const Eigen::Index unknowns = n - 1;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(3 * n));
  Eigen::MatrixX2d b(n, 2);
  auto add = [&](Eigen::Index row, Eigen::Index beta_index, double coef) {
    if (beta_index == 0)
      b.row(row) -= coef * origin.transpose();
    else
      trip.emplace_back(row, beta_index - 1, coef);
  };
  for (Eigen::Index s = 0; s < n; ++s) b.row(s) = rhs.col(s).transpose();
  add(0, 1, 1.0);
  add(0, 0, -1.0);
  for (Eigen::Index s = 1; s + 1 < n; ++s) {
    add(s, s + 1, 0.5);
    add(s, s - 1, -0.5);
  }
  add(n - 1, n - 1, 1.0);
  add(n - 1, n - 2, -1.0);

  Eigen::SparseMatrix<double> a(n, unknowns);
  a.setFromTriplets(trip.begin(), trip.end());
  const Eigen::SparseMatrix<double> normal = a.transpose() * a;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(normal);
  if (solver.info() != Eigen::Success) throw std::runtime_error("from_srvf: factorization failed");
  const Eigen::MatrixX2d x = solver.solve(a.transpose() * b);

  Eigen::Matrix2Xd pts(2, n);
  pts.col(0) = origin;
  pts.rightCols(unknowns) = x.transpose();
  return PlanarCurve(std::move(pts));
}

PlanarCurve reversed(const PlanarCurve& curve) { return PlanarCurve(curve.points.rowwise().reverse()); }

SrvCurve reversed(const SrvCurve& q) { return SrvCurve(-q.values.rowwise().reverse()); }

double l2_norm_squared(const SrvCurve& q) {
  const Eigen::Index n = q.size();
  if (n < 2) return 0.0;
  const double dt = grid_step(n);
  double interior = 0.0;
  for (Eigen::Index s = 1; s + 1 < n; ++s) interior += q.values.col(s).squaredNorm();
  return dt * (0.5 * q.values.col(0).squaredNorm() + interior + 0.5 * q.values.col(n - 1).squaredNorm());
}

double l2_distance(const SrvCurve& a, const SrvCurve& b) {
  require_same_size(a, b);
  return std::sqrt(l2_norm_squared(SrvCurve(a.values - b.values)));
}

SrvCurve apply_warp(const SrvCurve& q, const Reparameterization& gamma) {
  const Eigen::Index n = q.size();
  if (gamma.gamma.size() != n) throw ArgumentError("apply_warp: size mismatch");
  if (gamma.identity) return q;
  const double dt = grid_step(n);
  const double last = static_cast<double>(n - 1);
  Eigen::Matrix2Xd out(2, n);
  for (Eigen::Index s = 0; s < n; ++s) {
    double slope;
    if (s == 0)
      slope = (gamma.gamma(1) - gamma.gamma(0)) / dt;
    else if (s == n - 1)
      slope = (gamma.gamma(n - 1) - gamma.gamma(n - 2)) / dt;
    else
      slope = (gamma.gamma(s + 1) - gamma.gamma(s - 1)) / (2.0 * dt);
    out.col(s) = sample_at(q.values, gamma.gamma(s) * last) * std::sqrt(std::max(slope, 0.0));
  }
  return SrvCurve(std::move(out));
}

double warp_segment_cost(const SrvCurve& q0, const SrvCurve& q1, int k, int l, int i, int j) {
  const double dt = grid_step(q0.size());
  const int di = i - k;
  const int dj = j - l;
  const double root_slope = std::sqrt(static_cast<double>(dj) / static_cast<double>(di));
  const double* a = q0.values.data();
  const double* b = q1.values.data();
  const int last = static_cast<int>(q1.size()) - 1;
  double sum = 0.0;
  for (int s = k; s <= i; ++s) {
    // q1 at fractional index l + dj (s - k) / di, linearly interpolated.
    const int num = dj * (s - k);
    int lo = l + num / di;
    double frac = static_cast<double>(num % di) / static_cast<double>(di);
    if (lo >= last) {
      lo = last;
      frac = 0.0;
    }
    double bx = b[2 * lo];
    double by = b[2 * lo + 1];
    if (frac > 0.0) {
      bx += frac * (b[2 * lo + 2] - bx);
      by += frac * (b[2 * lo + 3] - by);
    }
    const double ex = a[2 * s] - root_slope * bx;
    const double ey = a[2 * s + 1] - root_slope * by;
    const double f = ex * ex + ey * ey;
    sum += (s == k || s == i) ? 0.5 * f : f;
  }
  return dt * sum;
}

CurveRegistration register_curve(const SrvCurve& q0, const SrvCurve& q1) {
  require_same_size(q0, q1);
  const int n = static_cast<int>(q0.size());
  const double inf = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd cost = Eigen::MatrixXd::Constant(n, n, inf);
  Eigen::MatrixXi pred = Eigen::MatrixXi::Constant(n, n, -1);
  cost(0, 0) = 0.0;
  const int end = n - 1;
  for (int i = 1; i < n; ++i) {
    // Cells outside the slope band can neither be reached from (0,0) nor reach the corner.
    const int j_lo = std::max({1, (i + 2) / 3, end - 3 * (end - i)});
    const int j_hi = std::min({end, 3 * i, end - (end - i + 2) / 3});
    for (int j = j_lo; j <= j_hi; ++j) {
      double best = inf;
      int best_step = -1;
      for (int st = 0; st < static_cast<int>(kWarpSteps.size()); ++st) {
        const int k = i - kWarpSteps[st].first;
        const int l = j - kWarpSteps[st].second;
        if (k < 0 || l < 0 || cost(k, l) == inf) continue;
        const double c = cost(k, l) + warp_segment_cost(q0, q1, k, l, i, j);
        if (c < best) {
          best = c;
          best_step = st;
        }
      }
      cost(i, j) = best;
      pred(i, j) = best_step;
    }
  }

  CurveRegistration out;
  out.objective = cost(n - 1, n - 1);
  std::vector<std::pair<int, int>> path{{n - 1, n - 1}};
  bool diagonal = true;
  while (path.back() != std::pair<int, int>{0, 0}) {
    const auto [i, j] = path.back();
    const int st = pred(i, j);
    if (st != 0) diagonal = false;
    path.emplace_back(i - kWarpSteps[st].first, j - kWarpSteps[st].second);
  }
  std::reverse(path.begin(), path.end());

  if (diagonal) {
    out.gamma = Reparameterization::make_identity(n);
  } else {
    out.gamma.gamma.resize(n);
    for (size_t p = 1; p < path.size(); ++p) {
      const auto [k, l] = path[p - 1];
      const auto [i, j] = path[p];
      for (int s = k; s <= i; ++s) {
        const double pos = static_cast<double>(l) + static_cast<double>((j - l) * (s - k)) / static_cast<double>(i - k);
        out.gamma.gamma(s) = pos / static_cast<double>(n - 1);
      }
    }
  }
  out.path = std::move(path);
  out.registered = apply_warp(q1, out.gamma);
  out.distance = l2_distance(q0, out.registered);

  // The lattice objective and the sampled norm differ by discretization; never
  // report a warp that is worse than leaving q1 alone.
  if (!out.gamma.identity) {
    const double plain = l2_distance(q0, q1);
    if (plain <= out.distance) {
      out.gamma = Reparameterization::make_identity(n);
      out.registered = q1;
      out.distance = plain;
    }
  }
  return out;
}

double d_srv(const SrvCurve& q0, const SrvCurve& q1) {
  return std::min(register_curve(q0, q1).distance, register_curve(q1, q0).distance);
}

SrvCurve srv_geodesic(const SrvCurve& q0, const SrvCurve& q1, double u) {
  require_same_size(q0, q1);
  if (!(u >= 0.0 && u <= 1.0)) throw ArgumentError("srv_geodesic: u must lie in [0,1]");
  if (u == 0.0) return q0;
  if (u == 1.0) return q1;
  return SrvCurve((1.0 - u) * q0.values + u * q1.values);
}

CurveMean karcher_mean_curves(std::span<const SrvCurve> curves, double tol, int max_iter) {
  if (curves.empty()) throw ArgumentError("karcher_mean_curves: empty input");
  for (const auto& c : curves) require_same_size(curves.front(), c);

  auto objective = [&](const SrvCurve& m) {
    double total = 0.0;
    for (const auto& c : curves) {
      const double d = d_srv(m, c);
      total += d * d;
    }
    return total;
  };

  CurveMean out;
  out.mean = curves.front();
  out.objective_trace.push_back(objective(out.mean));
  for (int it = 0; it < max_iter; ++it) {
    Eigen::Matrix2Xd sum = Eigen::Matrix2Xd::Zero(2, out.mean.size());
    for (const auto& c : curves) sum += register_curve(out.mean, c).registered.values;
    SrvCurve next(sum / static_cast<double>(curves.size()));
    const double obj = objective(next);
    if (obj > out.objective_trace.back() * (1.0 + 1e-6)) break;
    const double change = l2_distance(next, out.mean);
    out.mean = std::move(next);
    out.objective_trace.push_back(obj);
    out.iterations = it + 1;
    if (change < tol) break;
  }
  return out;
}

PlanarCurve fit_to_endpoints(const PlanarCurve& curve, const Point& p, const Point& q) {
  if (curve.size() < 2) throw DegenerateInputError("fit_to_endpoints: curve needs at least 2 samples");
  using C = std::complex<double>;
  const C a(curve.front().x(), curve.front().y());
  const C b(curve.back().x(), curve.back().y());
  const C cp(p.x(), p.y());
  const C cq(q.x(), q.y());
  if (std::abs(b - a) == 0.0) throw DegenerateInputError("fit_to_endpoints: curve endpoints coincide");
  if (std::abs(cq - cp) == 0.0) throw DegenerateInputError("fit_to_endpoints: target endpoints coincide");
  const C factor = (cq - cp) / (b - a);
  Eigen::Matrix2Xd out(2, curve.size());
  for (Eigen::Index s = 0; s < curve.size(); ++s) {
    const C z = cp + (C(curve.points(0, s), curve.points(1, s)) - a) * factor;
    out.col(s) = Point(z.real(), z.imag());
  }
  out.col(0) = p;
  out.col(curve.size() - 1) = q;
  return PlanarCurve(std::move(out));
}

}  // namespace shapegraph
