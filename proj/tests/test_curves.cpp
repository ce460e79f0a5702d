#include "support.hpp"

#include "shapegraph/curves.hpp"
#include "shapegraph/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace shapegraph;
using testing::segment;

namespace {

PlanarCurve arc(double r, double from, double to, int samples, Point center = Point(0, 0)) {
  Eigen::Matrix2Xd pts(2, samples);
  for (int s = 0; s < samples; ++s) {
    const double a = from + (to - from) * s / (samples - 1);
    pts.col(s) = center + r * Point(std::cos(a), std::sin(a));
  }
  return PlanarCurve(pts);
}

const std::vector<std::pair<int, int>> kSteps{{1, 1}, {1, 2}, {2, 1}, {1, 3}, {3, 1}, {2, 3}, {3, 2}};

}  // namespace

TEST_CASE("resample: uniform arc length") {
  const PlanarCurve r = resample(PlanarCurve{Point(0, 0), Point(1, 0)}, 3);
  CHECK(r.points.isApprox((Eigen::Matrix2Xd(2, 3) << 0, 0.5, 1, 0, 0, 0).finished()));

  const PlanarCurve s = segment(Point(0, 0), Point(3, 1), 7);
  CHECK((resample(s, 7).points - s.points).cwiseAbs().maxCoeff() < 1e-12);

  const PlanarCurve q = resample(arc(1.0, 0.0, std::numbers::pi / 2, 2000), 5);
  for (int s2 = 0; s2 < 5; ++s2) {
    const double a = std::numbers::pi / 8 * s2;
    CHECK((q.points.col(s2) - Point(std::cos(a), std::sin(a))).norm() < 1e-6);
  }
  CHECK_THROWS_AS(resample(PlanarCurve{Point(1, 1), Point(1, 1)}, 4), DegenerateInputError);
  CHECK_THROWS_AS(resample(s, 1), ArgumentError);
}

TEST_CASE("to_srvf: segments and translation") {
  const SrvCurve q1 = to_srvf(segment(Point(0, 0), Point(1, 0), 11));
  const SrvCurve q4 = to_srvf(segment(Point(0, 0), Point(4, 0), 11));
  for (Eigen::Index s = 0; s < 11; ++s) {
    CHECK(q1.values.col(s).isApprox(Eigen::Vector2d(1, 0)));
    CHECK(q4.values.col(s).isApprox(Eigen::Vector2d(2, 0)));
  }
  std::mt19937_64 rng(3);
  const PlanarCurve c = testing::random_curve(rng, 25);
  PlanarCurve moved = c;
  moved.points.colwise() += Eigen::Vector2d(7.5, -3.25);
  const PlanarCurve rc = resample(c, 25);
  const PlanarCurve rm = resample(moved, 25);
  CHECK((to_srvf(rc).values - to_srvf(rm).values).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("from_srvf inverts to_srvf") {
  const SrvCurve unit(Eigen::Matrix2Xd::Constant(2, 9, 0.0).colwise() + Eigen::Vector2d(1, 0));
  const PlanarCurve seg = from_srvf(unit, Point(0, 0));
  CHECK((seg.back() - Point(1, 0)).norm() < 1e-12);
  CHECK((seg.front() - Point(0, 0)).norm() < 1e-12);

  const PlanarCurve dot = from_srvf(SrvCurve::null(6), Point(2, 3));
  for (Eigen::Index s = 0; s < dot.size(); ++s) CHECK((dot.points.col(s) - Point(2, 3)).norm() < 1e-15);

  const PlanarCurve quarter = resample(arc(1.0, 0.0, std::numbers::pi / 2, 4000), 200);
  const PlanarCurve back = from_srvf(to_srvf(quarter), quarter.front());
  CHECK((back.points - quarter.points).colwise().norm().maxCoeff() < 1e-4);
}

TEST_CASE("register_curve: identity and closed forms") {
  std::mt19937_64 rng(5);
  const SrvCurve q = to_srvf(resample(testing::random_curve(rng, 40), 40));
  const CurveRegistration self = register_curve(q, q);
  CHECK(self.gamma.identity);
  CHECK(self.objective < 1e-20);
  CHECK(self.distance == 0.0);

  const SrvCurve a = to_srvf(segment(Point(0, 0), Point(1, 0), 50));
  const SrvCurve b = to_srvf(segment(Point(0, 0), Point(4, 0), 50));
  const CurveRegistration r = register_curve(a, b);
  CHECK(r.gamma.identity);
  CHECK(r.distance == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("register_curve recovers a known warp") {
  const int n = 100;
  const PlanarCurve base = resample(arc(1.0, 0.0, 1.5 * std::numbers::pi, 3000), n);
  const SrvCurve q0 = to_srvf(base);
  // gamma*(t) = (e^t - 1) / (e - 1): slopes stay inside the lattice's [1/3, 3].
  Reparameterization warp;
  warp.gamma.resize(n);
  for (int s = 0; s < n; ++s) {
    const double t = static_cast<double>(s) / (n - 1);
    warp.gamma(s) = std::expm1(t) / std::expm1(1.0);
  }
  const SrvCurve q1 = apply_warp(q0, warp);
  const CurveRegistration r = register_curve(q1, q0);
  // Residual: L2 norm of gamma - gamma* on [0, 1], trapezoid rule.
  double sq = 0.0;
  double worst = 0.0;
  for (int s = 0; s < n; ++s) {
    const double d = r.gamma.gamma(s) - warp.gamma(s);
    sq += (s == 0 || s == n - 1 ? 0.5 : 1.0) * d * d / (n - 1);
    worst = std::max(worst, std::abs(d));
  }
  CHECK(std::sqrt(sq) < 1e-2);
  CHECK(worst < 2e-2);
  CHECK(r.distance < l2_distance(q1, q0));
}

TEST_CASE("dynamic program agrees with path enumeration") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 3 + trial % 6;
    const SrvCurve q0 = to_srvf(resample(testing::random_curve(rng, 12), n));
    const SrvCurve q1 = to_srvf(resample(testing::random_curve(rng, 12), n));
    const double oracle = testing::exhaustive_warp_objective(q0.values, q1.values, kSteps);
    CHECK(register_curve(q0, q1).objective == oracle);
  }
}

TEST_CASE("segment cost matches the reference integral") {
  std::mt19937_64 rng(12);
  const SrvCurve q0 = to_srvf(resample(testing::random_curve(rng, 12), 10));
  const SrvCurve q1 = to_srvf(resample(testing::random_curve(rng, 12), 10));
  for (const auto& [di, dj] : kSteps)
    CHECK(warp_segment_cost(q0, q1, 2, 3, 2 + di, 3 + dj) == testing::segment_cost(q0.values, q1.values, 2, 3, 2 + di, 3 + dj));
}

TEST_CASE("d_srv closed forms and speed") {
  const int n = 100;
  const SrvCurve h = to_srvf(segment(Point(0, 0), Point(1, 0), n));
  const SrvCurve v = to_srvf(segment(Point(0, 0), Point(0, 1), n));
  const SrvCurve h4 = to_srvf(segment(Point(0, 0), Point(4, 0), n));
  CHECK(std::abs(d_srv(h, v) - std::sqrt(2.0)) < 1e-3);
  CHECK(std::abs(d_srv(h, h4) - 1.0) < 1e-3);
  CHECK(d_srv(h, h) == 0.0);

  // Constant SRVFs: d^2 = L0 + L1 - 2 sqrt(L0 L1) cos(theta).
  for (double theta : {0.2, 0.7, 1.2}) {
    const SrvCurve w = to_srvf(segment(Point(0, 0), 2.0 * Point(std::cos(theta), std::sin(theta)), n));
    const double expect = std::sqrt(1.0 + 2.0 - 2.0 * std::sqrt(2.0) * std::cos(theta));
    CHECK(std::abs(d_srv(h, w) - expect) < 1e-3);
  }
}

TEST_CASE("srv_geodesic") {
  const int n = 40;
  const SrvCurve a(Eigen::Matrix2Xd::Zero(2, n).colwise() + Eigen::Vector2d(1, 0));
  const SrvCurve b(Eigen::Matrix2Xd::Zero(2, n).colwise() + Eigen::Vector2d(0, 1));
  CHECK(srv_geodesic(a, b, 0.0).values == a.values);
  CHECK(srv_geodesic(a, b, 1.0).values == b.values);
  const SrvCurve mid = srv_geodesic(a, b, 0.5);
  for (Eigen::Index s = 0; s < n; ++s) CHECK(mid.values.col(s).isApprox(Eigen::Vector2d(0.5, 0.5)));
  CHECK_THROWS_AS(srv_geodesic(a, b, 1.5), ArgumentError);

  std::mt19937_64 rng(21);
  const SrvCurve q0 = to_srvf(resample(testing::random_curve(rng, 30), 60));
  const SrvCurve q1 = to_srvf(resample(testing::random_curve(rng, 30), 60));
  const CurveRegistration reg = register_curve(q0, q1);
  for (double u : {0.25, 0.5, 0.75}) {
    const SrvCurve p = srv_geodesic(q0, reg.registered, u);
    CHECK(std::abs(l2_distance(q0, p) - u * reg.distance) < 1e-9);
    CHECK(d_srv(q0, p) <= u * reg.distance + 1e-3);
  }
}

TEST_CASE("karcher_mean_curves") {
  std::mt19937_64 rng(31);
  const SrvCurve q = to_srvf(resample(testing::random_curve(rng, 20), 30));
  std::vector<SrvCurve> one{q};
  CHECK(karcher_mean_curves(one).mean.values == q.values);
  std::vector<SrvCurve> same{q, q, q};
  const CurveMean m3 = karcher_mean_curves(same);
  CHECK((m3.mean.values - q.values).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(m3.objective_trace.back() < 1e-20);

  const SrvCurve q2 = to_srvf(resample(testing::random_curve(rng, 20), 30));
  std::vector<SrvCurve> two{q, q2};
  const CurveMean m2 = karcher_mean_curves(two);
  CHECK(std::abs(d_srv(q, m2.mean) - d_srv(q2, m2.mean)) < 1e-2);
  for (size_t k = 1; k < m2.objective_trace.size(); ++k)
    CHECK(m2.objective_trace[k] <= m2.objective_trace[k - 1] * (1 + 1e-12));
}

TEST_CASE("fit_to_endpoints") {
  const PlanarCurve s = fit_to_endpoints(segment(Point(0, 0), Point(1, 0), 5), Point(0, 0), Point(0, 2));
  CHECK((s.points - segment(Point(0, 0), Point(0, 2), 5).points).cwiseAbs().maxCoeff() < 1e-12);

  std::mt19937_64 rng(41);
  const PlanarCurve c = testing::random_curve(rng, 15);
  CHECK((fit_to_endpoints(c, c.front(), c.back()).points - c.points).cwiseAbs().maxCoeff() < 1e-12);

  // Upper semicircle over (0,0)-(2,0), traversed from (0,0) to (2,0).
  const PlanarCurve semi = arc(1.0, std::numbers::pi, 0.0, 101, Point(1, 0));
  const PlanarCurve moved = fit_to_endpoints(semi, Point(1, 1), Point(3, 1));
  CHECK((moved.points.col(50) - Point(2, 2)).norm() < 1e-12);
  for (Eigen::Index k = 0; k < moved.size(); ++k) CHECK(std::abs((moved.points.col(k) - Point(2, 1)).norm() - 1.0) < 1e-12);
}
