#include "support.hpp"

#include "shapegraph/errors.hpp"
#include "shapegraph/graph.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <numbers>
#include <set>

using namespace shapegraph;
using testing::straight_graph;

namespace {

std::set<std::string> ids(const ShapeGraph& g) {
  std::set<std::string> out;
  for (const auto& n : g.nodes) out.insert(n.id);
  return out;
}

bool has_code(const std::vector<Violation>& v, const std::string& code) {
  return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.code == code; });
}

ShapeGraph path4() {
  return straight_graph({{"a", {0, 0}}, {"b", {1, 0}}, {"c", {2, 0}}, {"d", {3, 0}}},
                        {{"a", "b"}, {"b", "c"}, {"c", "d"}});
}

}  // namespace

TEST_CASE("validate") {
  CHECK(validate(ShapeGraph{}).empty());
  CHECK(validate(path4()).empty());

  ShapeGraph loop = straight_graph({{"a", {0, 0}}, {"b", {1, 0}}}, {{"a", "b"}});
  loop.edges.push_back({"a", "a", PlanarCurve{Point(0, 0), Point(1, 1), Point(0, 0)}, {}});
  const auto v = validate(loop);
  REQUIRE(v.size() == 1);
  CHECK(v[0].code == "self-loop");
  CHECK(v[0].message.find("'a'") != std::string::npos);

  ShapeGraph off = path4();
  off.edges[0].curve.points.col(0) = Point(0, 0.5);
  CHECK(has_code(validate(off), "endpoint-mismatch"));

  ShapeGraph dup = path4();
  dup.nodes.push_back({"a", Point(9, 9)});
  CHECK(has_code(validate(dup), "duplicate-node"));

  ShapeGraph missing = path4();
  missing.edges.push_back({"a", "zz", testing::segment(Point(0, 0), Point(1, 1), 3), {}});
  CHECK(has_code(validate(missing), "missing-node"));

  ShapeGraph bad_w = path4();
  bad_w.edges[1].weight = -1.0;
  CHECK(has_code(validate(bad_w), "bad-weight"));
}

TEST_CASE("assign_weights") {
  ShapeGraph g = straight_graph({{"a", {0, 0}}, {"b", {1, 0}}}, {{"a", "b"}});
  CHECK(*assign_weights(g, WeightPolicy::kLength).edges[0].weight == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(*assign_weights(g, WeightPolicy::kBinary).edges[0].weight == 1.0);

  Eigen::Matrix2Xd pts(2, 400);
  for (int s = 0; s < 400; ++s) {
    const double a = std::numbers::pi / 2 * s / 399.0;
    pts.col(s) = Point(std::cos(a), std::sin(a));
  }
  ShapeGraph q;
  q.nodes = {{"p", Point(1, 0)}, {"q", Point(0, 1)}};
  q.edges.push_back({"p", "q", PlanarCurve(pts), {}});
  CHECK(std::abs(*assign_weights(q, WeightPolicy::kLength).edges[0].weight - std::numbers::pi / 2) < 1e-5);
  CHECK(to_string(WeightPolicy::kBinary) == "binary");
  CHECK(weight_policy_from_string("length") == WeightPolicy::kLength);
  CHECK_THROWS_AS(weight_policy_from_string("area"), ArgumentError);
}

TEST_CASE("pad_nulls") {
  const ShapeGraph g3 = straight_graph({{"a", {0, 0}}, {"b", {1, 0}}, {"c", {2, 0}}}, {{"a", "b"}});
  const ShapeGraph g5 =
      straight_graph({{"a", {0, 0}}, {"b", {1, 0}}, {"c", {2, 0}}, {"d", {3, 0}}, {"e", {4, 0}}}, {{"d", "e"}});
  const auto [p3, p5] = pad_nulls(g3, g5);
  CHECK(p3.nodes.size() == 8);
  CHECK(p5.nodes.size() == 8);
  CHECK(p3.real_node_count() == 3);
  CHECK(validate(p3).empty());
  CHECK(validate(p5).empty());
  CHECK(p3.nodes[0].id == "a");
  const auto [q0, q1] = pad_nulls(g3, g3);
  CHECK(q0.nodes.size() == 6);
  CHECK(ids(q0).size() == 6);
}

TEST_CASE("components") {
  std::vector<std::pair<std::string, Point>> nodes;
  std::vector<std::pair<std::string, std::string>> edges;
  for (int i = 0; i < 10; ++i) {
    nodes.emplace_back("v" + std::to_string(i), Point(i, 0));
    if (i) edges.emplace_back("v" + std::to_string(i - 1), "v" + std::to_string(i));
  }
  nodes.emplace_back("x", Point(0, 5));
  nodes.emplace_back("y", Point(1, 5));
  edges.emplace_back("x", "y");
  const ShapeGraph g = straight_graph(nodes, edges);
  CHECK(connected_components(g).size() == 2);
  CHECK(remove_small_components(g, 3).nodes.size() == 10);
  CHECK(remove_small_components(g, 2).nodes.size() == 12);
  CHECK(remove_small_components(g, 11).nodes.empty());
  const ShapeGraph p = path4();
  CHECK(remove_small_components(p, 4).edges.size() == 3);
}

TEST_CASE("fiedler_bipartition") {
  const auto [a, b] = fiedler_bipartition(path4());
  CHECK(((ids(a) == std::set<std::string>{"a", "b"} && ids(b) == std::set<std::string>{"c", "d"}) ||
         (ids(b) == std::set<std::string>{"a", "b"} && ids(a) == std::set<std::string>{"c", "d"})));
  CHECK(a.edges.size() == 1);

  // Oracle: sign pattern of the Fiedler vector computed directly.
  Eigen::Matrix4d lap;
  lap << 1, -1, 0, 0, -1, 2, -1, 0, 0, -1, 2, -1, 0, 0, -1, 1;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(lap);
  const Eigen::Vector4d f = es.eigenvectors().col(1);
  CHECK(f(0) * f(1) > 0);
  CHECK(f(0) * f(3) < 0);

  const auto [l, r] = fiedler_bipartition(straight_graph({{"p", {0, 0}}, {"q", {1, 0}}}, {{"p", "q"}}));
  CHECK(l.nodes.size() == 1);
  CHECK(r.nodes.size() == 1);

  const ShapeGraph k4 = straight_graph({{"a", {0, 0}}, {"b", {1, 0}}, {"c", {1, 1}}, {"d", {0, 1}}},
                                       {{"a", "b"}, {"a", "c"}, {"a", "d"}, {"b", "c"}, {"b", "d"}, {"c", "d"}});
  const auto [k0, k1] = fiedler_bipartition(k4);
  CHECK(k0.nodes.size() == 2);
  CHECK(k1.nodes.size() == 2);
  const auto [k0b, k1b] = fiedler_bipartition(k4);
  CHECK(ids(k0) == ids(k0b));

  ShapeGraph split = path4();
  split.edges.erase(split.edges.begin() + 1);
  CHECK_THROWS_AS(fiedler_bipartition(split), PreconditionError);
}

TEST_CASE("simplify_multiedges") {
  CHECK(simplify_multiedges(path4()).edges.size() == 3);
  ShapeGraph g = straight_graph({{"u", {0, 0}}, {"v", {2, 0}}}, {{"u", "v"}});
  Eigen::Matrix2Xd bump(2, 3);
  bump << 0, 1, 2, 0, 1, 0;
  g.edges.push_back({"u", "v", PlanarCurve(bump), {}});
  const ShapeGraph two = simplify_multiedges(g);
  CHECK(two.nodes.size() == 3);
  CHECK(two.edges.size() == 3);
  CHECK(validate(two).empty());
  bump.row(1) *= -1.0;
  g.edges.push_back({"v", "u", reversed(PlanarCurve(bump)), {}});
  const ShapeGraph three = simplify_multiedges(g);
  CHECK(three.nodes.size() == 4);
  CHECK(three.edges.size() == 5);
  CHECK(validate(three).empty());
}

TEST_CASE("attributed round trip") {
  const ShapeGraph g = path4();
  const AttributedGraph a = to_attributed(g, 25);
  CHECK(a.size() == 4);
  CHECK(a.edges.size() == 3);
  CHECK(a.edge(0, 1).weight == doctest::Approx(1.0));
  const WeightedShape back = a.edge(1, 0);
  CHECK(back.shape.values.isApprox(reversed(a.edge(0, 1).shape).values));
  CHECK(a.edge(0, 3).is_null());
  const ShapeGraph g2 = to_shape_graph(a);
  CHECK(g2.edges.size() == 3);
  CHECK(validate(g2).empty());
  const AttributedGraph p = pad(a, 2);
  CHECK(p.size() == 6);
  CHECK(p.is_null_node(5));
}

TEST_CASE("estimate_mean_distance") {
  std::vector<std::optional<Point>> a{Point(0, 0), std::nullopt};
  std::vector<std::optional<Point>> b{Point(3, 4), Point(0, 0)};
  CHECK(estimate_mean_distance(a, b, 0) == doctest::Approx(2.5));
}
