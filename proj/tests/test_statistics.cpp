#include "support.hpp"

#include "shapegraph/errors.hpp"
#include "shapegraph/io.hpp"
#include "shapegraph/statistics.hpp"

#include <doctest.h>

using namespace shapegraph;

namespace {

std::vector<ShapeGraph> copies(const ShapeGraph& base, size_t m, std::mt19937_64& rng, double jitter = 0.1) {
  std::vector<ShapeGraph> out;
  PerturbOptions o;
  o.node_jitter = jitter;
  o.bend_jitter = jitter;
  for (size_t i = 0; i < m; ++i) out.push_back(perturb(base, rng, o).graph);
  return out;
}

}  // namespace

TEST_CASE("pairwise distances") {
  std::mt19937_64 rng(20);
  const ShapeGraph g = random_graph(5, rng);
  const ShapeGraph h = random_graph(5, rng);
  const std::vector<ShapeGraph> gs{g, g, h};
  const Eigen::MatrixXd d = pairwise_distances(gs);
  CHECK(d(0, 1) < 1e-6);
  CHECK(d == d.transpose());
  CHECK(d.minCoeff() >= 0.0);
  CHECK(d.diagonal().isZero(0.0));
  CHECK(d(0, 2) > 0.0);
}

TEST_CASE("karcher mean basics") {
  std::mt19937_64 rng(21);
  const ShapeGraph g = random_graph(5, rng);
  const std::vector<ShapeGraph> one{g};
  const MeanResult m1 = karcher_mean_graphs(one);
  CHECK(register_pair(g, m1.mean_graph()).distance < 1e-6);

  const std::vector<ShapeGraph> same{g, g, g};
  const MeanResult m3 = karcher_mean_graphs(same);
  CHECK(m3.objective_trace.back() < 1e-12);
  CHECK(m3.iterations <= 1);

  const auto pop = copies(g, 5, rng);
  const MeanResult m = karcher_mean_graphs(pop);
  for (size_t k = 1; k < m.objective_trace.size(); ++k)
    CHECK(m.objective_trace[k] <= m.objective_trace[k - 1] * (1 + 1e-6));
  CHECK(m.objective_trace.back() <= m.objective_trace.front());
  CHECK(m.matched.size() == 5);
  CHECK(largest_graph(pop) < 5);
}

TEST_CASE("tangent PCA") {
  std::mt19937_64 rng(22);
  const ShapeGraph g = random_graph(5, rng);
  const std::vector<ShapeGraph> same{g, g, g};
  const TangentModel flat = tangent_pca(karcher_mean_graphs(same));
  CHECK(flat.singular_values.maxCoeff() < kSingularTolerance);
  CHECK(flat.components() == 0);
  CHECK_THROWS_AS(pc_deformation(flat, 0, 1.0), ArgumentError);

  const auto pair = copies(g, 2, rng, 0.3);
  const MeanResult mean = karcher_mean_graphs(pair);
  const TangentModel model = tangent_pca(mean);
  REQUIRE(model.components() == 1);
  CHECK(model.singular_values(0) > kSingularTolerance);
  for (Eigen::Index k = 1; k < model.singular_values.size(); ++k) CHECK(model.singular_values(k) < kSingularTolerance);

  // Reconstruction from all components.
  for (Eigen::Index r = 0; r < model.vectors.rows(); ++r) {
    const Eigen::VectorXd rebuilt = model.center + model.directions * model.scores.row(r).transpose();
    CHECK((rebuilt - model.vectors.row(r).transpose()).cwiseAbs().maxCoeff() < 1e-9);
  }

  CHECK(format_graph(pc_deformation(model, 0, 0.0)) == format_graph(mean.mean_graph()));
  const Eigen::VectorXd mid = flatten(model, model.mean);
  const Eigen::VectorXd plus = flatten(model, pc_deformation_attributed(model, 0, 0.5));
  const Eigen::VectorXd minus = flatten(model, pc_deformation_attributed(model, 0, -0.5));
  CHECK(((plus - mid) + (minus - mid)).cwiseAbs().maxCoeff() < 1e-9);

  // Two points: one sigma along the direction reaches an input.
  const Eigen::VectorXd reach = flatten(model, pc_deformation_attributed(model, 0, 1.0));
  const double to0 = (reach - mid - model.vectors.row(0).transpose()).norm();
  const double to1 = (reach - mid - model.vectors.row(1).transpose()).norm();
  CHECK(std::min(to0, to1) < 1e-6);
}

TEST_CASE("clustering") {
  Eigen::MatrixXd d = Eigen::MatrixXd::Constant(6, 6, 10.0);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      if (i == j || (i < 3) == (j < 3)) d(i, j) = 0.0;
  const ClusterReport r = cluster_distances(d);
  CHECK(r.k == 2);
  CHECK(r.labels[0] == r.labels[1]);
  CHECK(r.labels[1] == r.labels[2]);
  CHECK(r.labels[3] == r.labels[4]);
  CHECK(r.labels[0] != r.labels[3]);

  const Eigen::MatrixXd flat = Eigen::MatrixXd::Ones(5, 5) - Eigen::MatrixXd::Identity(5, 5);
  const ClusterReport f = cluster_distances(flat);
  CHECK(f.k == 2);
  CHECK(std::abs(f.silhouette) < 0.5);
  CHECK(cluster_distances(flat).labels == f.labels);

  Eigen::MatrixXd out = d;
  out.conservativeResize(7, 7);
  out.row(6).setConstant(10.0);
  out.col(6).setConstant(10.0);
  out.block(0, 6, 3, 1).setConstant(3.0);
  out.block(6, 0, 1, 3).setConstant(3.0);
  out(6, 6) = 0.0;
  const ClusterReport o = cluster_distances(out, 0.15);
  CHECK(o.labels[6] == -1);

  CHECK_THROWS_AS(cluster_distances(Eigen::MatrixXd::Zero(2, 2)), ArgumentError);
  Eigen::MatrixXd asym = flat;
  asym(0, 1) = 3.0;
  CHECK_THROWS_AS(cluster_distances(asym), ArgumentError);
}
