#include "shapegraph/curves.hpp"
#include "shapegraph/errors.hpp"
#include "shapegraph/graph.hpp"
#include "shapegraph/io.hpp"
#include "shapegraph/multiscale.hpp"
#include "shapegraph/registration.hpp"
#include "shapegraph/render.hpp"
#include "shapegraph/statistics.hpp"
#include "shapegraph/weighted_shape.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace shapegraph;

namespace {

RegistrationParams make_params(double lambda, double eta, double e, int samples, std::uint64_t seed,
                               const std::string& weights) {
  RegistrationParams p;
  p.lambda = lambda;
  p.eta = eta;
  p.e = e;
  p.samples = samples;
  p.seed = seed;
  p.weights = weight_policy_from_string(weights);
  return p;
}

#define PARAM_ARGS                                                                                       \
  py::arg("lambda_") = 0.5, py::arg("eta") = 1.0, py::arg("e") = 0.7, py::arg("samples") = 30,            \
      py::arg("seed") = 0, py::arg("weights") = "length"

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Elastic shape analysis of planar shape graphs";

  py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
  py::register_exception<DegenerateInputError>(m, "DegenerateInputError", PyExc_ValueError);
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
  py::register_exception<SizeError>(m, "SizeError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);

  // Curves are passed as 2 x n arrays.
  m.def("resample", [](const Eigen::Matrix2Xd& c, int n) { return resample(PlanarCurve(c), n).points; },
        py::arg("curve"), py::arg("samples"));
  m.def("arc_length", [](const Eigen::Matrix2Xd& c) { return arc_length(PlanarCurve(c)); }, py::arg("curve"));
  m.def("to_srvf", [](const Eigen::Matrix2Xd& c) { return to_srvf(PlanarCurve(c)).values; }, py::arg("curve"));
  m.def("d_srv", [](const Eigen::Matrix2Xd& q0, const Eigen::Matrix2Xd& q1) { return d_srv(SrvCurve(q0), SrvCurve(q1)); },
        py::arg("q0"), py::arg("q1"));
  m.def(
      "curve_distance",
      [](const Eigen::Matrix2Xd& a, const Eigen::Matrix2Xd& b, int samples) {
        return d_srv(to_srvf(resample(PlanarCurve(a), samples)), to_srvf(resample(PlanarCurve(b), samples)));
      },
      py::arg("a"), py::arg("b"), py::arg("samples") = 100);
  m.def(
      "d_eta",
      [](const Eigen::Matrix2Xd& q0, double w0, const Eigen::Matrix2Xd& q1, double w1, double eta) {
        return d_eta(WeightedShape{SrvCurve(q0), w0}, WeightedShape{SrvCurve(q1), w1}, eta);
      },
      py::arg("q0"), py::arg("w0"), py::arg("q1"), py::arg("w1"), py::arg("eta") = 1.0);

  py::class_<ShapeGraph>(m, "ShapeGraph")
      .def_property_readonly("node_ids",
                             [](const ShapeGraph& g) {
                               std::vector<std::string> ids;
                               for (const auto& n : g.nodes) ids.push_back(n.id);
                               return ids;
                             })
      .def_property_readonly("positions",
                             [](const ShapeGraph& g) {
                               std::vector<std::optional<std::pair<double, double>>> out;
                               for (const auto& n : g.nodes)
                                 out.push_back(n.position ? std::optional(std::pair(n.position->x(), n.position->y()))
                                                          : std::nullopt);
                               return out;
                             })
      .def_property_readonly("edges",
                             [](const ShapeGraph& g) {
                               std::vector<std::pair<std::string, std::string>> out;
                               for (const auto& e : g.edges) out.emplace_back(e.u, e.v);
                               return out;
                             })
      .def("curve", [](const ShapeGraph& g, size_t k) { return g.edges.at(k).curve.points; }, py::arg("edge"))
      .def_property_readonly("total_edge_length", &ShapeGraph::total_edge_length)
      .def("to_json", [](const ShapeGraph& g) { return format_graph(g); })
      .def("to_svg", [](const ShapeGraph& g) { return render_svg(g); })
      .def("__len__", [](const ShapeGraph& g) { return g.nodes.size(); });

  m.def("load_graph", &load_graph, py::arg("path"));
  m.def("save_graph", &save_graph, py::arg("graph"), py::arg("path"));
  m.def("parse_graph", [](const std::string& text) { return parse_graph(text); }, py::arg("text"));
  m.def(
      "validate",
      [](const ShapeGraph& g) {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& v : validate(g)) out.emplace_back(v.code, v.message);
        return out;
      },
      py::arg("graph"));

  py::class_<Registration>(m, "Registration")
      .def_readonly("permutation", &Registration::permutation)
      .def_readonly("distance", &Registration::distance)
      .def_readonly("objective", &Registration::objective)
      .def_readonly("mean_distance", &Registration::mean_distance)
      .def("to_json", [](const Registration& r) { return format_registration(r); })
      .def(
          "geodesic",
          [](const Registration& r, int frames) {
            std::vector<ShapeGraph> out;
            for (auto& f : graph_geodesic(r, frames).frames) out.push_back(std::move(f.graph));
            return out;
          },
          py::arg("frames") = 5);

  m.def(
      "register_pair",
      [](const ShapeGraph& a, const ShapeGraph& b, double lambda, double eta, double e, int samples,
         std::uint64_t seed, const std::string& weights) {
        py::gil_scoped_release release;
        return register_pair(a, b, make_params(lambda, eta, e, samples, seed, weights));
      },
      py::arg("g0"), py::arg("g1"), PARAM_ARGS);
  m.def(
      "d_graph",
      [](const ShapeGraph& a, const ShapeGraph& b, double lambda, double eta, double e, int samples,
         std::uint64_t seed, const std::string& weights) {
        py::gil_scoped_release release;
        return register_pair(a, b, make_params(lambda, eta, e, samples, seed, weights)).distance;
      },
      py::arg("g0"), py::arg("g1"), PARAM_ARGS);

  m.def(
      "pairwise_distances",
      [](const std::vector<ShapeGraph>& gs, double lambda, double eta, double e, int samples, std::uint64_t seed,
         const std::string& weights) {
        py::gil_scoped_release release;
        return pairwise_distances(gs, make_params(lambda, eta, e, samples, seed, weights));
      },
      py::arg("graphs"), PARAM_ARGS);

  py::class_<MeanResult>(m, "MeanResult")
      .def_readonly("objective_trace", &MeanResult::objective_trace)
      .def_readonly("iterations", &MeanResult::iterations)
      .def_property_readonly("mean", &MeanResult::mean_graph);
  m.def(
      "karcher_mean",
      [](const std::vector<ShapeGraph>& gs, int max_iter, double tol, double lambda, double eta, double e,
         int samples, std::uint64_t seed, const std::string& weights) {
        py::gil_scoped_release release;
        MeanOptions opt;
        opt.max_iter = max_iter;
        opt.tol = tol;
        return karcher_mean_graphs(gs, make_params(lambda, eta, e, samples, seed, weights), opt);
      },
      py::arg("graphs"), py::arg("max_iter") = 10, py::arg("tol") = 1e-6, PARAM_ARGS);

  py::class_<TangentModel>(m, "TangentModel")
      .def_readonly("singular_values", &TangentModel::singular_values)
      .def_readonly("scores", &TangentModel::scores)
      .def_property_readonly("components", &TangentModel::components)
      .def("deformation", &pc_deformation, py::arg("direction"), py::arg("t"));
  m.def("tangent_pca", &tangent_pca, py::arg("mean"));

  py::class_<ClusterReport>(m, "ClusterReport")
      .def_readonly("labels", &ClusterReport::labels)
      .def_readonly("modes", &ClusterReport::modes)
      .def_readonly("k", &ClusterReport::k)
      .def_readonly("silhouette", &ClusterReport::silhouette);
  m.def("cluster", &cluster_distances, py::arg("distances"), py::arg("outlier_fraction") = 0.0);

  m.def(
      "internal_metric",
      [](const ShapeGraph& g, const std::string& kind) { return internal_metric(g, metric_kind_from_string(kind)).matrix; },
      py::arg("graph"), py::arg("kind") = "resistance");
  m.def(
      "coarsen",
      [](const ShapeGraph& g, double h, const std::string& kind, int samples) {
        const Dendrogram d = build_dendrogram(internal_metric(g, metric_kind_from_string(kind)).matrix);
        return coarsen(g, d, h, samples).graph;
      },
      py::arg("graph"), py::arg("h"), py::arg("kind") = "resistance", py::arg("samples") = 30);
  m.def("fiedler_bipartition", &fiedler_bipartition, py::arg("graph"));
}
