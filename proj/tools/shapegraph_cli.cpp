#include "shapegraph/errors.hpp"
#include "shapegraph/graph.hpp"
#include "shapegraph/io.hpp"
#include "shapegraph/multiscale.hpp"
#include "shapegraph/registration.hpp"
#include "shapegraph/render.hpp"
#include "shapegraph/statistics.hpp"
#include "shapegraph/synthetic.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace shapegraph;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitInput = 2;

// Everything a run depends on. Written to <out>/config.json and accepted back
// through --config, which fills every option not given on the command line.
struct RunConfig {
  std::string command;
  std::vector<std::string> inputs;
  std::string out = "out";
  double eta = 1.0;
  double lambda = 0.5;
  double e = 0.7;
  int samples = 30;
  std::uint64_t seed = 0;
  std::string weights = "length";
  int frames = 11;
  std::vector<double> levels;
  std::string target;
  std::string metric = "resistance";
  double tol = 1e-6;
  int max_iter = 10;
  double outlier_fraction = 0.0;
  size_t min_nodes = 0;
  std::vector<int> sizes{10, 20, 40, 80};
  int runs = 3;
};

ordered_json to_json(const RunConfig& c) {
  ordered_json j;
  j["command"] = c.command;
  j["inputs"] = c.inputs;
  j["out"] = c.out;
  j["eta"] = c.eta;
  j["lambda"] = c.lambda;
  j["e"] = c.e;
  j["samples"] = c.samples;
  j["seed"] = c.seed;
  j["weights"] = c.weights;
  if (c.command == "geodesic") j["frames"] = c.frames;
  if (c.command == "multiscale") {
    j["levels"] = c.levels;
    j["target"] = c.target;
    j["metric"] = c.metric;
  }
  if (c.command == "mean" || c.command == "pca") {
    j["tol"] = c.tol;
    j["max_iter"] = c.max_iter;
  }
  if (c.command == "cluster") j["outlier_fraction"] = c.outlier_fraction;
  if (c.command == "partition") j["min_nodes"] = c.min_nodes;
  if (c.command == "bench") {
    j["sizes"] = c.sizes;
    j["runs"] = c.runs;
  }
  return j;
}

RegistrationParams params_of(const RunConfig& c) {
  RegistrationParams p;
  p.eta = c.eta;
  p.lambda = c.lambda;
  p.e = c.e;
  p.samples = c.samples;
  p.seed = c.seed;
  p.weights = weight_policy_from_string(c.weights);
  check_params(p);
  return p;
}

std::vector<ShapeGraph> load_all(const std::vector<std::string>& paths) {
  std::vector<ShapeGraph> out;
  for (const auto& p : paths) out.push_back(load_graph(p));
  return out;
}

void need_inputs(const RunConfig& c, size_t lo, size_t hi) {
  if (c.inputs.size() < lo || c.inputs.size() > hi) {
    std::string want = lo == hi ? std::to_string(lo) : hi == SIZE_MAX ? "at least " + std::to_string(lo)
                                                                      : std::to_string(lo) + " to " + std::to_string(hi);
    throw ArgumentError(c.command + ": expected " + want + " input file(s), got " + std::to_string(c.inputs.size()));
  }
}

// Row/column labels for a list of inputs: file stems, made unique.
std::vector<std::string> labels_of(const std::vector<std::string>& paths) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (size_t i = 0; i < paths.size(); ++i) {
    std::string s = fs::path(paths[i]).stem().string();
    if (seen.count(s)) s = std::to_string(i) + ":" + s;
    seen.insert(s);
    out.push_back(s);
  }
  return out;
}

std::string dump(const ordered_json& j) { return j.dump(1) + "\n"; }

std::string fixed9(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", x);
  return buf;
}

int cmd_distance(const RunConfig& c, const fs::path& out) {
  need_inputs(c, 2, 2);
  const auto g = load_all(c.inputs);
  const Registration reg = register_pair(g[0], g[1], params_of(c));
  std::cout << fixed9(reg.distance) << "\n";
  write_text(out / "registration.json", format_registration(reg));
  return 0;
}

int cmd_geodesic(const RunConfig& c, const fs::path& out) {
  need_inputs(c, 2, 2);
  if (c.frames < 2) throw ArgumentError("geodesic: --frames must be at least 2");
  const auto g = load_all(c.inputs);
  const Registration reg = register_pair(g[0], g[1], params_of(c));
  const GraphGeodesic geo = graph_geodesic(reg, c.frames);
  Bounds view;
  for (const auto& f : geo.frames) view.include(bounds_of(f.graph));
  for (size_t k = 0; k < geo.frames.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%03zu.svg", k);
    write_text(out / name, render_svg(geo.frames[k].graph, view, geo.frames[k].opacity));
  }
  write_text(out / "registration.json", format_registration(reg));
  return 0;
}

int cmd_multiscale(const RunConfig& c, const fs::path& out) {
  need_inputs(c, 1, 1);
  const ShapeGraph g = load_graph(c.inputs[0]);
  const MetricKind kind = metric_kind_from_string(c.metric);
  const std::vector<double> levels = c.levels.empty() ? default_levels() : c.levels;
  const Dendrogram dend = build_dendrogram(internal_metric(g, kind).matrix);
  for (size_t k = 0; k < levels.size(); ++k) {
    CoarseGraph coarse = coarsen(g, dend, levels[k], c.samples);
    coarse.graph.metadata["file:h"] = format_number(levels[k]);
    for (size_t i = 0; i < g.nodes.size(); ++i)
      coarse.graph.metadata["cluster:" + g.nodes[i].id] = coarse.graph.nodes[coarse.assignment[i]].id;
    char stem[32];
    std::snprintf(stem, sizeof stem, "level_%02zu", k);
    save_graph(coarse.graph, out / (std::string(stem) + ".json"));
    write_text(out / (std::string(stem) + ".svg"), render_svg(coarse.graph));
  }
  if (!c.target.empty()) {
    const ShapeGraph target = load_graph(c.target);
    const ResolutionSelection sel = select_resolution(target, g, levels, params_of(c), kind);
    std::string csv = "h,d_graph\n";
    for (size_t k = 0; k < sel.levels.size(); ++k)
      csv += format_number(sel.levels[k]) + "," + format_number(sel.distances[k]) + "\n";
    write_text(out / "profile.csv", csv);
    ordered_json j;
    j["h"] = sel.h;
    j["nodes"] = sel.coarse.graph.nodes.size();
    j["d_graph"] = format_number(*std::min_element(sel.distances.begin(), sel.distances.end()));
    write_text(out / "selection.json", dump(j));
    std::cout << format_number(sel.h) << "\n";
  }
  return 0;
}

MeanResult run_mean(const RunConfig& c, const std::vector<ShapeGraph>& graphs) {
  MeanOptions opt;
  opt.tol = c.tol;
  opt.max_iter = c.max_iter;
  return karcher_mean_graphs(graphs, params_of(c), opt);
}

ordered_json trace_json(const MeanResult& m) {
  ordered_json t = ordered_json::array();
  for (double v : m.objective_trace) t.push_back(format_number(v));
  return t;
}

int cmd_mean(const RunConfig& c, const fs::path& out) {
  need_inputs(c, 1, SIZE_MAX);
  const auto graphs = load_all(c.inputs);
  const MeanResult m = run_mean(c, graphs);
  const ShapeGraph mean = m.mean_graph();
  save_graph(mean, out / "mean.json");
  write_text(out / "mean.svg", render_svg(mean));
  ordered_json j;
  j["template"] = c.inputs[largest_graph(graphs)];
  j["iterations"] = m.iterations;
  j["objective_trace"] = trace_json(m);
  ordered_json d = ordered_json::array();
  for (const auto& r : m.registrations) d.push_back(format_number(r.distance));
  j["distances"] = d;
  write_text(out / "mean_report.json", dump(j));
  return 0;
}

int cmd_pca(const RunConfig& c, const fs::path& out) {
  need_inputs(c, 1, SIZE_MAX);
  const auto graphs = load_all(c.inputs);
  const MeanResult m = run_mean(c, graphs);
  const TangentModel model = tangent_pca(m);
  ordered_json j;
  j["iterations"] = m.iterations;
  j["objective_trace"] = trace_json(m);
  ordered_json sv = ordered_json::array();
  for (Eigen::Index k = 0; k < model.singular_values.size(); ++k) sv.push_back(format_number(model.singular_values(k)));
  j["singular_values"] = sv;
  j["components"] = model.components();
  const auto labels = labels_of(c.inputs);
  ordered_json scores = ordered_json::object();
  for (Eigen::Index r = 0; r < model.scores.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index k = 0; k < model.scores.cols(); ++k) row.push_back(format_number(model.scores(r, k)));
    scores[labels[static_cast<size_t>(r)]] = row;
  }
  j["scores"] = scores;
  write_text(out / "pca.json", dump(j));
  save_graph(m.mean_graph(), out / "mean.json");

  const size_t shown = std::min<size_t>(3, model.components());
  for (size_t d = 0; d < shown; ++d) {
    std::vector<ShapeGraph> panels;
    std::vector<std::string> captions;
    for (int t = -2; t <= 2; ++t) {
      panels.push_back(pc_deformation(model, d, t));
      captions.push_back(std::to_string(t) + " sd");
    }
    write_text(out / ("pc" + std::to_string(d + 1) + ".svg"), render_panels_svg(panels, captions));
  }
  return 0;
}

int cmd_cluster(const RunConfig& c, const fs::path& out) {
  need_inputs(c, 3, SIZE_MAX);
  const auto graphs = load_all(c.inputs);
  const Eigen::MatrixXd d = pairwise_distances(graphs, params_of(c));
  const ClusterReport rep = cluster_distances(d, c.outlier_fraction);
  const auto labels = labels_of(c.inputs);
  write_text(out / "distances.csv", format_matrix_csv(labels, d));

  ordered_json j;
  j["k"] = rep.k;
  j["silhouette"] = format_number(rep.silhouette);
  ordered_json members = ordered_json::object();
  for (size_t i = 0; i < labels.size(); ++i) members[labels[i]] = rep.labels[i];
  j["labels"] = members;
  ordered_json modes = ordered_json::array();
  for (size_t m : rep.modes) modes.push_back(labels[m]);
  j["modes"] = modes;
  ordered_json by_k = ordered_json::array();
  for (const auto& [k, s] : rep.silhouette_by_k) by_k.push_back({k, format_number(s)});
  j["silhouette_by_k"] = by_k;
  write_text(out / "cluster.json", dump(j));

  // Heatmap rows grouped by cluster, outliers last.
  std::vector<size_t> order(labels.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto key = [&](size_t i) { return rep.labels[i] < 0 ? static_cast<int>(rep.k) : rep.labels[i]; };
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return key(a) < key(b); });
  write_text(out / "heatmap.svg", render_heatmap_svg(d, order, labels));
  return 0;
}

int cmd_partition(const RunConfig& c, const fs::path& out) {
  need_inputs(c, 1, 1);
  ShapeGraph g = load_graph(c.inputs[0]);
  if (c.min_nodes > 0) g = remove_small_components(g, c.min_nodes);
  const auto [a, b] = fiedler_bipartition(g);
  save_graph(a, out / "part_a.json");
  save_graph(b, out / "part_b.json");
  write_text(out / "part_a.svg", render_svg(a));
  write_text(out / "part_b.svg", render_svg(b));
  std::cout << a.nodes.size() << " " << b.nodes.size() << "\n";
  return 0;
}

// Timings go to timings.csv and stderr; everything that should not vary between
// runs (the generated inputs and the distances found) goes to bench_inputs.csv
// and stdout.
int cmd_bench(const RunConfig& c, const fs::path& out) {
  if (c.sizes.empty() || c.runs < 1) throw ArgumentError("bench: need at least one size and one run");
  const RegistrationParams params = params_of(c);
  std::string timings = "n,seconds\n";
  std::string inputs = "n,run,nodes,edges,d_graph\n";
  for (int n : c.sizes) {
    if (n < 1) throw ArgumentError("bench: sizes must be positive");
    std::vector<double> secs;
    for (int r = 0; r < c.runs; ++r) {
      std::mt19937_64 rng(c.seed * 1000003ULL + static_cast<std::uint64_t>(n) * 101ULL + static_cast<std::uint64_t>(r));
      const ShapeGraph g0 = random_graph(static_cast<size_t>(n), rng);
      PerturbOptions po;
      po.reorder = true;
      const ShapeGraph g1 = perturb(g0, rng, po).graph;
      const auto t0 = std::chrono::steady_clock::now();
      const Registration reg = register_pair(g0, g1, params);
      secs.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
      inputs += std::to_string(n) + "," + std::to_string(r) + "," + std::to_string(g0.nodes.size()) + "," +
                std::to_string(g0.edges.size()) + "," + format_number(reg.distance) + "\n";
    }
    std::sort(secs.begin(), secs.end());
    timings += std::to_string(n) + "," + format_number(secs[secs.size() / 2]) + "\n";
  }
  write_text(out / "timings.csv", timings);
  write_text(out / "bench_inputs.csv", inputs);
  std::cerr << timings;
  std::cout << inputs;
  return 0;
}

int cmd_validate(const RunConfig& c, const fs::path& out) {
  need_inputs(c, 1, SIZE_MAX);
  ordered_json report = ordered_json::object();
  bool clean = true;
  for (const auto& path : c.inputs) {
    ordered_json list = ordered_json::array();
    try {
      const ShapeGraph g = load_graph(path);
      for (const auto& v : validate(g)) list.push_back({{"code", v.code}, {"message", v.message}});
    } catch (const ParseError& e) {
      list.push_back({{"code", "parse"}, {"message", e.what()}});
    } catch (const DataError& e) {
      list.push_back({{"code", "data"}, {"message", e.what()}});
    }
    for (const auto& v : list)
      std::cerr << path << ": " << v["code"].get<std::string>() << ": " << v["message"].get<std::string>() << "\n";
    if (!list.empty()) clean = false;
    report[path] = list;
  }
  write_text(out / "validation.json", dump(report));
  std::cout << (clean ? "ok" : "invalid") << "\n";
  return clean ? 0 : kExitInput;
}

template <class T>
void fill(const nlohmann::json& j, const char* key, CLI::Option* opt, T& var) {
  if (opt && opt->count() > 0) return;
  if (j.contains(key)) var = j.at(key).get<T>();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Elastic shape analysis of shape graphs"};
  app.require_subcommand(0, 1);
  RunConfig c;
  std::string config_path;

  auto* o_eta = app.add_option("--eta", c.eta, "Weight-change penalty in d_eta")->capture_default_str();
  auto* o_lambda = app.add_option("--lambda", c.lambda, "Edge versus node balance")->capture_default_str();
  auto* o_e = app.add_option("--e", c.e, "Null-node cost as a multiple of the mean node distance")->capture_default_str();
  auto* o_samples = app.add_option("--samples", c.samples, "Samples per edge curve")->capture_default_str();
  auto* o_seed = app.add_option("--seed", c.seed, "Random seed")->capture_default_str();
  auto* o_weights = app.add_option("--weights", c.weights, "Weight policy for unweighted edges")
                        ->check(CLI::IsMember({"binary", "length"}))
                        ->capture_default_str();
  auto* o_out = app.add_option("--out", c.out, "Output directory")->capture_default_str();
  app.add_option("--config", config_path, "Run configuration written by an earlier run");

  struct Sub {
    CLI::App* app;
    CLI::Option* inputs;
  };
  std::vector<Sub> subs;
  auto sub = [&](const char* name, const char* help) {
    CLI::App* s = app.add_subcommand(name, help);
    s->fallthrough();
    subs.push_back({s, s->add_option("inputs", c.inputs, "Input graph files")});
    return s;
  };

  sub("distance", "Print d_graph between two graphs and write the registration");
  auto* geo = sub("geodesic", "Render frames along the geodesic between two graphs");
  auto* o_frames = geo->add_option("--frames", c.frames, "Number of frames")->capture_default_str();
  auto* ms = sub("multiscale", "Coarsen a graph over a grid of resolutions");
  auto* o_levels = ms->add_option("--levels", c.levels, "Resolution fractions in (0, 1]")->delimiter(',');
  auto* o_target = ms->add_option("--target", c.target, "Graph to select the best resolution against");
  auto* o_metric = ms->add_option("--metric", c.metric, "Internal node metric")
                       ->check(CLI::IsMember({"euclidean", "geodesic", "resistance"}))
                       ->capture_default_str();
  CLI::Option* o_tol = nullptr;
  CLI::Option* o_iter = nullptr;
  for (const char* name : {"mean", "pca"}) {
    auto* s = sub(name, std::string(name) == "mean" ? "Karcher mean of a population" : "Tangent PCA of a population");
    auto* t = s->add_option("--tol", c.tol, "Relative objective tolerance")->capture_default_str();
    auto* it = s->add_option("--max-iter", c.max_iter, "Iteration limit")->capture_default_str();
    if (!o_tol) {
      o_tol = t;
      o_iter = it;
    }
  }
  auto* cl = sub("cluster", "Cluster a population by pairwise d_graph");
  auto* o_outlier = cl->add_option("--outlier-fraction", c.outlier_fraction, "Fraction flagged as outliers")
                        ->capture_default_str();
  auto* pa = sub("partition", "Split a graph in two by its Fiedler vector");
  auto* o_min = pa->add_option("--min-nodes", c.min_nodes, "Drop components smaller than this first")
                    ->capture_default_str();
  auto* be = sub("bench", "Time register_pair on synthetic graphs");
  auto* o_sizes = be->add_option("--sizes", c.sizes, "Node counts")->delimiter(',');
  auto* o_runs = be->add_option("--runs", c.runs, "Runs per size")->capture_default_str();
  sub("validate", "Check graph files for structural problems");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    CLI::Option* o_inputs = nullptr;
    for (const auto& s : subs)
      if (s.app->parsed()) {
        c.command = s.app->get_name();
        o_inputs = s.inputs;
      }
    // mean and pca each own a --tol and --max-iter; use the pair that was parsed.
    for (const auto& s : subs)
      if (s.app->parsed()) {
        if (auto* t = s.app->get_option_no_throw("--tol")) o_tol = t;
        if (auto* it = s.app->get_option_no_throw("--max-iter")) o_iter = it;
      }

    if (!config_path.empty()) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(read_text(config_path));
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(config_path + ": " + e.what());
      }
      if (!j.is_object()) throw ParseError(config_path + ": expected a JSON object");
      try {
        if (c.command.empty()) {
          c.command = j.value("command", "");
        } else if (j.contains("command") && j.at("command") != c.command) {
          throw ArgumentError("config is for '" + j.at("command").get<std::string>() + "', not '" + c.command + "'");
        }
        fill(j, "inputs", o_inputs, c.inputs);
        fill(j, "out", o_out, c.out);
        fill(j, "eta", o_eta, c.eta);
        fill(j, "lambda", o_lambda, c.lambda);
        fill(j, "e", o_e, c.e);
        fill(j, "samples", o_samples, c.samples);
        fill(j, "seed", o_seed, c.seed);
        fill(j, "weights", o_weights, c.weights);
        fill(j, "frames", o_frames, c.frames);
        fill(j, "levels", o_levels, c.levels);
        fill(j, "target", o_target, c.target);
        fill(j, "metric", o_metric, c.metric);
        fill(j, "tol", o_tol, c.tol);
        fill(j, "max_iter", o_iter, c.max_iter);
        fill(j, "outlier_fraction", o_outlier, c.outlier_fraction);
        fill(j, "min_nodes", o_min, c.min_nodes);
        fill(j, "sizes", o_sizes, c.sizes);
        fill(j, "runs", o_runs, c.runs);
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(config_path + ": " + e.what());
      }
    }
    if (c.command.empty()) {
      std::cerr << app.help();
      return kExitInput;
    }
    if (c.weights != "binary" && c.weights != "length") throw ArgumentError("unknown weight policy '" + c.weights + "'");

    params_of(c);
    const fs::path out = c.out;
    fs::create_directories(out);
    write_text(out / "config.json", dump(to_json(c)));

    if (c.command == "distance") return cmd_distance(c, out);
    if (c.command == "geodesic") return cmd_geodesic(c, out);
    if (c.command == "multiscale") return cmd_multiscale(c, out);
    if (c.command == "mean") return cmd_mean(c, out);
    if (c.command == "pca") return cmd_pca(c, out);
    if (c.command == "cluster") return cmd_cluster(c, out);
    if (c.command == "partition") return cmd_partition(c, out);
    if (c.command == "bench") return cmd_bench(c, out);
    if (c.command == "validate") return cmd_validate(c, out);
    throw ArgumentError("unknown command '" + c.command + "'");
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}
