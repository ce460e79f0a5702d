#include "shapegraph/statistics.hpp"

#include "parallel.hpp"
#include "shapegraph/errors.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace shapegraph {

Eigen::MatrixXd pairwise_distances(std::span<const ShapeGraph> graphs, const RegistrationParams& params) {
  check_params(params);
  const size_t m = graphs.size();
  if (m < 2) throw ArgumentError("pairwise_distances: need at least 2 graphs");
  std::vector<AttributedGraph> g;
  for (const auto& x : graphs) g.push_back(to_attributed(x, params.samples, params.weights));

  std::vector<std::pair<size_t, size_t>> jobs;
  for (size_t i = 0; i < m; ++i)
    for (size_t j = i + 1; j < m; ++j) jobs.emplace_back(i, j);
  std::vector<double> values(jobs.size());
  detail::parallel_for(jobs.size(), [&](size_t t) {
    const auto [i, j] = jobs[t];
    const double forward = register_attributed(g[i], g[j], params).distance;
    const double backward = register_attributed(g[j], g[i], params).distance;
    values[t] = 0.5 * (forward + backward);
  });

  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (size_t t = 0; t < jobs.size(); ++t) {
    const auto i = static_cast<Eigen::Index>(jobs[t].first);
    const auto j = static_cast<Eigen::Index>(jobs[t].second);
    d(i, j) = d(j, i) = values[t];
  }
  return d;
}

size_t largest_graph(std::span<const ShapeGraph> graphs) {
  if (graphs.empty()) throw ArgumentError("largest_graph: empty input");
  size_t best = 0;
  for (size_t i = 1; i < graphs.size(); ++i) {
    const size_t n = graphs[i].real_node_count();
    const size_t nb = graphs[best].real_node_count();
    if (n > nb || (n == nb && graphs[i].edges.size() > graphs[best].edges.size())) best = i;
  }
  return best;
}

AttributedGraph matched_graph(const Registration& reg, const AttributedGraph& templ) {
  const size_t n = templ.size();
  if (reg.first.size() < n) throw ArgumentError("matched_graph: registration does not cover the template");
  const auto& perm = reg.permutation;
  AttributedGraph out;
  out.samples = templ.samples;
  out.ids = templ.ids;
  for (size_t a = 0; a < n; ++a) out.positions.push_back(reg.second.positions[perm[a]]);
  for (size_t a = 0; a < n; ++a)
    for (size_t b = a + 1; b < n; ++b) {
      WeightedShape ws = reg.second.edge(perm[a], perm[b]);
      if (ws.is_null()) continue;
      if (const WeightedShape* t = templ.find(a, b)) ws.shape = register_curve(t->shape, ws.shape).registered;
      out.set_edge(a, b, std::move(ws));
    }
  return out;
}

namespace {

// Average of graphs on the template node set: missing edges count as the null
// shape with weight zero; positions average over the graphs that have one.
AttributedGraph average(const AttributedGraph& templ, const std::vector<AttributedGraph>& matched) {
  const size_t n = templ.size();
  const double m = static_cast<double>(matched.size());
  AttributedGraph out;
  out.samples = templ.samples;
  out.ids = templ.ids;
  for (size_t a = 0; a < n; ++a) {
    Point sum = Point::Zero();
    int count = 0;
    for (const auto& g : matched)
      if (g.positions[a]) {
        sum += *g.positions[a];
        ++count;
      }
    out.positions.push_back(count ? std::optional<Point>(sum / count) : templ.positions[a]);
  }
  std::set<std::pair<size_t, size_t>> keys;
  for (const auto& g : matched)
    for (const auto& [key, ws] : g.edges) keys.insert(key);
  for (const auto& key : keys) {
    Eigen::Matrix2Xd q = Eigen::Matrix2Xd::Zero(2, templ.samples);
    double w = 0.0;
    for (const auto& g : matched)
      if (const WeightedShape* ws = g.find(key.first, key.second)) {
        q += ws->shape.values;
        w += ws->weight;
      }
    if (w > 0.0) out.set_edge(key.first, key.second, {SrvCurve(q / m), w / m});
  }
  return out;
}

bool same_attributed(const AttributedGraph& a, const AttributedGraph& b, double tol) {
  if (a.size() != b.size() || a.edges.size() != b.edges.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a.positions[i].has_value() != b.positions[i].has_value()) return false;
    if (a.positions[i] && (*a.positions[i] - *b.positions[i]).cwiseAbs().maxCoeff() > tol) return false;
  }
  for (const auto& [key, ws] : a.edges) {
    const WeightedShape* other = b.find(key.first, key.second);
    if (!other || std::abs(ws.weight - other->weight) > tol) return false;
    if ((ws.shape.values - other->shape.values).cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

}  // namespace

MeanResult karcher_mean_graphs(std::span<const ShapeGraph> graphs, const RegistrationParams& params,
                               const MeanOptions& options) {
  if (graphs.empty()) throw ArgumentError("karcher_mean_graphs: empty input");
  check_params(params);
  size_t init = options.init == MeanInit::kLargest ? largest_graph(graphs) : options.init_index;
  if (init >= graphs.size()) throw ArgumentError("karcher_mean_graphs: init index out of range");

  std::vector<AttributedGraph> inputs;
  for (const auto& g : graphs) inputs.push_back(to_attributed(g, params.samples, params.weights));
  const size_t m = inputs.size();

  auto register_all = [&](const AttributedGraph& mean, const std::vector<Registration>* previous) {
    std::vector<Registration> regs(m);
    detail::parallel_for(m, [&](size_t i) {
      std::vector<std::vector<size_t>> warm;
      if (previous) warm.push_back((*previous)[i].permutation);
      regs[i] = register_attributed(mean, inputs[i], params, warm);
    });
    return regs;
  };
  auto matched_all = [&](const AttributedGraph& mean, const std::vector<Registration>& regs) {
    std::vector<AttributedGraph> out(m);
    detail::parallel_for(m, [&](size_t i) { out[i] = matched_graph(regs[i], mean); });
    return out;
  };

  MeanResult out;
  out.params = params;
  out.mean = inputs[init];
  out.registrations = register_all(out.mean, nullptr);
  out.matched = matched_all(out.mean, out.registrations);
  double objective = 0.0;
  for (const auto& r : out.registrations) objective += r.distance * r.distance;
  out.objective_trace.push_back(objective);

  std::vector<Registration> regs = out.registrations;
  std::vector<AttributedGraph> matched = out.matched;
  for (int it = 0; it < options.max_iter; ++it) {
    AttributedGraph next = average(out.mean, matched);

    // Objective of the new mean at the permutations that produced it.
    std::vector<Registration> moved = regs;
    detail::parallel_for(m, [&](size_t i) {
      moved[i].first = pad(next, inputs[i].size());
      moved[i].distance = d_graph_padded(moved[i].first, moved[i].second, moved[i].permutation, params);
    });
    double value = 0.0;
    for (const auto& r : moved) value += r.distance * r.distance;
    const double previous = out.objective_trace.back();
    if (value > previous * (1.0 + 1e-6)) break;

    out.mean = std::move(next);
    out.registrations = std::move(moved);
    out.matched = std::move(matched);
    out.objective_trace.push_back(value);
    out.iterations = it + 1;
    if (std::abs(previous - value) <= options.tol * previous || value == 0.0) break;
    if (it + 1 == options.max_iter) break;

    regs = register_all(out.mean, &out.registrations);
    matched = matched_all(out.mean, regs);
  }
  if (same_attributed(out.mean, inputs[init], 1e-12)) out.source = graphs[init];
  return out;
}

namespace {

size_t layout_size(const TangentModel& model) {
  const auto s = static_cast<size_t>(model.mean.samples);
  return model.pairs.size() * (2 * s + 1) + 2 * model.mean.size();
}

}  // namespace

Eigen::VectorXd flatten(const TangentModel& model, const AttributedGraph& g) {
  const size_t n = model.mean.size();
  if (g.size() != n) throw ArgumentError("flatten: graph is not on the template node set");
  const auto s = static_cast<Eigen::Index>(model.mean.samples);
  const double edge_scale = std::sqrt(model.lambda);
  const double node_scale = std::sqrt(1.0 - model.lambda);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout_size(model)));
  const auto pairs = static_cast<Eigen::Index>(model.pairs.size());
  for (Eigen::Index p = 0; p < pairs; ++p) {
    const auto [a, b] = model.pairs[static_cast<size_t>(p)];
    if (const WeightedShape* ws = g.find(a, b)) {
      x.segment(p * 2 * s, 2 * s) = edge_scale * ws->shape.values.reshaped();
      x(pairs * 2 * s + p) = edge_scale * ws->weight;
    }
  }
  const Eigen::Index base = pairs * (2 * s + 1);
  for (size_t a = 0; a < n; ++a) {
    const auto& pos = g.positions[a] ? g.positions[a] : model.mean.positions[a];
    if (pos) x.segment(base + 2 * static_cast<Eigen::Index>(a), 2) = node_scale * *pos;
  }
  return x;
}

AttributedGraph unflatten(const TangentModel& model, const Eigen::VectorXd& x) {
  if (x.size() != static_cast<Eigen::Index>(layout_size(model))) throw ArgumentError("unflatten: wrong vector length");
  const size_t n = model.mean.size();
  const auto s = static_cast<Eigen::Index>(model.mean.samples);
  const double edge_scale = std::sqrt(model.lambda);
  const double node_scale = std::sqrt(1.0 - model.lambda);
  AttributedGraph out;
  out.samples = model.mean.samples;
  out.ids = model.mean.ids;
  const auto pairs = static_cast<Eigen::Index>(model.pairs.size());
  const Eigen::Index base = pairs * (2 * s + 1);
  for (size_t a = 0; a < n; ++a) {
    if (node_scale > 0.0 && model.mean.positions[a])
      out.positions.emplace_back(Point(x.segment(base + 2 * static_cast<Eigen::Index>(a), 2) / node_scale));
    else
      out.positions.push_back(model.mean.positions[a]);
  }
  for (Eigen::Index p = 0; p < pairs; ++p) {
    const auto [a, b] = model.pairs[static_cast<size_t>(p)];
    if (edge_scale == 0.0) {
      if (const WeightedShape* ws = model.mean.find(a, b)) out.set_edge(a, b, *ws);
      continue;
    }
    const double w = std::max(0.0, x(pairs * 2 * s + p) / edge_scale);
    if (w <= 0.0) continue;
    Eigen::Matrix2Xd q = x.segment(p * 2 * s, 2 * s).reshaped(2, s) / edge_scale;
    out.set_edge(a, b, {SrvCurve(std::move(q)), w});
  }
  return out;
}

TangentModel tangent_pca(const MeanResult& result) {
  const size_t m = result.matched.size();
  if (m == 0) throw ArgumentError("tangent_pca: no registered inputs");
  TangentModel model;
  model.mean = result.mean;
  model.lambda = result.params.lambda;
  std::set<std::pair<size_t, size_t>> keys;
  for (const auto& [key, ws] : result.mean.edges) keys.insert(key);
  for (const auto& g : result.matched)
    for (const auto& [key, ws] : g.edges) keys.insert(key);
  model.pairs.assign(keys.begin(), keys.end());

  const Eigen::VectorXd origin = flatten(model, model.mean);
  model.vectors.resize(static_cast<Eigen::Index>(m), origin.size());
  for (size_t i = 0; i < m; ++i)
    model.vectors.row(static_cast<Eigen::Index>(i)) = (flatten(model, result.matched[i]) - origin).transpose();
  model.center = model.vectors.colwise().mean().transpose();
  const Eigen::MatrixXd centered = model.vectors.rowwise() - model.center.transpose();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  model.singular_values = svd.singularValues() / std::sqrt(static_cast<double>(m));
  Eigen::Index keep = 0;
  while (keep < model.singular_values.size() && model.singular_values(keep) > kSingularTolerance) ++keep;
  model.directions = svd.matrixV().leftCols(keep);
  for (Eigen::Index c = 0; c < keep; ++c) {
    Eigen::Index arg;
    model.directions.col(c).cwiseAbs().maxCoeff(&arg);
    if (model.directions(arg, c) < 0.0) model.directions.col(c) *= -1.0;
  }
  model.scores = centered * model.directions;
  return model;
}

AttributedGraph pc_deformation_attributed(const TangentModel& model, size_t direction, double t) {
  if (direction >= model.components())
    throw ArgumentError("pc_deformation: direction " + std::to_string(direction) + " out of range (" +
                        std::to_string(model.components()) + " components)");
  if (t == 0.0) return model.mean;
  const auto d = static_cast<Eigen::Index>(direction);
  const Eigen::VectorXd x = flatten(model, model.mean) + t * model.singular_values(d) * model.directions.col(d);
  return unflatten(model, x);
}

ShapeGraph pc_deformation(const TangentModel& model, size_t direction, double t) {
  return to_shape_graph(pc_deformation_attributed(model, direction, t));
}

namespace {

struct Partition {
  std::vector<size_t> medoids;  // sorted
  std::vector<size_t> labels;
  double cost = 0.0;
};

Partition assign(const Eigen::MatrixXd& d, std::vector<size_t> medoids) {
  std::sort(medoids.begin(), medoids.end());
  Partition p;
  p.medoids = std::move(medoids);
  const auto m = static_cast<size_t>(d.rows());
  p.labels.resize(m);
  for (size_t i = 0; i < m; ++i) {
    size_t best = 0;
    for (size_t c = 1; c < p.medoids.size(); ++c)
      if (d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p.medoids[c])) <
          d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p.medoids[best])))
        best = c;
    p.labels[i] = best;
    p.cost += d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p.medoids[best]));
  }
  return p;
}

double cost_of(const Eigen::MatrixXd& d, const std::vector<size_t>& medoids) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (size_t c : medoids) best = std::min(best, d(i, static_cast<Eigen::Index>(c)));
    total += best;
  }
  return total;
}

Partition k_medoids(const Eigen::MatrixXd& d, size_t k) {
  const auto m = static_cast<size_t>(d.rows());
  std::vector<size_t> medoids;
  std::vector<char> is_medoid(m, 0);
  while (medoids.size() < k) {
    size_t best = m;
    double best_cost = std::numeric_limits<double>::infinity();
    for (size_t c = 0; c < m; ++c) {
      if (is_medoid[c]) continue;
      medoids.push_back(c);
      const double cost = cost_of(d, medoids);
      medoids.pop_back();
      if (cost < best_cost) {
        best_cost = cost;
        best = c;
      }
    }
    medoids.push_back(best);
    is_medoid[best] = 1;
  }

  double current = cost_of(d, medoids);
  const double scale = std::max(current, std::numeric_limits<double>::min());
  for (bool improved = true; improved;) {
    improved = false;
    for (size_t slot = 0; slot < k; ++slot)
      for (size_t c = 0; c < m; ++c) {
        if (is_medoid[c]) continue;
        std::vector<size_t> trial = medoids;
        trial[slot] = c;
        const double cost = cost_of(d, trial);
        if (cost < current - 1e-12 * scale) {
          is_medoid[medoids[slot]] = 0;
          is_medoid[c] = 1;
          medoids = std::move(trial);
          current = cost;
          improved = true;
        }
      }
  }
  return assign(d, medoids);
}

double mean_silhouette(const Eigen::MatrixXd& d, const Partition& p) {
  const auto m = static_cast<size_t>(d.rows());
  const size_t k = p.medoids.size();
  double total = 0.0;
  for (size_t i = 0; i < m; ++i) {
    std::vector<double> sum(k, 0.0);
    std::vector<size_t> count(k, 0);
    for (size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      sum[p.labels[j]] += d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      ++count[p.labels[j]];
    }
    const size_t own = p.labels[i];
    if (count[own] == 0) continue;  // singleton: silhouette 0
    const double a = sum[own] / static_cast<double>(count[own]);
    double b = std::numeric_limits<double>::infinity();
    for (size_t c = 0; c < k; ++c)
      if (c != own && count[c] > 0) b = std::min(b, sum[c] / static_cast<double>(count[c]));
    const double denom = std::max(a, b);
    if (std::isfinite(b) && denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(m);
}

}  // namespace

ClusterReport cluster_distances(const Eigen::MatrixXd& distances, double outlier_fraction) {
  const auto m = static_cast<size_t>(distances.rows());
  if (distances.rows() != distances.cols()) throw ArgumentError("cluster_distances: matrix must be square");
  if (m < 3) throw ArgumentError("cluster_distances: need at least 3 items");
  if (!(outlier_fraction >= 0.0 && outlier_fraction < 0.5))
    throw ArgumentError("cluster_distances: outlier fraction must lie in [0, 0.5)");
  if (!distances.allFinite() || (distances.array() < 0.0).any())
    throw ArgumentError("cluster_distances: entries must be finite and nonnegative");
  const double scale = std::max(1.0, distances.cwiseAbs().maxCoeff());
  if ((distances - distances.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale || distances.diagonal().cwiseAbs().maxCoeff() > 0.0)
    throw ArgumentError("cluster_distances: matrix must be symmetric with zero diagonal");

  ClusterReport report;
  Partition best;
  double best_score = -std::numeric_limits<double>::infinity();
  const size_t k_max = std::min<size_t>(8, m - 1);
  for (size_t k = 2; k <= k_max; ++k) {
    Partition p = k_medoids(distances, k);
    const double s = mean_silhouette(distances, p);
    report.silhouette_by_k.emplace_back(k, s);
    if (s > best_score) {
      best_score = s;
      best = std::move(p);
    }
  }
  report.k = best.medoids.size();
  report.silhouette = best_score;
  report.modes = best.medoids;
  report.labels.assign(best.labels.begin(), best.labels.end());

  if (outlier_fraction > 0.0) {
    std::vector<double> to_medoid(m);
    for (size_t i = 0; i < m; ++i)
      to_medoid[i] = distances(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(best.medoids[best.labels[i]]));
    std::vector<double> sorted = to_medoid;
    std::sort(sorted.begin(), sorted.end());
    const auto rank = static_cast<size_t>(std::ceil((1.0 - outlier_fraction) * static_cast<double>(m)));
    const double threshold = sorted[std::clamp<size_t>(rank, 1, m) - 1];
    for (size_t i = 0; i < m; ++i)
      if (to_medoid[i] > threshold) report.labels[i] = -1;
  }
  return report;
}

}  // namespace shapegraph
