#include "shapegraph/render.hpp"

#include "shapegraph/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace shapegraph {

void Bounds::include(const Point& p) {
  if (empty) {
    lo = hi = p;
    empty = false;
    return;
  }
  lo = lo.cwiseMin(p);
  hi = hi.cwiseMax(p);
}

void Bounds::include(const Bounds& other) {
  if (other.empty) return;
  include(other.lo);
  include(other.hi);
}

Bounds bounds_of(const ShapeGraph& g) {
  Bounds b;
  for (const auto& n : g.nodes)
    if (n.position) b.include(*n.position);
  for (const auto& e : g.edges)
    for (Eigen::Index s = 0; s < e.curve.size(); ++s) b.include(Point(e.curve.points.col(s)));
  return b;
}

namespace {

constexpr double kCanvasWidth = 800.0;

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", x);
  std::string s = buf;
  if (s == "-0.000") s = "0.000";
  return s;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_svg(const ShapeGraph& g, const Bounds& view, std::span<const double> opacity) {
  if (!opacity.empty() && opacity.size() != g.edges.size())
    throw ArgumentError("render_svg: one opacity value per edge is required");
  Bounds box = view;
  if (box.empty) box.include(Point(0.0, 0.0));
  Point span = box.hi - box.lo;
  for (int c = 0; c < 2; ++c)
    if (span(c) <= 0.0) span(c) = std::max(1.0, span.maxCoeff());
  const Point lo = box.lo - 0.1 * span;
  const Point size = 1.2 * span;
  const double scale = kCanvasWidth / size.x();
  const double height = size.y() * scale;
  const double radius = 0.01 * span.norm() * scale;
  auto px = [&](const Point& p) { return fmt((p.x() - lo.x()) * scale) + "," + fmt((lo.y() + size.y() - p.y()) * scale); };

  double max_weight = 0.0;
  for (const auto& e : g.edges)
    if (e.weight) max_weight = std::max(max_weight, *e.weight);

  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kCanvasWidth) + "\" height=\"" +
                    fmt(height) + "\" viewBox=\"0 0 " + fmt(kCanvasWidth) + " " + fmt(height) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (size_t k = 0; k < g.edges.size(); ++k) {
    const auto& e = g.edges[k];
    double alpha = 1.0;
    if (!opacity.empty())
      alpha = opacity[k];
    else if (e.weight && max_weight > 0.0)
      alpha = *e.weight / max_weight;
    alpha = std::clamp(alpha, 0.0, 1.0);
    out += "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"2\" stroke-opacity=\"" + fmt(alpha) +
           "\" points=\"";
    for (Eigen::Index s = 0; s < e.curve.size(); ++s) out += (s ? " " : "") + px(e.curve.points.col(s));
    out += "\"/>\n";
  }
  for (const auto& n : g.nodes) {
    if (!n.position) continue;
    const std::string xy = px(*n.position);
    const auto comma = xy.find(',');
    out += "<circle cx=\"" + xy.substr(0, comma) + "\" cy=\"" + xy.substr(comma + 1) + "\" r=\"" + fmt(radius) +
           "\" fill=\"crimson\"><title>" + escape(n.id) + "</title></circle>\n";
  }
  out += "</svg>\n";
  return out;
}

std::string render_svg(const ShapeGraph& g) { return render_svg(g, bounds_of(g)); }

std::string render_panels_svg(const std::vector<ShapeGraph>& graphs, const std::vector<std::string>& captions) {
  if (captions.size() != graphs.size()) throw ArgumentError("render_panels_svg: one caption per graph is required");
  Bounds view;
  for (const auto& g : graphs) view.include(bounds_of(g));
  std::vector<std::string> panels;
  double height = 0.0;
  for (const auto& g : graphs) {
    panels.push_back(render_svg(g, view));
    const auto at = panels.back().find("height=\"") + 8;
    height = std::max(height, std::stod(panels.back().substr(at)));
  }
  const double caption = 24.0;
  const double total_w = kCanvasWidth * static_cast<double>(graphs.size());
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(total_w) + "\" height=\"" +
                    fmt(height + caption) + "\" viewBox=\"0 0 " + fmt(total_w) + " " + fmt(height + caption) + "\">\n";
  for (size_t k = 0; k < panels.size(); ++k) {
    const double x = kCanvasWidth * static_cast<double>(k);
    std::string body = panels[k];
    body.replace(0, 4, "<svg x=\"" + fmt(x) + "\" y=\"" + fmt(caption) + "\"");
    out += body;
    out += "<text x=\"" + fmt(x + 0.5 * kCanvasWidth) + "\" y=\"18\" font-size=\"16\" text-anchor=\"middle\">" +
           escape(captions[k]) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

std::string render_heatmap_svg(const Eigen::MatrixXd& m, const std::vector<size_t>& order,
                               const std::vector<std::string>& labels) {
  const auto n = static_cast<size_t>(m.rows());
  if (m.rows() != m.cols() || order.size() != n || labels.size() != n)
    throw ArgumentError("render_heatmap_svg: matrix, order and labels must agree in size");
  constexpr double cell = 12.0;
  constexpr double margin = 80.0;
  const double max = m.size() ? m.maxCoeff() : 0.0;
  const double side = margin + cell * static_cast<double>(n);
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(side) + "\" height=\"" + fmt(side) +
                    "\" viewBox=\"0 0 " + fmt(side) + " " + fmt(side) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (size_t r = 0; r < n; ++r) {
    const double y = margin + cell * static_cast<double>(r);
    out += "<text x=\"" + fmt(margin - 4.0) + "\" y=\"" + fmt(y + cell * 0.8) +
           "\" font-size=\"9\" text-anchor=\"end\">" + escape(labels[order[r]]) + "</text>\n";
    for (size_t c = 0; c < n; ++c) {
      const double v = max > 0.0 ? m(static_cast<Eigen::Index>(order[r]), static_cast<Eigen::Index>(order[c])) / max : 0.0;
      const int level = static_cast<int>(std::lround(255.0 * (1.0 - v)));
      out += "<rect x=\"" + fmt(margin + cell * static_cast<double>(c)) + "\" y=\"" + fmt(y) + "\" width=\"" +
             fmt(cell) + "\" height=\"" + fmt(cell) + "\" fill=\"rgb(" + std::to_string(level) + "," +
             std::to_string(level) + "," + std::to_string(level) + ")\"/>\n";
    }
  }
  out += "</svg>\n";
  return out;
}

}  // namespace shapegraph
