#include "shapegraph/io.hpp"

#include "shapegraph/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace shapegraph {

using nlohmann::json;

namespace {

std::string location(const std::string& text, size_t byte) {
  size_t line = 1;
  size_t col = 1;
  for (size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

double number_field(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_number())
    throw ParseError(where + ": field '" + key + "' must be a number");
  return it->get<double>();
}

std::string string_field(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) throw ParseError(where + ": field '" + key + "' must be a string");
  return it->get<std::string>();
}

std::string metadata_value(const json& value) { return value.is_string() ? value.get<std::string>() : value.dump(); }

json metadata_json(const std::string& value) {
  json parsed = json::parse(value, nullptr, false);
  if (parsed.is_discarded() || parsed.is_string()) return value;
  return parsed;
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

ShapeGraph parse_graph(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source + ": malformed JSON at " + location(text, e.byte) + ": " + e.what());
  }
  if (!doc.is_object()) throw ParseError(source + ": top-level value must be an object");

  ShapeGraph g;
  for (const auto& [key, value] : doc.items()) {
    if (key == "metadata") {
      if (!value.is_object()) throw ParseError(source + ": field 'metadata' must be an object");
      for (const auto& [mk, mv] : value.items()) g.metadata[mk] = metadata_value(mv);
    } else if (key != "nodes" && key != "edges") {
      g.metadata["file:" + key] = metadata_value(value);
    }
  }

  const auto nodes = doc.find("nodes");
  if (nodes == doc.end() || !nodes->is_array()) throw ParseError(source + ": field 'nodes' must be an array");
  for (size_t i = 0; i < nodes->size(); ++i) {
    const json& n = (*nodes)[i];
    const std::string where = source + ": nodes[" + std::to_string(i) + "]";
    if (!n.is_object()) throw ParseError(where + ": expected an object");
    Node node;
    node.id = string_field(n, "id", where);
    const auto x = n.find("x");
    const auto y = n.find("y");
    const bool x_null = x == n.end() || x->is_null();
    const bool y_null = y == n.end() || y->is_null();
    if (x_null != y_null) throw ParseError(where + ": 'x' and 'y' must both be numbers or both be null");
    if (!x_null) node.position = Point(number_field(n, "x", where), number_field(n, "y", where));
    for (const auto& [key, value] : n.items())
      if (key != "id" && key != "x" && key != "y") g.metadata["node:" + node.id + ":" + key] = metadata_value(value);
    g.nodes.push_back(std::move(node));
  }

  const auto edges = doc.find("edges");
  if (edges != doc.end() && !edges->is_array()) throw ParseError(source + ": field 'edges' must be an array");
  if (edges == doc.end()) return g;

  for (size_t k = 0; k < edges->size(); ++k) {
    const json& e = (*edges)[k];
    const std::string where = source + ": edges[" + std::to_string(k) + "]";
    if (!e.is_object()) throw ParseError(where + ": expected an object");
    Edge edge;
    edge.u = string_field(e, "u", where);
    edge.v = string_field(e, "v", where);
    const auto pts = e.find("points");
    if (pts == e.end() || !pts->is_array()) throw ParseError(where + ": field 'points' must be an array");
    edge.curve.points.resize(2, static_cast<Eigen::Index>(pts->size()));
    for (size_t s = 0; s < pts->size(); ++s) {
      const json& p = (*pts)[s];
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
        throw ParseError(where + ": points[" + std::to_string(s) + "] must be an [x, y] pair");
      edge.curve.points(0, static_cast<Eigen::Index>(s)) = p[0].get<double>();
      edge.curve.points(1, static_cast<Eigen::Index>(s)) = p[1].get<double>();
    }
    if (const auto w = e.find("weight"); w != e.end() && !w->is_null()) edge.weight = number_field(e, "weight", where);
    for (const auto& [key, value] : e.items())
      if (key != "u" && key != "v" && key != "points" && key != "weight")
        g.metadata["edge:" + std::to_string(k) + ":" + key] = metadata_value(value);

    const auto iu = g.index_of(edge.u);
    const auto iv = g.index_of(edge.v);
    if (!iu) throw DataError(where + " references missing node id '" + edge.u + "'");
    if (!iv) throw DataError(where + " references missing node id '" + edge.v + "'");
    if (edge.curve.size() < 2) throw DataError(where + ": a curve needs at least 2 points");

    const auto& pu = g.nodes[*iu].position;
    const auto& pv = g.nodes[*iv].position;
    auto fits = [&](const PlanarCurve& c) {
      return (!pu || (c.front() - *pu).norm() <= kSnapTolerance) && (!pv || (c.back() - *pv).norm() <= kSnapTolerance);
    };
    if (!fits(edge.curve)) {
      const PlanarCurve flipped = reversed(edge.curve);
      if (!fits(flipped))
        throw DataError(where + ": curve endpoints are more than " + format_number(kSnapTolerance) +
                        " away from nodes '" + edge.u + "' and '" + edge.v + "'");
      edge.curve = flipped;
    }
    if (pu) edge.curve.points.col(0) = *pu;
    if (pv) edge.curve.points.col(edge.curve.size() - 1) = *pv;
    g.edges.push_back(std::move(edge));
  }
  return g;
}

std::string format_graph(const ShapeGraph& g) {
  json doc;
  doc["nodes"] = json::array();
  for (const auto& n : g.nodes) {
    json node{{"id", n.id}};
    node["x"] = n.position ? number_or_null(n.position->x()) : json(nullptr);
    node["y"] = n.position ? number_or_null(n.position->y()) : json(nullptr);
    doc["nodes"].push_back(std::move(node));
  }
  doc["edges"] = json::array();
  for (const auto& e : g.edges) {
    json edge{{"u", e.u}, {"v", e.v}};
    json pts = json::array();
    for (Eigen::Index s = 0; s < e.curve.size(); ++s)
      pts.push_back({number_or_null(e.curve.points(0, s)), number_or_null(e.curve.points(1, s))});
    edge["points"] = std::move(pts);
    if (e.weight) edge["weight"] = *e.weight;
    doc["edges"].push_back(std::move(edge));
  }
  json meta = json::object();
  for (const auto& [k, v] : g.metadata) meta[k] = metadata_json(v);
  doc["metadata"] = std::move(meta);
  return doc.dump(1) + "\n";
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

ShapeGraph load_graph(const std::filesystem::path& path) { return parse_graph(read_text(path), path.string()); }

void save_graph(const ShapeGraph& g, const std::filesystem::path& path) { write_text(path, format_graph(g)); }

std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

std::string format_matrix_csv(const std::vector<std::string>& labels, const Eigen::MatrixXd& m) {
  std::string out;
  for (size_t i = 0; i < labels.size(); ++i) out += (i ? "," : "") + labels[i];
  out += "\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out += (c ? "," : "") + format_number(m(r, c));
    out += "\n";
  }
  return out;
}

}  // namespace shapegraph
