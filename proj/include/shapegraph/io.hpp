#pragma once

// Shape-graph JSON format:
//   {"nodes": [{"id": str, "x": num|null, "y": num|null}, ...],
//    "edges": [{"u": str, "v": str, "points": [[x, y], ...], "weight": num?}, ...],
//    "metadata": {...}}
// Nodes with null coordinates are null nodes. Fields the format does not know
// are kept in ShapeGraph::metadata under "file:<field>", "node:<id>:<field>"
// and "edge:<index>:<field>".

#include "shapegraph/graph.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <string>
#include <vector>

namespace shapegraph {

/// Tolerance for snapping curve endpoints onto node positions at load time.
inline constexpr double kSnapTolerance = 1e-3;

/// Parses a graph document. `source` names the input in error messages.
ShapeGraph parse_graph(const std::string& text, const std::string& source = "<string>");
std::string format_graph(const ShapeGraph& g);

ShapeGraph load_graph(const std::filesystem::path& path);
void save_graph(const ShapeGraph& g, const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

/// `%.9g` formatting used for CSV and console output.
std::string format_number(double x);

/// Comma-separated matrix with a header row of labels.
std::string format_matrix_csv(const std::vector<std::string>& labels, const Eigen::MatrixXd& m);

}  // namespace shapegraph
