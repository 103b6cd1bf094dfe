#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "stylegraph/simgraph.hpp"

namespace stylegraph {

enum class ExportFormat { kGraphml, kGexf, kEdgeCsv };

// Accepts "graphml", "gexf" and "edge-csv" (also "csv").
ExportFormat parse_export_format(std::string_view name);
std::string_view export_format_name(ExportFormat format);

struct ExportNode {
  std::string id;
  std::string sku;
  std::string group;
  double weighted_degree = 0.0;

  bool operator==(const ExportNode&) const = default;
};

struct ExportEdge {
  std::string source;
  std::string target;
  double weight = 0.0;

  bool operator==(const ExportEdge&) const = default;
};

// Format-neutral view of a product graph or a group graph.
struct ExportedGraph {
  std::vector<ExportNode> nodes;
  std::vector<ExportEdge> edges;

  bool operator==(const ExportedGraph&) const = default;
};

ExportedGraph to_export(const SimilarityGraph& graph);
// Group graph nodes: id = group = group name, sku empty, weighted_degree =
// degree_sum.
ExportedGraph to_export(const GroupGraph& graph);

// Inverse of to_export(SimilarityGraph).
SimilarityGraph graph_from_export(const ExportedGraph& exported);

// Weights are written in scientific notation with 17 significant digits, so
// re-reading reproduces them bit for bit.
std::string render_graph(const ExportedGraph& graph, ExportFormat format);
// For kEdgeCsv this parses the edge table only; nodes are those named by edges.
ExportedGraph parse_graph(const std::string& text, ExportFormat format);

std::string render_nodes_csv(const ExportedGraph& graph);
void parse_nodes_csv(const std::string& text, ExportedGraph& graph);

// "g.csv" -> "g.nodes.csv"
std::filesystem::path nodes_sidecar_path(const std::filesystem::path& edge_csv);

// Edge-csv exports also write a node table to nodes_sidecar_path(path).
void export_graph(const ExportedGraph& graph, ExportFormat format,
                  const std::filesystem::path& path);
ExportedGraph import_graph(const std::filesystem::path& path, ExportFormat format);

// Picks the format from the extension: .graphml, .gexf, .csv
ExportFormat format_for_path(const std::filesystem::path& path);

}  // namespace stylegraph
