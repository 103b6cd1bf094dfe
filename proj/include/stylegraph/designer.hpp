#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stylegraph/catalog.hpp"
#include "stylegraph/retrieval.hpp"
#include "stylegraph/simgraph.hpp"
#include "stylegraph/style_model.hpp"

namespace stylegraph {

// Everything a scoring request reads. Built once, then shared immutably.
struct EngineState {
  Dataset data;
  StyleModel model;
  std::string model_checksum;
  EmbeddingStore store;
  SimilarityGraph graph;  // filtered product graph
  GroupGraph groups;
  GraphFilterConfig filter;
  std::size_t default_k = 5;
};

// Builds an engine. With no graph given, runs the graph pipeline over the
// store using `filter`.
std::shared_ptr<const EngineState> make_engine(Dataset data, StyleModel model,
                                               EmbeddingStore store,
                                               std::optional<SimilarityGraph> graph,
                                               const GraphFilterConfig& filter,
                                               std::size_t default_k);

struct DesignNeighbor {
  std::string sku;
  std::string group;
  double distance;
  bool duplicate;

  bool operator==(const DesignNeighbor&) const = default;
};

struct DesignReport {
  StyleScores style_probs{};
  Style estimated_style = Style::kModern;
  Embedding embedding{};
  std::vector<DesignNeighbor> top_neighbors;
  bool truncated = false;
  // Group -> summed weight of the candidate's would-be in-window edges.
  std::map<std::string, double> group_connections;
  double similarity_score = 0.0;
  // Graph products the candidate coincides with (no edge is formed).
  std::vector<std::string> duplicates;
  std::vector<std::string> flags;

  bool operator==(const DesignReport&) const = default;
};

inline constexpr const char* kFlagNoConnections = "no in-window connections";
inline constexpr const char* kFlagDuplicate = "duplicate of existing product";

// Scores a candidate design: embed it, rank the k nearest catalog products,
// then treat it as a new graph node and sum the weights 1/distance of its
// would-be edges to every graph product that fall inside the weight window.
DesignReport score_design(const EngineState& engine, std::span<const double> features,
                          std::size_t k);

struct GroupGapSummary {
  std::string group;
  std::size_t node_count = 0;
  std::size_t isolated_count = 0;
  std::vector<std::string> isolated;
  double degree_min = 0.0;
  double degree_median = 0.0;
  double degree_max = 0.0;

  bool operator==(const GroupGapSummary&) const = default;
};

struct GapReport {
  std::vector<GroupGapSummary> groups;  // sorted by group
  // Group pairs (a < b) joined by no product edge.
  std::vector<std::pair<std::string, std::string>> zero_weight_pairs;

  bool operator==(const GapReport&) const = default;
};

GapReport find_gaps(const SimilarityGraph& graph);

}  // namespace stylegraph
