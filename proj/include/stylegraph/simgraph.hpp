#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stylegraph/catalog.hpp"
#include "stylegraph/retrieval.hpp"

namespace stylegraph {

// A node is a product (id == sku) or, in image-level mode, an image whose
// target product is `sku`.
struct GraphNode {
  std::string id;
  std::string sku;
  std::string group;

  bool operator==(const GraphNode&) const = default;
};

struct GraphEdge {
  std::size_t u;  // u < v, indices into nodes()
  std::size_t v;
  double weight;

  bool operator==(const GraphEdge&) const = default;
};

// Thresholds that have been applied to a graph so far.
struct GraphProvenance {
  std::optional<double> w_min;
  std::optional<double> w_max;
  std::optional<std::size_t> min_group_size;
  std::size_t overlap_edges_removed = 0;
  bool image_level = false;

  bool operator==(const GraphProvenance&) const = default;
};

// Weighted undirected simple graph; weight = 1 / embedding distance.
class SimilarityGraph {
 public:
  SimilarityGraph() = default;
  // Validates: unique node ids, at most one edge per unordered pair, no
  // self-loops, positive finite weights. Edges are normalised to u < v and
  // sorted.
  SimilarityGraph(std::vector<GraphNode> nodes, std::vector<GraphEdge> edges);

  const std::vector<GraphNode>& nodes() const { return nodes_; }
  const std::vector<GraphEdge>& edges() const { return edges_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  std::optional<std::size_t> find(std::string_view id) const;
  bool has_edge(std::string_view a, std::string_view b) const;
  std::optional<double> edge_weight(std::string_view a, std::string_view b) const;

  // Sum of incident edge weights per node, in node order.
  std::vector<double> weighted_degrees() const;
  std::vector<std::size_t> degrees() const;
  double total_weight() const;
  // Distinct groups, sorted, with their member node indices.
  std::map<std::string, std::vector<std::size_t>> group_members() const;

  GraphProvenance provenance;
  // Pairs skipped at build time because their embeddings coincide.
  std::vector<std::pair<std::string, std::string>> duplicates;

  bool operator==(const SimilarityGraph& o) const {
    return nodes_ == o.nodes_ && edges_ == o.edges_;
  }

 private:
  std::vector<GraphNode> nodes_;
  std::vector<GraphEdge> edges_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

inline constexpr double kDuplicateDistance = 1e-9;

struct GraphInput {
  GraphNode node;
  Embedding embedding;
};

// Complete graph with weight 1/distance. Pairs closer than
// kDuplicateDistance get no edge and are logged in `duplicates`.
// Throws ValidationError for fewer than two nodes.
SimilarityGraph build_graph(std::span<const GraphInput> inputs);

// Product-level graph over the store's product embeddings.
SimilarityGraph build_product_graph(const EmbeddingStore& store,
                                    const ProductCatalog& catalog);
// Image-level graph; each image takes its target product's group.
SimilarityGraph build_image_graph(const EmbeddingStore& store, const ImageSet& images,
                                  const ProductCatalog& catalog);

// Drops every edge whose endpoint products appear together in some image's
// sku list (or are the same product, which only happens in image mode).
SimilarityGraph remove_overlap_edges(const SimilarityGraph& graph, const ImageSet& images);

// Keeps edges with w_min <= weight <= w_max. Nodes are kept.
SimilarityGraph filter_edges(const SimilarityGraph& graph, double w_min = 1.0,
                             double w_max = 10.0);

// Removes, in a single pass, nodes whose group has fewer than
// min_group_size members in the current graph, with their edges.
SimilarityGraph filter_small_groups(const SimilarityGraph& graph,
                                    std::size_t min_group_size = 10);

struct GraphFilterConfig {
  double w_min = 1.0;
  double w_max = 10.0;
  std::size_t min_group_size = 10;
};

// build -> remove_overlap_edges -> filter_edges -> filter_small_groups.
SimilarityGraph run_graph_pipeline(const EmbeddingStore& store, const Dataset& data,
                                   const GraphFilterConfig& config, bool image_level = false);

struct GroupNode {
  std::string name;
  std::size_t product_count = 0;
  double degree_sum = 0.0;          // sum of members' weighted degrees
  std::size_t edge_degree_sum = 0;  // sum of members' edge counts
  double internal_weight = 0.0;     // total weight of intra-group edges

  bool operator==(const GroupNode&) const = default;
};

struct GroupEdge {
  std::size_t a;  // a < b, indices into groups
  std::size_t b;
  double weight;  // cumulative weight of crossing product edges

  bool operator==(const GroupEdge&) const = default;
};

struct GroupGraph {
  std::vector<GroupNode> groups;  // sorted by name
  std::vector<GroupEdge> edges;   // sorted by (a, b)

  std::optional<std::size_t> find(std::string_view name) const;
  bool operator==(const GroupGraph&) const = default;
};

GroupGraph group_graph(const SimilarityGraph& graph);

struct MostConnected {
  std::string id;
  double weighted_degree;
  bool zero_degree;

  bool operator==(const MostConnected&) const = default;
};

// Member of `group` with the largest weighted degree, ties to the smallest
// id. Throws ValidationError for a group with no nodes in the graph.
MostConnected most_connected(const SimilarityGraph& graph, std::string_view group);

struct RecommendationFrequency {
  std::map<std::string, std::size_t> counts;
  std::size_t seeds = 0;
  std::size_t k = 0;
  bool truncated = false;

  // Most frequently recommended ids, count descending then id ascending.
  std::vector<std::pair<std::string, std::size_t>> top_n(std::size_t n) const;
};

// For every seed, counts each id in its unfiltered top-k list.
RecommendationFrequency recommendation_frequency(const EmbeddingStore& store,
                                                 std::span<const std::string> seed_ids,
                                                 std::size_t k, Scope scope);

}  // namespace stylegraph
