#include "stylegraph/simgraph.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "stylegraph/errors.hpp"

namespace stylegraph {

namespace {

// Rebuilds a graph keeping the nodes for which keep_node is true and the
// edges (between kept nodes) for which keep_edge is true.
template <typename NodePred, typename EdgePred>
SimilarityGraph subgraph(const SimilarityGraph& g, NodePred keep_node, EdgePred keep_edge) {
  std::vector<std::size_t> remap(g.node_count(), SIZE_MAX);
  std::vector<GraphNode> nodes;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    if (keep_node(i)) {
      remap[i] = nodes.size();
      nodes.push_back(g.nodes()[i]);
    }
  }
  std::vector<GraphEdge> edges;
  for (const auto& e : g.edges()) {
    if (remap[e.u] == SIZE_MAX || remap[e.v] == SIZE_MAX || !keep_edge(e)) continue;
    edges.push_back({remap[e.u], remap[e.v], e.weight});
  }
  SimilarityGraph out(std::move(nodes), std::move(edges));
  out.provenance = g.provenance;
  out.duplicates = g.duplicates;
  return out;
}

}  // namespace

SimilarityGraph::SimilarityGraph(std::vector<GraphNode> nodes, std::vector<GraphEdge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!index_.emplace(nodes_[i].id, i).second) {
      throw ValidationError("duplicate graph node '" + nodes_[i].id + "'");
    }
  }
  for (auto& e : edges_) {
    if (e.u >= nodes_.size() || e.v >= nodes_.size()) {
      throw InvariantError("edge endpoint out of range");
    }
    if (e.u == e.v) throw ValidationError("self-loop on '" + nodes_[e.u].id + "'");
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
      throw ValidationError("edge weight must be positive and finite");
    }
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  std::sort(edges_.begin(), edges_.end(), [](const GraphEdge& a, const GraphEdge& b) {
    return a.u != b.u ? a.u < b.u : a.v < b.v;
  });
  for (std::size_t i = 1; i < edges_.size(); ++i) {
    if (edges_[i].u == edges_[i - 1].u && edges_[i].v == edges_[i - 1].v) {
      throw ValidationError("parallel edge between '" + nodes_[edges_[i].u].id + "' and '" +
                            nodes_[edges_[i].v].id + "'");
    }
  }
}

std::optional<std::size_t> SimilarityGraph::find(std::string_view id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> SimilarityGraph::edge_weight(std::string_view a,
                                                   std::string_view b) const {
  auto ia = find(a);
  auto ib = find(b);
  if (!ia || !ib || *ia == *ib) return std::nullopt;
  const GraphEdge key{std::min(*ia, *ib), std::max(*ia, *ib), 0.0};
  auto it = std::lower_bound(edges_.begin(), edges_.end(), key,
                             [](const GraphEdge& x, const GraphEdge& y) {
                               return x.u != y.u ? x.u < y.u : x.v < y.v;
                             });
  if (it == edges_.end() || it->u != key.u || it->v != key.v) return std::nullopt;
  return it->weight;
}

bool SimilarityGraph::has_edge(std::string_view a, std::string_view b) const {
  return edge_weight(a, b).has_value();
}

std::vector<double> SimilarityGraph::weighted_degrees() const {
  std::vector<double> deg(nodes_.size(), 0.0);
  for (const auto& e : edges_) {
    deg[e.u] += e.weight;
    deg[e.v] += e.weight;
  }
  return deg;
}

std::vector<std::size_t> SimilarityGraph::degrees() const {
  std::vector<std::size_t> deg(nodes_.size(), 0);
  for (const auto& e : edges_) {
    ++deg[e.u];
    ++deg[e.v];
  }
  return deg;
}

double SimilarityGraph::total_weight() const {
  double total = 0.0;
  for (const auto& e : edges_) total += e.weight;
  return total;
}

std::map<std::string, std::vector<std::size_t>> SimilarityGraph::group_members() const {
  std::map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < nodes_.size(); ++i) members[nodes_[i].group].push_back(i);
  return members;
}

// ---------------------------------------------------------------------------
// Construction

SimilarityGraph build_graph(std::span<const GraphInput> inputs) {
  if (inputs.size() < 2) {
    throw ValidationError("a similarity graph needs at least 2 nodes, got " +
                          std::to_string(inputs.size()));
  }
  std::vector<GraphNode> nodes;
  nodes.reserve(inputs.size());
  for (const auto& in : inputs) nodes.push_back(in.node);

  std::vector<GraphEdge> edges;
  edges.reserve(inputs.size() * (inputs.size() - 1) / 2);
  std::vector<std::pair<std::string, std::string>> duplicates;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    for (std::size_t j = i + 1; j < inputs.size(); ++j) {
      const double d = distance(inputs[i].embedding, inputs[j].embedding);
      if (d < kDuplicateDistance) {
        duplicates.emplace_back(inputs[i].node.id, inputs[j].node.id);
        continue;
      }
      edges.push_back({i, j, 1.0 / d});
    }
  }
  SimilarityGraph g(std::move(nodes), std::move(edges));
  g.duplicates = std::move(duplicates);
  return g;
}

SimilarityGraph build_product_graph(const EmbeddingStore& store,
                                    const ProductCatalog& catalog) {
  std::vector<GraphInput> inputs;
  inputs.reserve(store.products().size());
  for (const auto& e : store.products()) {
    const Product& p = catalog.at(e.id);
    inputs.push_back({{p.sku, p.sku, p.group}, e.embedding});
  }
  return build_graph(inputs);
}

SimilarityGraph build_image_graph(const EmbeddingStore& store, const ImageSet& images,
                                  const ProductCatalog& catalog) {
  std::vector<GraphInput> inputs;
  inputs.reserve(store.images().size());
  for (const auto& e : store.images()) {
    const std::string& sku = images.at(e.id).target_sku();
    inputs.push_back({{e.id, sku, catalog.at(sku).group}, e.embedding});
  }
  SimilarityGraph g = build_graph(inputs);
  g.provenance.image_level = true;
  return g;
}

// ---------------------------------------------------------------------------
// Filters

SimilarityGraph remove_overlap_edges(const SimilarityGraph& graph, const ImageSet& images) {
  std::set<std::pair<std::string, std::string>> co_occurring;
  for (const auto& im : images.images()) {
    for (std::size_t i = 0; i < im.skus.size(); ++i) {
      for (std::size_t j = i + 1; j < im.skus.size(); ++j) {
        if (im.skus[i] == im.skus[j]) continue;
        co_occurring.emplace(std::min(im.skus[i], im.skus[j]),
                             std::max(im.skus[i], im.skus[j]));
      }
    }
  }
  const auto& nodes = graph.nodes();
  auto overlapping = [&](const GraphEdge& e) {
    const std::string& a = nodes[e.u].sku;
    const std::string& b = nodes[e.v].sku;
    if (a == b) return true;
    return co_occurring.count({std::min(a, b), std::max(a, b)}) > 0;
  };
  SimilarityGraph out = subgraph(
      graph, [](std::size_t) { return true; },
      [&](const GraphEdge& e) { return !overlapping(e); });
  out.provenance.overlap_edges_removed += graph.edge_count() - out.edge_count();
  return out;
}

SimilarityGraph filter_edges(const SimilarityGraph& graph, double w_min, double w_max) {
  if (!(w_min < w_max)) {
    throw ValidationError("weight window needs w_min < w_max");
  }
  SimilarityGraph out = subgraph(
      graph, [](std::size_t) { return true; },
      [&](const GraphEdge& e) { return e.weight >= w_min && e.weight <= w_max; });
  out.provenance.w_min = std::max(w_min, graph.provenance.w_min.value_or(w_min));
  out.provenance.w_max = std::min(w_max, graph.provenance.w_max.value_or(w_max));
  return out;
}

SimilarityGraph filter_small_groups(const SimilarityGraph& graph, std::size_t min_group_size) {
  std::map<std::string, std::size_t> sizes;
  for (const auto& n : graph.nodes()) ++sizes[n.group];
  SimilarityGraph out = subgraph(
      graph,
      [&](std::size_t i) { return sizes[graph.nodes()[i].group] >= min_group_size; },
      [](const GraphEdge&) { return true; });
  out.provenance.min_group_size =
      std::max(min_group_size, graph.provenance.min_group_size.value_or(min_group_size));
  return out;
}

SimilarityGraph run_graph_pipeline(const EmbeddingStore& store, const Dataset& data,
                                   const GraphFilterConfig& config, bool image_level) {
  SimilarityGraph g = image_level ? build_image_graph(store, data.images, data.catalog)
                                  : build_product_graph(store, data.catalog);
  g = remove_overlap_edges(g, data.images);
  g = filter_edges(g, config.w_min, config.w_max);
  return filter_small_groups(g, config.min_group_size);
}

// ---------------------------------------------------------------------------
// Analysis

std::optional<std::size_t> GroupGraph::find(std::string_view name) const {
  auto it = std::lower_bound(groups.begin(), groups.end(), name,
                             [](const GroupNode& g, std::string_view n) { return g.name < n; });
  if (it == groups.end() || it->name != name) return std::nullopt;
  return static_cast<std::size_t>(it - groups.begin());
}

GroupGraph group_graph(const SimilarityGraph& graph) {
  GroupGraph out;
  const auto members = graph.group_members();
  std::map<std::string, std::size_t> group_index;
  for (const auto& [name, idx] : members) {
    group_index[name] = out.groups.size();
    GroupNode node;
    node.name = name;
    node.product_count = idx.size();
    out.groups.push_back(std::move(node));
  }
  std::vector<std::size_t> node_group(graph.node_count());
  for (std::size_t i = 0; i < graph.node_count(); ++i) {
    node_group[i] = group_index[graph.nodes()[i].group];
  }

  const auto wdeg = graph.weighted_degrees();
  const auto deg = graph.degrees();
  for (std::size_t i = 0; i < graph.node_count(); ++i) {
    out.groups[node_group[i]].degree_sum += wdeg[i];
    out.groups[node_group[i]].edge_degree_sum += deg[i];
  }

  std::map<std::pair<std::size_t, std::size_t>, double> crossing;
  for (const auto& e : graph.edges()) {
    const std::size_t ga = node_group[e.u];
    const std::size_t gb = node_group[e.v];
    if (ga == gb) {
      out.groups[ga].internal_weight += e.weight;
    } else {
      crossing[{std::min(ga, gb), std::max(ga, gb)}] += e.weight;
    }
  }
  for (const auto& [key, w] : crossing) out.edges.push_back({key.first, key.second, w});
  return out;
}

MostConnected most_connected(const SimilarityGraph& graph, std::string_view group) {
  const auto wdeg = graph.weighted_degrees();
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < graph.node_count(); ++i) {
    const auto& n = graph.nodes()[i];
    if (n.group != group) continue;
    if (!best || wdeg[i] > wdeg[*best] ||
        (wdeg[i] == wdeg[*best] && n.id < graph.nodes()[*best].id)) {
      best = i;
    }
  }
  if (!best) {
    throw ValidationError("unknown group '" + std::string(group) + "'");
  }
  return {graph.nodes()[*best].id, wdeg[*best], wdeg[*best] == 0.0};
}

std::vector<std::pair<std::string, std::size_t>> RecommendationFrequency::top_n(
    std::size_t n) const {
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > n) ranked.resize(n);
  return ranked;
}

RecommendationFrequency recommendation_frequency(const EmbeddingStore& store,
                                                 std::span<const std::string> seed_ids,
                                                 std::size_t k, Scope scope) {
  if (k == 0) throw ValidationError("k must be >= 1");
  RecommendationFrequency freq;
  freq.k = k;
  for (const auto& seed : seed_ids) {
    const RankedNeighbors ranked = top_k(store, seed, k, scope);
    freq.truncated = freq.truncated || ranked.truncated;
    for (const auto& n : ranked.neighbors) ++freq.counts[n.id];
    ++freq.seeds;
  }
  return freq;
}

}  // namespace stylegraph
