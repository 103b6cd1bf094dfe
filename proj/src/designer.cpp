#include "stylegraph/designer.hpp"

#include <algorithm>
#include <set>

#include "stylegraph/errors.hpp"

namespace stylegraph {

std::shared_ptr<const EngineState> make_engine(Dataset data, StyleModel model,
                                               EmbeddingStore store,
                                               std::optional<SimilarityGraph> graph,
                                               const GraphFilterConfig& filter,
                                               std::size_t default_k) {
  if (model.input_dim() != data.images.dimension()) {
    throw DimensionMismatchError("checkpoint input dimension " +
                                     std::to_string(model.input_dim()) +
                                     " does not match catalog feature dimension " +
                                     std::to_string(data.images.dimension()),
                                 data.images.dimension(), model.input_dim());
  }
  if (default_k == 0) throw ValidationError("default k must be >= 1");
  auto engine = std::make_shared<EngineState>();
  engine->model_checksum = model_checksum(model);
  if (!graph) graph = run_graph_pipeline(store, data, filter);
  engine->groups = group_graph(*graph);
  engine->graph = std::move(*graph);
  engine->data = std::move(data);
  engine->model = std::move(model);
  engine->store = std::move(store);
  engine->filter = filter;
  engine->default_k = default_k;
  return engine;
}

DesignReport score_design(const EngineState& engine, std::span<const double> features,
                          std::size_t k) {
  if (k == 0) throw ValidationError("k must be >= 1");
  const ForwardResult fwd = forward(engine.model, features);

  DesignReport report;
  report.embedding = fwd.embedding;
  report.style_probs = style_probabilities(fwd.scores);
  report.estimated_style = argmax_style(fwd.scores);

  const RankedNeighbors ranked = nearest(engine.store.products(), fwd.embedding, k);
  report.truncated = ranked.truncated;
  for (const auto& n : ranked.neighbors) {
    const Product* p = engine.data.catalog.find(n.id);
    report.top_neighbors.push_back(
        {n.id, p ? p->group : std::string(), n.distance, n.distance < kDuplicateDistance});
  }

  const double w_min = engine.filter.w_min;
  const double w_max = engine.filter.w_max;
  for (const auto& node : engine.graph.nodes()) {
    const Embedding* e = engine.store.find(Scope::kProducts, node.sku);
    if (!e) continue;
    const double d = distance(fwd.embedding, *e);
    if (d < kDuplicateDistance) {
      report.duplicates.push_back(node.id);
      continue;
    }
    const double w = 1.0 / d;
    if (w >= w_min && w <= w_max) report.group_connections[node.group] += w;
  }
  for (const auto& [group, w] : report.group_connections) report.similarity_score += w;

  if (report.group_connections.empty()) report.flags.push_back(kFlagNoConnections);
  if (!report.duplicates.empty()) report.flags.push_back(kFlagDuplicate);
  return report;
}

GapReport find_gaps(const SimilarityGraph& graph) {
  GapReport report;
  const auto wdeg = graph.weighted_degrees();
  const auto deg = graph.degrees();
  for (const auto& [group, members] : graph.group_members()) {
    GroupGapSummary s;
    s.group = group;
    s.node_count = members.size();
    std::vector<double> degrees;
    for (std::size_t i : members) {
      degrees.push_back(wdeg[i]);
      if (deg[i] == 0) s.isolated.push_back(graph.nodes()[i].id);
    }
    std::sort(s.isolated.begin(), s.isolated.end());
    s.isolated_count = s.isolated.size();
    std::sort(degrees.begin(), degrees.end());
    s.degree_min = degrees.front();
    s.degree_max = degrees.back();
    const std::size_t mid = degrees.size() / 2;
    s.degree_median = degrees.size() % 2 ? degrees[mid]
                                          : 0.5 * (degrees[mid - 1] + degrees[mid]);
    report.groups.push_back(std::move(s));
  }

  const GroupGraph gg = group_graph(graph);
  std::set<std::pair<std::size_t, std::size_t>> linked;
  for (const auto& e : gg.edges) linked.emplace(e.a, e.b);
  for (std::size_t a = 0; a < gg.groups.size(); ++a) {
    for (std::size_t b = a + 1; b < gg.groups.size(); ++b) {
      if (!linked.count({a, b})) {
        report.zero_weight_pairs.emplace_back(gg.groups[a].name, gg.groups[b].name);
      }
    }
  }
  return report;
}

}  // namespace stylegraph
