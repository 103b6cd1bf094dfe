#include "stylegraph/json_codec.hpp"

namespace stylegraph {

using nlohmann::json;

json style_probabilities_json(const StyleScores& probs) {
  json out = json::object();
  for (Style s : kAllStyles) out[std::string(style_name(s))] = probs[style_code(s)];
  return out;
}

json to_json(const RankedNeighbors& ranked, const ProductCatalog* catalog) {
  json neighbors = json::array();
  for (const auto& n : ranked.neighbors) {
    json item = {{"id", n.id}, {"distance", n.distance}};
    if (catalog) {
      if (const Product* p = catalog->find(n.id)) item["group"] = p->group;
    }
    neighbors.push_back(std::move(item));
  }
  return {{"neighbors", std::move(neighbors)}, {"truncated", ranked.truncated}};
}

json to_json(const DesignReport& r) {
  json neighbors = json::array();
  for (const auto& n : r.top_neighbors) {
    neighbors.push_back({{"sku", n.sku},
                         {"group", n.group},
                         {"distance", n.distance},
                         {"duplicate", n.duplicate}});
  }
  json groups = json::object();
  for (const auto& [g, w] : r.group_connections) groups[g] = w;
  return {
      {"style_probs", style_probabilities_json(r.style_probs)},
      {"estimated_style", std::string(style_name(r.estimated_style))},
      {"embedding", r.embedding},
      {"top_neighbors", std::move(neighbors)},
      {"truncated", r.truncated},
      {"group_connections", std::move(groups)},
      {"similarity_score", r.similarity_score},
      {"duplicates", r.duplicates},
      {"flags", r.flags},
  };
}

json to_json(const GapReport& r) {
  json groups = json::array();
  for (const auto& g : r.groups) {
    groups.push_back({{"group", g.group},
                      {"node_count", g.node_count},
                      {"isolated_count", g.isolated_count},
                      {"isolated", g.isolated},
                      {"weighted_degree",
                       {{"min", g.degree_min}, {"median", g.degree_median}, {"max", g.degree_max}}}});
  }
  json pairs = json::array();
  for (const auto& [a, b] : r.zero_weight_pairs) pairs.push_back({a, b});
  return {{"groups", std::move(groups)}, {"zero_weight_pairs", std::move(pairs)}};
}

json to_json(const GroupGraph& g, const SimilarityGraph& product_graph) {
  json groups = json::array();
  for (const auto& n : g.groups) {
    const MostConnected top = most_connected(product_graph, n.name);
    groups.push_back({{"name", n.name},
                      {"product_count", n.product_count},
                      {"degree_sum", n.degree_sum},
                      {"edge_degree_sum", n.edge_degree_sum},
                      {"internal_weight", n.internal_weight},
                      {"most_connected",
                       {{"id", top.id},
                        {"weighted_degree", top.weighted_degree},
                        {"zero_degree", top.zero_degree}}}});
  }
  json edges = json::array();
  for (const auto& e : g.edges) {
    edges.push_back(
        {{"a", g.groups[e.a].name}, {"b", g.groups[e.b].name}, {"weight", e.weight}});
  }
  return {{"groups", std::move(groups)}, {"edges", std::move(edges)}};
}

json to_json(const EstimationReport& r) {
  json per_style = json::object();
  for (Style s : kAllStyles) {
    const auto& v = r.per_style[style_code(s)];
    per_style[std::string(style_name(s))] = v ? json(*v) : json(nullptr);
  }
  return {{"overall", r.overall},
          {"per_style", std::move(per_style)},
          {"support", r.support},
          {"evaluated", r.evaluated},
          {"skipped_ties", r.skipped_ties}};
}

json to_json(const TrainHistory& h) {
  json val = json::array();
  for (const auto& v : h.validation_accuracy) val.push_back(v ? json(*v) : json(nullptr));
  return {{"train_loss", h.train_loss}, {"validation_accuracy", std::move(val)}};
}

json to_json(const RecommendationFrequency& f, std::size_t top_n) {
  json top = json::array();
  for (const auto& [id, count] : f.top_n(top_n)) top.push_back({{"id", id}, {"count", count}});
  return {{"seeds", f.seeds}, {"k", f.k}, {"truncated", f.truncated}, {"top", std::move(top)}};
}

}  // namespace stylegraph
