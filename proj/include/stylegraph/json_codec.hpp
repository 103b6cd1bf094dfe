#pragma once

#include "json.hpp"
#include "stylegraph/designer.hpp"
#include "stylegraph/retrieval.hpp"
#include "stylegraph/simgraph.hpp"
#include "stylegraph/style_model.hpp"

// JSON views of library results, shared by the HTTP service and the CLI.
namespace stylegraph {

nlohmann::json to_json(const RankedNeighbors& ranked, const ProductCatalog* catalog);
nlohmann::json to_json(const DesignReport& report);
nlohmann::json to_json(const GapReport& report);
nlohmann::json to_json(const GroupGraph& graph, const SimilarityGraph& product_graph);
nlohmann::json to_json(const EstimationReport& report);
nlohmann::json to_json(const TrainHistory& history);
nlohmann::json to_json(const RecommendationFrequency& freq, std::size_t top_n);
nlohmann::json style_probabilities_json(const StyleScores& probs);

}  // namespace stylegraph
