#include "stylegraph/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "io_util.hpp"
#include "json.hpp"
#include "stylegraph/errors.hpp"

namespace stylegraph {

using nlohmann::json;

EmbeddingStore::EmbeddingStore(std::vector<EmbeddingEntry> images,
                               std::vector<EmbeddingEntry> products,
                               std::string model_checksum)
    : images_(std::move(images)),
      products_(std::move(products)),
      model_checksum_(std::move(model_checksum)) {
  auto index = [](const std::vector<EmbeddingEntry>& entries,
                  std::unordered_map<std::string, std::size_t>& out) {
    for (std::size_t i = 0; i < entries.size(); ++i) {
      for (double v : entries[i].embedding) {
        if (!std::isfinite(v)) {
          throw InvariantError("non-finite embedding for '" + entries[i].id + "'");
        }
      }
      if (!out.emplace(entries[i].id, i).second) {
        throw ValidationError("duplicate embedding id '" + entries[i].id + "'");
      }
    }
  };
  index(images_, image_index_);
  index(products_, product_index_);
}

const Embedding* EmbeddingStore::find(Scope scope, std::string_view id) const {
  const auto& idx = scope == Scope::kImages ? image_index_ : product_index_;
  auto it = idx.find(std::string(id));
  if (it == idx.end()) return nullptr;
  return &entries(scope)[it->second].embedding;
}

Embedding aggregate_embeddings(std::span<const Embedding> members) {
  Embedding mean{};
  if (members.empty()) return mean;
  for (const auto& e : members) {
    for (std::size_t k = 0; k < kEmbeddingDim; ++k) mean[k] += e[k];
  }
  const double n = static_cast<double>(members.size());
  for (double& v : mean) v /= n;
  return mean;
}

EmbeddingStore embed_all(const StyleModel& model, const ImageSet& images,
                         const ProductCatalog& catalog) {
  std::vector<EmbeddingEntry> image_entries;
  image_entries.reserve(images.size());
  std::unordered_map<std::string, std::vector<Embedding>> by_target;
  for (const auto& im : images.images()) {
    const Embedding e = forward(model, im.features).embedding;
    image_entries.push_back({im.image_id, e});
    by_target[im.target_sku()].push_back(e);
  }

  std::vector<EmbeddingEntry> product_entries;
  std::vector<std::string> excluded;
  for (const auto& p : catalog.products()) {
    auto it = by_target.find(p.sku);
    if (it == by_target.end()) {
      excluded.push_back(p.sku);
      continue;
    }
    product_entries.push_back({p.sku, aggregate_embeddings(it->second)});
  }
  EmbeddingStore store(std::move(image_entries), std::move(product_entries),
                       model_checksum(model));
  store.excluded_products = std::move(excluded);
  return store;
}

double distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionMismatchError("distance between vectors of different length",
                                 a.size(), b.size());
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

RankedNeighbors nearest(std::span<const EmbeddingEntry> entries, const Embedding& query,
                        std::size_t k, std::optional<std::string_view> exclude_id) {
  if (k == 0) throw ValidationError("k must be >= 1");
  std::vector<Neighbor> all;
  all.reserve(entries.size());
  for (const auto& e : entries) {
    if (exclude_id && e.id == *exclude_id) continue;
    all.push_back({e.id, distance(query, e.embedding)});
  }
  auto closer = [](const Neighbor& a, const Neighbor& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.id < b.id;
  };
  RankedNeighbors out;
  out.truncated = all.size() < k;
  const std::size_t take = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end(),
                    closer);
  all.resize(take);
  out.neighbors = std::move(all);
  return out;
}

RankedNeighbors top_k(const EmbeddingStore& store, std::string_view seed_id, std::size_t k,
                      Scope scope) {
  if (k == 0) throw ValidationError("k must be >= 1");
  const Embedding* seed = store.find(scope, seed_id);
  if (!seed) {
    throw DanglingReferenceError(
        std::string(scope == Scope::kImages ? "unknown image '" : "unknown sku '") +
            std::string(seed_id) + "'",
        {std::string(seed_id)});
  }
  return nearest(store.entries(scope), *seed, k, seed_id);
}

double retrieval_accuracy(const EmbeddingStore& store, std::span<const std::string> test_ids,
                          const VoteTable& votes, std::size_t k) {
  if (k == 0) throw ValidationError("k must be >= 1");
  if (test_ids.empty()) throw ValidationError("empty test set");
  std::size_t events = 0;
  std::size_t matches = 0;
  for (const auto& seed : test_ids) {
    const Style seed_style = votes.majority(seed).style;
    for (const auto& n : top_k(store, seed, k, Scope::kImages).neighbors) {
      if (!votes.has_votes(n.id)) continue;
      ++events;
      if (votes.majority(n.id).style == seed_style) ++matches;
    }
  }
  if (events == 0) throw ValidationError("no labelled retrievals to score");
  return static_cast<double>(matches) / static_cast<double>(events);
}

// ---------------------------------------------------------------------------

void write_embeddings(const EmbeddingStore& store, const std::filesystem::path& path) {
  std::string out;
  out += json{{"model", store.model_checksum()},
              {"excluded_products", store.excluded_products}}
             .dump();
  out += '\n';
  for (const auto& e : store.images()) {
    out += json{{"image_id", e.id}, {"embedding", e.embedding}}.dump();
    out += '\n';
  }
  for (const auto& e : store.products()) {
    out += json{{"sku", e.id}, {"embedding", e.embedding}}.dump();
    out += '\n';
  }
  detail::write_text_file(path, out);
}

EmbeddingStore read_embeddings(const std::filesystem::path& path) {
  const auto lines = detail::split_lines(detail::read_text_file(path));
  std::vector<EmbeddingEntry> images;
  std::vector<EmbeddingEntry> products;
  std::string checksum;
  std::vector<std::string> excluded;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].find_first_not_of(" \t") == std::string::npos) continue;
    try {
      const json r = json::parse(lines[i]);
      if (r.contains("model")) {
        checksum = r.at("model").get<std::string>();
        if (r.contains("excluded_products")) {
          excluded = r.at("excluded_products").get<std::vector<std::string>>();
        }
        continue;
      }
      const auto& values = r.at("embedding");
      if (!values.is_array() || values.size() != kEmbeddingDim) {
        throw ParseError(path.string(), i + 1,
                         "embedding must have " + std::to_string(kEmbeddingDim) + " values");
      }
      EmbeddingEntry e;
      for (std::size_t k = 0; k < kEmbeddingDim; ++k) e.embedding[k] = values[k].get<double>();
      if (r.contains("image_id")) {
        e.id = r.at("image_id").get<std::string>();
        images.push_back(std::move(e));
      } else {
        e.id = r.at("sku").get<std::string>();
        products.push_back(std::move(e));
      }
    } catch (const json::exception& e) {
      throw ParseError(path.string(), i + 1, e.what());
    }
  }
  EmbeddingStore store(std::move(images), std::move(products), std::move(checksum));
  store.excluded_products = std::move(excluded);
  return store;
}

}  // namespace stylegraph
