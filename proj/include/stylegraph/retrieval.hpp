#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "stylegraph/catalog.hpp"
#include "stylegraph/style_model.hpp"

namespace stylegraph {

enum class Scope { kImages, kProducts };

struct EmbeddingEntry {
  std::string id;
  Embedding embedding;

  bool operator==(const EmbeddingEntry&) const = default;
};

// Image and product style embeddings produced by one model. Immutable once
// built; lookups are by id.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  EmbeddingStore(std::vector<EmbeddingEntry> images, std::vector<EmbeddingEntry> products,
                 std::string model_checksum);

  const std::vector<EmbeddingEntry>& entries(Scope scope) const {
    return scope == Scope::kImages ? images_ : products_;
  }
  const std::vector<EmbeddingEntry>& images() const { return images_; }
  const std::vector<EmbeddingEntry>& products() const { return products_; }
  const Embedding* find(Scope scope, std::string_view id) const;
  const std::string& model_checksum() const { return model_checksum_; }

  // Products skipped by embed_all because no image targets them.
  std::vector<std::string> excluded_products;

  bool operator==(const EmbeddingStore& o) const {
    return images_ == o.images_ && products_ == o.products_ &&
           model_checksum_ == o.model_checksum_;
  }

 private:
  std::vector<EmbeddingEntry> images_;
  std::vector<EmbeddingEntry> products_;
  std::unordered_map<std::string, std::size_t> image_index_;
  std::unordered_map<std::string, std::size_t> product_index_;
  std::string model_checksum_;
};

// Image embedding = model embedding layer output. Product embedding = mean of
// the embeddings of the images whose target it is; products without such
// images are listed in excluded_products.
EmbeddingStore embed_all(const StyleModel& model, const ImageSet& images,
                         const ProductCatalog& catalog);

// Product aggregation rule, kept separate so it can be swapped.
Embedding aggregate_embeddings(std::span<const Embedding> members);

double distance(std::span<const double> a, std::span<const double> b);
inline double distance(const Embedding& a, const Embedding& b) {
  return distance(std::span<const double>(a), std::span<const double>(b));
}

struct Neighbor {
  std::string id;
  double distance;

  bool operator==(const Neighbor&) const = default;
};

struct RankedNeighbors {
  std::vector<Neighbor> neighbors;  // ascending distance, then ascending id
  bool truncated = false;           // fewer than k candidates existed

  bool operator==(const RankedNeighbors&) const = default;
};

// The k nearest entries to an arbitrary query, skipping `exclude_id`.
RankedNeighbors nearest(std::span<const EmbeddingEntry> entries, const Embedding& query,
                        std::size_t k, std::optional<std::string_view> exclude_id = {});

// The k nearest entries to a stored seed, excluding the seed itself.
// Throws ValidationError for k == 0 or an unknown seed.
RankedNeighbors top_k(const EmbeddingStore& store, std::string_view seed_id,
                      std::size_t k, Scope scope);

// Fraction of (seed, retrieved image) pairs, over every test seed and its k
// image neighbours, in which the retrieved image's majority style equals the
// seed's. Counting is per retrieved image. Retrieved images without votes are
// not counted.
double retrieval_accuracy(const EmbeddingStore& store, std::span<const std::string> test_ids,
                          const VoteTable& votes, std::size_t k);

// embeddings.jsonl: image lines {"image_id","embedding"} followed by product
// lines {"sku","embedding"}. The first line is a header
// {"model": checksum, "excluded_products": [...]}.
void write_embeddings(const EmbeddingStore& store, const std::filesystem::path& path);
EmbeddingStore read_embeddings(const std::filesystem::path& path);

}  // namespace stylegraph
