#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace stylegraph {

// Interior style categories. The integer codes are stable and used for
// tie-breaking everywhere a "lowest style" rule applies.
enum class Style : std::uint8_t {
  kModern = 0,
  kTraditional = 1,
  kCottage = 2,
  kCoastal = 3,
};

inline constexpr std::size_t kStyleCount = 4;
inline constexpr std::array<Style, kStyleCount> kAllStyles = {
    Style::kModern, Style::kTraditional, Style::kCottage, Style::kCoastal};

constexpr std::size_t style_code(Style s) { return static_cast<std::size_t>(s); }
Style style_from_code(std::size_t code);
std::string_view style_name(Style s);
std::optional<Style> parse_style(std::string_view name);

// Descriptive attributes of a style. Opaque metadata; nothing computes on it.
struct StyleDescription {
  std::string_view fabric;
  std::string_view color_scheme;
  std::string_view furniture;
  std::string_view material;
  std::string_view flooring;
};
const StyleDescription& style_description(Style s);

using StyleCounts = std::array<int, kStyleCount>;

struct Product {
  std::string sku;
  std::string group;
  std::optional<std::string> display_name;

  bool operator==(const Product&) const = default;
};

struct ImageRecord {
  std::string image_id;
  std::vector<std::string> skus;  // first entry is the target product
  std::vector<double> features;

  const std::string& target_sku() const { return skus.front(); }
  bool operator==(const ImageRecord&) const = default;
};

struct Vote {
  std::string image_id;
  std::string expert_id;
  Style style;

  bool operator==(const Vote&) const = default;
};

class ProductCatalog {
 public:
  ProductCatalog() = default;
  // Throws ValidationError on an empty or duplicate sku or an empty group.
  explicit ProductCatalog(std::vector<Product> products);

  const std::vector<Product>& products() const { return products_; }
  std::size_t size() const { return products_.size(); }
  const Product* find(std::string_view sku) const;
  const Product& at(std::string_view sku) const;
  bool contains(std::string_view sku) const { return find(sku) != nullptr; }
  // Distinct group names, sorted.
  std::vector<std::string> groups() const;

  bool operator==(const ProductCatalog& o) const { return products_ == o.products_; }

 private:
  std::vector<Product> products_;
  std::unordered_map<std::string, std::size_t> index_;
};

class ImageSet {
 public:
  ImageSet() = default;
  // Requires unique ids, non-empty sku lists and one common finite feature
  // dimension >= 1. Sku resolution is checked by the dataset assembly.
  explicit ImageSet(std::vector<ImageRecord> images);

  const std::vector<ImageRecord>& images() const { return images_; }
  std::size_t size() const { return images_.size(); }
  std::size_t dimension() const { return dimension_; }
  const ImageRecord* find(std::string_view image_id) const;
  const ImageRecord& at(std::string_view image_id) const;
  bool contains(std::string_view image_id) const { return find(image_id) != nullptr; }
  std::vector<std::string> ids() const;

  bool operator==(const ImageSet& o) const { return images_ == o.images_; }

 private:
  std::vector<ImageRecord> images_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t dimension_ = 0;
};

struct MajorityVote {
  Style style;
  bool tie;  // several styles shared the maximal count
};

// Expert votes, indexed per image. Knows the image universe so lookups of
// unknown images fail instead of silently reading as "no votes".
class VoteTable {
 public:
  VoteTable() = default;
  // Throws on a vote for an unknown image or a repeated (image, expert).
  VoteTable(std::vector<Vote> votes, const ImageSet& images);

  const std::vector<Vote>& votes() const { return votes_; }
  std::size_t size() const { return votes_.size(); }

  StyleCounts counts(std::string_view image_id) const;
  MajorityVote majority(std::string_view image_id) const;
  bool has_votes(std::string_view image_id) const;

  bool operator==(const VoteTable& o) const { return votes_ == o.votes_; }

 private:
  std::vector<Vote> votes_;
  std::unordered_map<std::string, StyleCounts> counts_;
};

// Per-image vote counts; sum equals the number of experts who voted on it.
StyleCounts vote_counts(std::string_view image_id, const VoteTable& votes);

// Style with the strictly maximal count; ties go to the lowest style code
// and set the tie flag. Throws NoLabelError when the image has no votes.
MajorityVote majority_style(std::string_view image_id, const VoteTable& votes);
MajorityVote majority_from_counts(const StyleCounts& counts);

enum class IssueKind {
  kDuplicateId,
  kEmptyField,
  kDanglingReference,
  kDimensionMismatch,
  kNonFiniteFeature,
  kDuplicateVote,
};

struct ValidationIssue {
  IssueKind kind;
  std::string message;
  std::vector<std::string> ids;
};

struct ValidationReport {
  std::vector<ValidationIssue> errors;
  std::vector<std::string> warnings;
  std::map<std::string, std::size_t> products_per_group;
  std::array<std::size_t, kStyleCount> votes_per_style{};

  bool ok() const { return errors.empty(); }
};

// Checks every dataset invariant and reports all violations at once.
ValidationReport validate(const std::vector<Product>& products,
                          const std::vector<ImageRecord>& images,
                          const std::vector<Vote>& votes);

struct Dataset {
  ProductCatalog catalog;
  ImageSet images;
  VoteTable votes;
  std::vector<std::string> warnings;

  bool operator==(const Dataset& o) const {
    return catalog == o.catalog && images == o.images && votes == o.votes;
  }
};

// Validates and cross-links. On failure throws DanglingReferenceError,
// DimensionMismatchError or ValidationError, in that order of preference.
Dataset assemble_dataset(std::vector<Product> products,
                         std::vector<ImageRecord> images,
                         std::vector<Vote> votes,
                         std::vector<std::string> warnings = {});

struct CatalogPaths {
  std::filesystem::path products;
  std::filesystem::path images;
  std::filesystem::path votes;
};

// Reads the three JSON-lines files. Unknown keys are tolerated and reported
// as warnings; blank lines are skipped.
Dataset load_catalog(const CatalogPaths& paths);

// Parsing stage only, no cross-validation. Used by `validate`.
struct RawDataset {
  std::vector<Product> products;
  std::vector<ImageRecord> images;
  std::vector<Vote> votes;
  std::vector<std::string> warnings;
};
RawDataset read_raw_dataset(const CatalogPaths& paths);

void write_catalog(const Dataset& data, const CatalogPaths& paths);

}  // namespace stylegraph
