#include "stylegraph/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "json.hpp"

#include "io_util.hpp"
#include "stylegraph/errors.hpp"

namespace stylegraph {

namespace {

using nlohmann::json;

constexpr std::array<std::string_view, kStyleCount> kStyleNames = {
    "modern", "traditional", "cottage", "coastal"};

const std::array<StyleDescription, kStyleCount> kStyleDescriptions = {{
    {"heavy texture, leathers, linens",
     "muted solids in neutrals, greys and blacks",
     "sleek, low to the ground, clean lines, straight legs on base", "mixed",
     "stripes or natural fiber rugs such as jute or sisal"},
    {"damask or jacquard, velvet or silk, chintz or florals",
     "blue, dark red, hunter green and brown",
     "dark wood, gold accents, antique",
     "marble, gold, cherry or mahogany wood", "ornately patterned carpets"},
    {"soft florals, linen, checks and gingham, toile",
     "muted blues, pinks, reds and greens, white, pale yellows, soft greens",
     "slightly distressed, vintage inspired, skirted sofas or chairs, "
     "feminine accents, wooden signs",
     "white washed or cherry wood, straw baskets and worn metals",
     "braided cotton, soft floral or checked rugs"},
    {"linen, stripes, nautical", "blue, white, red, green",
     "whitewashed, distressed, beadboard accents, bamboo and rattan",
     "reclaimed or painted wood, seeded glass or beach glass, beach wood",
     "stripes or woven, seascape prints, sisal or jute"},
}};

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

}  // namespace

Style style_from_code(std::size_t code) {
  if (code >= kStyleCount) {
    throw ValidationError("style code out of range: " + std::to_string(code));
  }
  return static_cast<Style>(code);
}

std::string_view style_name(Style s) { return kStyleNames[style_code(s)]; }

std::optional<Style> parse_style(std::string_view name) {
  for (Style s : kAllStyles) {
    if (style_name(s) == name) return s;
  }
  return std::nullopt;
}

const StyleDescription& style_description(Style s) {
  return kStyleDescriptions[style_code(s)];
}

// ---------------------------------------------------------------------------
// ProductCatalog / ImageSet / VoteTable

ProductCatalog::ProductCatalog(std::vector<Product> products)
    : products_(std::move(products)) {
  index_.reserve(products_.size());
  for (std::size_t i = 0; i < products_.size(); ++i) {
    const Product& p = products_[i];
    if (p.sku.empty()) throw ValidationError("product with empty sku");
    if (p.group.empty()) {
      throw ValidationError("product '" + p.sku + "' has an empty group");
    }
    if (!index_.emplace(p.sku, i).second) {
      throw ValidationError("duplicate sku '" + p.sku + "'");
    }
  }
}

const Product* ProductCatalog::find(std::string_view sku) const {
  auto it = index_.find(std::string(sku));
  return it == index_.end() ? nullptr : &products_[it->second];
}

const Product& ProductCatalog::at(std::string_view sku) const {
  const Product* p = find(sku);
  if (!p) {
    throw DanglingReferenceError("unknown sku '" + std::string(sku) + "'",
                                 {std::string(sku)});
  }
  return *p;
}

std::vector<std::string> ProductCatalog::groups() const {
  std::set<std::string> names;
  for (const auto& p : products_) names.insert(p.group);
  return {names.begin(), names.end()};
}

ImageSet::ImageSet(std::vector<ImageRecord> images) : images_(std::move(images)) {
  index_.reserve(images_.size());
  for (std::size_t i = 0; i < images_.size(); ++i) {
    const ImageRecord& im = images_[i];
    if (im.image_id.empty()) throw ValidationError("image with empty image_id");
    if (im.skus.empty()) {
      throw ValidationError("image '" + im.image_id + "' lists no skus");
    }
    if (im.features.empty()) {
      throw ValidationError("image '" + im.image_id + "' has no features");
    }
    if (i == 0) {
      dimension_ = im.features.size();
    } else if (im.features.size() != dimension_) {
      throw DimensionMismatchError(
          "image '" + im.image_id + "' has feature dimension " +
              std::to_string(im.features.size()) + ", expected " +
              std::to_string(dimension_),
          dimension_, im.features.size());
    }
    for (double f : im.features) {
      if (!std::isfinite(f)) {
        throw ValidationError("image '" + im.image_id + "' has a non-finite feature");
      }
    }
    if (!index_.emplace(im.image_id, i).second) {
      throw ValidationError("duplicate image_id '" + im.image_id + "'");
    }
  }
}

const ImageRecord* ImageSet::find(std::string_view image_id) const {
  auto it = index_.find(std::string(image_id));
  return it == index_.end() ? nullptr : &images_[it->second];
}

const ImageRecord& ImageSet::at(std::string_view image_id) const {
  const ImageRecord* im = find(image_id);
  if (!im) {
    throw DanglingReferenceError("unknown image_id '" + std::string(image_id) + "'",
                                 {std::string(image_id)});
  }
  return *im;
}

std::vector<std::string> ImageSet::ids() const {
  std::vector<std::string> out;
  out.reserve(images_.size());
  for (const auto& im : images_) out.push_back(im.image_id);
  return out;
}

VoteTable::VoteTable(std::vector<Vote> votes, const ImageSet& images)
    : votes_(std::move(votes)) {
  for (const auto& im : images.images()) counts_.emplace(im.image_id, StyleCounts{});
  std::set<std::pair<std::string, std::string>> seen;
  std::vector<std::string> dangling;
  for (const Vote& v : votes_) {
    auto it = counts_.find(v.image_id);
    if (it == counts_.end()) {
      dangling.push_back(v.image_id);
      continue;
    }
    if (!seen.emplace(v.image_id, v.expert_id).second) {
      throw ValidationError("duplicate vote by expert '" + v.expert_id +
                            "' on image '" + v.image_id + "'");
    }
    ++it->second[style_code(v.style)];
  }
  if (!dangling.empty()) {
    throw DanglingReferenceError(
        "votes reference unknown images: " + join(dangling, ", "), dangling);
  }
}

StyleCounts VoteTable::counts(std::string_view image_id) const {
  auto it = counts_.find(std::string(image_id));
  if (it == counts_.end()) {
    throw DanglingReferenceError("unknown image_id '" + std::string(image_id) + "'",
                                 {std::string(image_id)});
  }
  return it->second;
}

bool VoteTable::has_votes(std::string_view image_id) const {
  const StyleCounts c = counts(image_id);
  return std::any_of(c.begin(), c.end(), [](int n) { return n > 0; });
}

MajorityVote VoteTable::majority(std::string_view image_id) const {
  const StyleCounts c = counts(image_id);
  if (std::all_of(c.begin(), c.end(), [](int n) { return n == 0; })) {
    throw NoLabelError(std::string(image_id));
  }
  return majority_from_counts(c);
}

StyleCounts vote_counts(std::string_view image_id, const VoteTable& votes) {
  return votes.counts(image_id);
}

MajorityVote majority_style(std::string_view image_id, const VoteTable& votes) {
  return votes.majority(image_id);
}

MajorityVote majority_from_counts(const StyleCounts& counts) {
  std::size_t best = 0;
  for (std::size_t s = 1; s < kStyleCount; ++s) {
    if (counts[s] > counts[best]) best = s;
  }
  if (counts[best] <= 0) throw ValidationError("no votes to take a majority of");
  const auto at_max = std::count(counts.begin(), counts.end(), counts[best]);
  return {style_from_code(best), at_max > 1};
}

// ---------------------------------------------------------------------------
// Validation

ValidationReport validate(const std::vector<Product>& products,
                          const std::vector<ImageRecord>& images,
                          const std::vector<Vote>& votes) {
  ValidationReport report;
  auto error = [&](IssueKind kind, std::string msg, std::vector<std::string> ids) {
    report.errors.push_back({kind, std::move(msg), std::move(ids)});
  };

  std::set<std::string> skus;
  for (const auto& p : products) {
    if (p.sku.empty()) error(IssueKind::kEmptyField, "product with empty sku", {});
    if (p.group.empty()) {
      error(IssueKind::kEmptyField, "product '" + p.sku + "' has an empty group",
            {p.sku});
    }
    if (!skus.insert(p.sku).second) {
      error(IssueKind::kDuplicateId, "duplicate sku '" + p.sku + "'", {p.sku});
    }
    ++report.products_per_group[p.group];
  }

  std::set<std::string> image_ids;
  std::vector<std::string> dangling_skus;
  std::set<std::string> targeted;
  std::optional<std::size_t> dim;
  for (const auto& im : images) {
    if (!image_ids.insert(im.image_id).second) {
      error(IssueKind::kDuplicateId, "duplicate image_id '" + im.image_id + "'",
            {im.image_id});
    }
    if (im.skus.empty()) {
      error(IssueKind::kEmptyField, "image '" + im.image_id + "' lists no skus",
            {im.image_id});
    } else {
      targeted.insert(im.skus.front());
    }
    for (const auto& sku : im.skus) {
      if (!skus.count(sku)) dangling_skus.push_back(sku);
    }
    if (im.features.empty()) {
      error(IssueKind::kEmptyField, "image '" + im.image_id + "' has no features",
            {im.image_id});
    } else if (!dim) {
      dim = im.features.size();
    } else if (im.features.size() != *dim) {
      error(IssueKind::kDimensionMismatch,
            "image '" + im.image_id + "' has feature dimension " +
                std::to_string(im.features.size()) + ", expected " +
                std::to_string(*dim),
            {im.image_id});
    }
    if (std::any_of(im.features.begin(), im.features.end(),
                    [](double f) { return !std::isfinite(f); })) {
      error(IssueKind::kNonFiniteFeature,
            "image '" + im.image_id + "' has a non-finite feature", {im.image_id});
    }
  }
  if (!dangling_skus.empty()) {
    std::sort(dangling_skus.begin(), dangling_skus.end());
    dangling_skus.erase(std::unique(dangling_skus.begin(), dangling_skus.end()),
                        dangling_skus.end());
    error(IssueKind::kDanglingReference,
          "images reference unknown skus: " + join(dangling_skus, ", "),
          dangling_skus);
  }

  std::set<std::pair<std::string, std::string>> seen_votes;
  std::set<std::string> voted;
  std::vector<std::string> dangling_images;
  for (const auto& v : votes) {
    ++report.votes_per_style[style_code(v.style)];
    if (!image_ids.count(v.image_id)) dangling_images.push_back(v.image_id);
    voted.insert(v.image_id);
    if (!seen_votes.emplace(v.image_id, v.expert_id).second) {
      error(IssueKind::kDuplicateVote,
            "duplicate vote by expert '" + v.expert_id + "' on image '" +
                v.image_id + "'",
            {v.image_id});
    }
  }
  if (!dangling_images.empty()) {
    std::sort(dangling_images.begin(), dangling_images.end());
    dangling_images.erase(
        std::unique(dangling_images.begin(), dangling_images.end()),
        dangling_images.end());
    error(IssueKind::kDanglingReference,
          "votes reference unknown images: " + join(dangling_images, ", "),
          dangling_images);
  }

  for (const auto& p : products) {
    if (!targeted.count(p.sku)) {
      report.warnings.push_back("product '" + p.sku + "' is the target of no image");
    }
  }
  for (const auto& im : images) {
    if (!voted.count(im.image_id)) {
      report.warnings.push_back("image '" + im.image_id + "' has no votes");
    }
  }
  return report;
}

Dataset assemble_dataset(std::vector<Product> products,
                         std::vector<ImageRecord> images, std::vector<Vote> votes,
                         std::vector<std::string> warnings) {
  const ValidationReport report = validate(products, images, votes);
  if (!report.ok()) {
    for (const auto& e : report.errors) {
      if (e.kind == IssueKind::kDanglingReference) {
        throw DanglingReferenceError(e.message, e.ids);
      }
    }
    for (const auto& e : report.errors) {
      if (e.kind == IssueKind::kDimensionMismatch) {
        ImageSet typed_check(images);  // throws DimensionMismatchError
      }
    }
    std::vector<std::string> messages;
    for (const auto& e : report.errors) messages.push_back(e.message);
    throw ValidationError(join(messages, "; "));
  }
  Dataset data;
  data.catalog = ProductCatalog(std::move(products));
  data.images = ImageSet(std::move(images));
  data.votes = VoteTable(std::move(votes), data.images);
  data.warnings = std::move(warnings);
  data.warnings.insert(data.warnings.end(), report.warnings.begin(),
                       report.warnings.end());
  return data;
}

// ---------------------------------------------------------------------------
// JSON-lines I/O

namespace {

template <typename Fn>
void for_each_record(const std::filesystem::path& path, Fn&& fn) {
  const std::string text = detail::read_text_file(path);
  const auto lines = detail::split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(path.string(), i + 1, e.what());
    }
    if (!record.is_object()) {
      throw ParseError(path.string(), i + 1, "record is not a JSON object");
    }
    try {
      fn(record, i + 1);
    } catch (const json::exception& e) {
      throw ParseError(path.string(), i + 1, e.what());
    }
  }
}

std::string require_string(const json& record, const char* key,
                           const std::filesystem::path& path, std::size_t line) {
  auto it = record.find(key);
  if (it == record.end() || !it->is_string()) {
    throw ParseError(path.string(), line,
                     std::string("missing or non-string field '") + key + "'");
  }
  return it->get<std::string>();
}

void warn_unknown_keys(const json& record, std::initializer_list<std::string_view> known,
                       const std::filesystem::path& path, std::size_t line,
                       std::vector<std::string>& warnings) {
  for (const auto& [key, value] : record.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      warnings.push_back(path.filename().string() + ":" + std::to_string(line) +
                         ": unknown key '" + key + "' ignored");
    }
  }
}

}  // namespace

RawDataset read_raw_dataset(const CatalogPaths& paths) {
  RawDataset raw;

  for_each_record(paths.products, [&](const json& r, std::size_t line) {
    Product p;
    p.sku = require_string(r, "sku", paths.products, line);
    p.group = require_string(r, "group", paths.products, line);
    if (auto it = r.find("name"); it != r.end() && !it->is_null()) {
      if (!it->is_string()) {
        throw ParseError(paths.products.string(), line, "field 'name' is not a string");
      }
      p.display_name = it->get<std::string>();
    }
    warn_unknown_keys(r, {"sku", "group", "name"}, paths.products, line, raw.warnings);
    raw.products.push_back(std::move(p));
  });

  for_each_record(paths.images, [&](const json& r, std::size_t line) {
    ImageRecord im;
    im.image_id = require_string(r, "image_id", paths.images, line);
    auto skus = r.find("skus");
    if (skus == r.end() || !skus->is_array()) {
      throw ParseError(paths.images.string(), line, "missing array field 'skus'");
    }
    for (const auto& s : *skus) {
      if (!s.is_string()) {
        throw ParseError(paths.images.string(), line, "non-string entry in 'skus'");
      }
      im.skus.push_back(s.get<std::string>());
    }
    auto features = r.find("features");
    if (features == r.end() || !features->is_array()) {
      throw ParseError(paths.images.string(), line, "missing array field 'features'");
    }
    im.features.reserve(features->size());
    for (const auto& f : *features) {
      if (!f.is_number()) {
        throw ParseError(paths.images.string(), line, "non-numeric feature value");
      }
      im.features.push_back(f.get<double>());
    }
    warn_unknown_keys(r, {"image_id", "skus", "features"}, paths.images, line,
                      raw.warnings);
    raw.images.push_back(std::move(im));
  });

  for_each_record(paths.votes, [&](const json& r, std::size_t line) {
    Vote v;
    v.image_id = require_string(r, "image_id", paths.votes, line);
    v.expert_id = require_string(r, "expert_id", paths.votes, line);
    const std::string style = require_string(r, "style", paths.votes, line);
    auto parsed = parse_style(style);
    if (!parsed) {
      throw ParseError(paths.votes.string(), line, "unknown style '" + style + "'");
    }
    v.style = *parsed;
    warn_unknown_keys(r, {"image_id", "expert_id", "style"}, paths.votes, line,
                      raw.warnings);
    raw.votes.push_back(std::move(v));
  });

  return raw;
}

Dataset load_catalog(const CatalogPaths& paths) {
  RawDataset raw = read_raw_dataset(paths);
  return assemble_dataset(std::move(raw.products), std::move(raw.images),
                          std::move(raw.votes), std::move(raw.warnings));
}

void write_catalog(const Dataset& data, const CatalogPaths& paths) {
  std::string products;
  for (const auto& p : data.catalog.products()) {
    json r = {{"sku", p.sku}, {"group", p.group}};
    if (p.display_name) r["name"] = *p.display_name;
    products += r.dump() + "\n";
  }
  std::string images;
  for (const auto& im : data.images.images()) {
    json r = {{"image_id", im.image_id}, {"skus", im.skus}, {"features", im.features}};
    images += r.dump() + "\n";
  }
  std::string votes;
  for (const auto& v : data.votes.votes()) {
    json r = {{"image_id", v.image_id},
              {"expert_id", v.expert_id},
              {"style", std::string(style_name(v.style))}};
    votes += r.dump() + "\n";
  }
  detail::write_text_file(paths.products, products);
  detail::write_text_file(paths.images, images);
  detail::write_text_file(paths.votes, votes);
}

}  // namespace stylegraph
