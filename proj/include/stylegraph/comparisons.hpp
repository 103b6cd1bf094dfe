#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stylegraph/catalog.hpp"
#include "stylegraph/errors.hpp"

namespace stylegraph {

// One Bradley-Terry training record: for `style`, image_a received more
// (label +1) or fewer (label -1) expert votes than image_b.
struct ComparisonLabel {
  std::string image_a;
  std::string image_b;
  Style style;
  int label;  // +1 or -1

  bool operator==(const ComparisonLabel&) const = default;
};

// +1 when votes_a[style] - votes_b[style] >= x, -1 when <= -x, otherwise
// nullopt (the pair is discarded). Throws on unknown images or x < 1.
std::optional<int> generate_comparison(std::string_view image_a,
                                       std::string_view image_b, Style style,
                                       const VoteTable& votes, int x);

// Same rule on raw counts.
std::optional<int> comparison_from_counts(int votes_a, int votes_b, int x);

struct SplitRatios {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
};

struct DatasetSplit {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
  SplitRatios ratios;
  std::uint64_t seed = 0;

  bool operator==(const DatasetSplit& o) const {
    return train == o.train && validation == o.validation && test == o.test &&
           seed == o.seed;
  }
};

// Partition sizes for n items by the largest-remainder method: floors of
// ratio*n, then the leftover units go to the largest fractional parts, ties
// to the earlier partition.
std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitRatios& ratios);

// Seeded shuffle then slice. Deterministic per seed.
DatasetSplit split_dataset(std::span<const std::string> image_ids,
                           const SplitRatios& ratios, std::uint64_t seed);

inline constexpr std::size_t kRejectionBudgetPerLabel = 1000;

// Draws ordered image pairs and a style uniformly at random from within one
// partition, discards pairs the threshold rule rejects, and keeps going until
// `n` labels are collected. Throws SamplingError after
// n * kRejectionBudgetPerLabel draws. With `style` set only that style's
// label stream is sampled.
std::vector<ComparisonLabel> sample_comparisons(
    std::span<const std::string> partition, const VoteTable& votes, std::size_t n,
    int x, std::uint64_t seed, std::optional<Style> style = std::nullopt);

class SamplingError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

void write_split(const DatasetSplit& split, const std::filesystem::path& path);
DatasetSplit read_split(const std::filesystem::path& path);

// comparisons.jsonl: {"a":..,"b":..,"style":..,"label":1|-1}
void write_comparisons(std::span<const ComparisonLabel> labels,
                       const std::filesystem::path& path);

}  // namespace stylegraph
