#include "stylegraph/comparisons.hpp"

#include <cmath>
#include <numeric>

#include "io_util.hpp"
#include "json.hpp"
#include "stylegraph/errors.hpp"
#include "stylegraph/random.hpp"

namespace stylegraph {

using nlohmann::json;

std::optional<int> comparison_from_counts(int votes_a, int votes_b, int x) {
  if (x < 1) throw ValidationError("vote threshold x must be >= 1");
  const int diff = votes_a - votes_b;
  if (diff >= x) return 1;
  if (diff <= -x) return -1;
  return std::nullopt;
}

std::optional<int> generate_comparison(std::string_view image_a,
                                       std::string_view image_b, Style style,
                                       const VoteTable& votes, int x) {
  if (x < 1) throw ValidationError("vote threshold x must be >= 1");
  if (image_a == image_b) {
    throw ValidationError("cannot compare image '" + std::string(image_a) +
                          "' with itself");
  }
  const StyleCounts a = votes.counts(image_a);
  const StyleCounts b = votes.counts(image_b);
  return comparison_from_counts(a[style_code(style)], b[style_code(style)], x);
}

std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitRatios& ratios) {
  const std::array<double, 3> r = {ratios.train, ratios.validation, ratios.test};
  for (double v : r) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ValidationError("split ratios must be positive");
    }
  }
  if (std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9) {
    throw ValidationError("split ratios must sum to 1");
  }
  std::array<std::size_t, 3> sizes{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double quota = r[i] * static_cast<double>(n);
    sizes[i] = static_cast<std::size_t>(std::floor(quota));
    remainder[i] = quota - std::floor(quota);
    assigned += sizes[i];
  }
  std::array<std::size_t, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return remainder[a] > remainder[b];
  });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++sizes[order[k % 3]];
  return sizes;
}

DatasetSplit split_dataset(std::span<const std::string> image_ids,
                           const SplitRatios& ratios, std::uint64_t seed) {
  if (image_ids.empty()) throw ValidationError("cannot split an empty image set");
  const auto sizes = split_sizes(image_ids.size(), ratios);

  std::vector<std::string> shuffled(image_ids.begin(), image_ids.end());
  Rng rng(derive_seed(seed, 1));
  rng.shuffle(shuffled);

  DatasetSplit split;
  split.ratios = ratios;
  split.seed = seed;
  auto first = shuffled.begin();
  split.train.assign(first, first + sizes[0]);
  first += sizes[0];
  split.validation.assign(first, first + sizes[1]);
  first += sizes[1];
  split.test.assign(first, first + sizes[2]);
  return split;
}

std::vector<ComparisonLabel> sample_comparisons(std::span<const std::string> partition,
                                                const VoteTable& votes, std::size_t n,
                                                int x, std::uint64_t seed,
                                                std::optional<Style> style) {
  if (x < 1) throw ValidationError("vote threshold x must be >= 1");
  if (partition.empty()) throw SamplingError("cannot sample from an empty partition");
  std::vector<ComparisonLabel> labels;
  if (n == 0) return labels;
  if (partition.size() < 2) {
    throw SamplingError("partition of one image yields no pairs");
  }

  std::vector<StyleCounts> counts;
  counts.reserve(partition.size());
  for (const auto& id : partition) counts.push_back(votes.counts(id));

  Rng rng(seed);
  labels.reserve(n);
  const std::size_t budget = n * kRejectionBudgetPerLabel;
  const std::uint64_t m = partition.size();
  for (std::size_t draw = 0; draw < budget && labels.size() < n; ++draw) {
    const std::size_t i = static_cast<std::size_t>(rng.index(m));
    std::size_t j = static_cast<std::size_t>(rng.index(m - 1));
    if (j >= i) ++j;
    const Style s = style ? *style : style_from_code(rng.index(kStyleCount));
    const std::size_t c = style_code(s);
    if (auto label = comparison_from_counts(counts[i][c], counts[j][c], x)) {
      labels.push_back({partition[i], partition[j], s, *label});
    }
  }
  if (labels.size() < n) {
    throw SamplingError("only " + std::to_string(labels.size()) + " of " +
                        std::to_string(n) + " comparisons found within " +
                        std::to_string(budget) + " draws (threshold x=" +
                        std::to_string(x) + ")");
  }
  return labels;
}

void write_split(const DatasetSplit& split, const std::filesystem::path& path) {
  json doc = {
      {"seed", split.seed},
      {"ratios",
       {split.ratios.train, split.ratios.validation, split.ratios.test}},
      {"train", split.train},
      {"validation", split.validation},
      {"test", split.test},
  };
  detail::write_text_file(path, doc.dump(2) + "\n");
}

DatasetSplit read_split(const std::filesystem::path& path) {
  const std::string text = detail::read_text_file(path);
  try {
    const json doc = json::parse(text);
    DatasetSplit split;
    split.seed = doc.at("seed").get<std::uint64_t>();
    const auto& r = doc.at("ratios");
    split.ratios = {r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>()};
    split.train = doc.at("train").get<std::vector<std::string>>();
    split.validation = doc.at("validation").get<std::vector<std::string>>();
    split.test = doc.at("test").get<std::vector<std::string>>();
    return split;
  } catch (const json::exception& e) {
    throw ValidationError("malformed split file '" + path.string() + "': " + e.what());
  }
}

void write_comparisons(std::span<const ComparisonLabel> labels,
                       const std::filesystem::path& path) {
  std::string out;
  for (const auto& l : labels) {
    out += json{{"a", l.image_a},
                {"b", l.image_b},
                {"style", std::string(style_name(l.style))},
                {"label", l.label}}
               .dump();
    out += '\n';
  }
  detail::write_text_file(path, out);
}

}  // namespace stylegraph
