#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "properties.hpp"
#include "stylegraph/comparisons.hpp"
#include "stylegraph/errors.hpp"

using namespace stylegraph;

namespace {

Dataset counts_dataset(const std::vector<StyleCounts>& counts) {
  std::vector<Product> products{{"P", "G", std::nullopt}};
  std::vector<ImageRecord> images;
  std::vector<Vote> votes;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const std::string id = "I" + std::to_string(i);
    images.push_back({id, {"P"}, {0.0}});
    fixtures::add_votes(votes, id, counts[i]);
  }
  return assemble_dataset(std::move(products), std::move(images), std::move(votes));
}

std::vector<std::string> ids(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("I" + std::to_string(i));
  return out;
}

}  // namespace

TEST_SUITE("comparisons") {

TEST_CASE("labels follow the vote differential") {
  const Dataset d = counts_dataset({{3, 0, 0, 1}, {1, 0, 0, 2}, {3, 0, 0, 1}});
  CHECK(generate_comparison("I0", "I1", Style::kModern, d.votes, 1) == 1);
  CHECK(generate_comparison("I0", "I2", Style::kModern, d.votes, 1) == std::nullopt);
  CHECK(generate_comparison("I0", "I2", Style::kModern, d.votes, 5) == std::nullopt);
  CHECK(generate_comparison("I1", "I0", Style::kCoastal, d.votes, 2) == std::nullopt);
  CHECK(generate_comparison("I1", "I0", Style::kCoastal, d.votes, 1) == 1);
  CHECK(generate_comparison("I0", "I1", Style::kCoastal, d.votes, 1) == -1);
  CHECK(generate_comparison("I0", "I1", Style::kModern, d.votes, 2) == 1);
  CHECK(generate_comparison("I0", "I1", Style::kModern, d.votes, 3) == std::nullopt);
}

TEST_CASE("comparison errors") {
  const Dataset d = counts_dataset({{1, 0, 0, 0}, {0, 1, 0, 0}});
  CHECK_THROWS_AS(generate_comparison("I0", "I1", Style::kModern, d.votes, 0), ValidationError);
  CHECK_THROWS_AS(generate_comparison("I0", "nope", Style::kModern, d.votes, 1), ValidationError);
}

TEST_CASE("comparison properties on random cases") {
  const auto failure = properties::check_comparison_suite(200, 11);
  CHECK_MESSAGE(failure.empty(), failure);
}

TEST_CASE("split sizes") {
  CHECK(split_sizes(10, {}) == std::array<std::size_t, 3>{8, 1, 1});
  CHECK(split_sizes(7, {}) == std::array<std::size_t, 3>{5, 1, 1});
  CHECK(split_sizes(1, {}) == std::array<std::size_t, 3>{1, 0, 0});
  CHECK(split_sizes(100, {}) == std::array<std::size_t, 3>{80, 10, 10});
  CHECK_THROWS_AS(split_dataset(std::vector<std::string>{}, {}, 1), ValidationError);
}

TEST_CASE("split sizes agree with an enumerated largest-remainder oracle") {
  // Oracle: floor each quota, then hand the leftover units one by one to the
  // partition with the largest fractional part, earlier partition on ties.
  for (std::size_t n = 1; n <= 60; ++n) {
    const double q[3] = {0.8 * n, 0.1 * n, 0.1 * n};
    std::size_t sizes[3];
    double frac[3];
    std::size_t used = 0;
    for (int i = 0; i < 3; ++i) {
      sizes[i] = static_cast<std::size_t>(std::floor(q[i]));
      frac[i] = q[i] - std::floor(q[i]);
      used += sizes[i];
    }
    bool given[3] = {false, false, false};
    for (std::size_t left = n - used; left > 0; --left) {
      int best = -1;
      for (int i = 0; i < 3; ++i) {
        if (!given[i] && (best < 0 || frac[i] > frac[best])) best = i;
      }
      given[best] = true;
      ++sizes[best];
    }
    CAPTURE(n);
    CHECK(split_sizes(n, {}) == std::array<std::size_t, 3>{sizes[0], sizes[1], sizes[2]});
  }
}

TEST_CASE("split is a deterministic partition") {
  const auto all = ids(50);
  const DatasetSplit a = split_dataset(all, {}, 3);
  const DatasetSplit b = split_dataset(all, {}, 3);
  CHECK(a == b);
  CHECK(a.train.size() == 40);
  std::set<std::string> seen;
  for (const auto* part : {&a.train, &a.validation, &a.test}) seen.insert(part->begin(), part->end());
  CHECK(seen.size() == 50);
  CHECK_FALSE(split_dataset(all, {}, 4) == a);
}

TEST_CASE("split file roundtrip") {
  fixtures::TempDir dir("split");
  const DatasetSplit s = split_dataset(ids(12), {}, 9);
  write_split(s, dir / "s.json");
  CHECK(read_split(dir / "s.json") == s);
}

TEST_CASE("two-image partition yields only its one pair") {
  const Dataset d = counts_dataset({{5, 0, 0, 0}, {0, 5, 0, 0}});
  const auto part = ids(2);
  const auto labels = sample_comparisons(part, d.votes, 4, 1, 1);
  REQUIRE(labels.size() == 4);
  for (const auto& l : labels) {
    CHECK(l.image_a != l.image_b);
    CHECK(l.style != Style::kCottage);
    CHECK(l.style != Style::kCoastal);
    CHECK(generate_comparison(l.image_a, l.image_b, l.style, d.votes, 1) == l.label);
  }
}

TEST_CASE("identical votes exhaust the rejection budget") {
  const Dataset d = counts_dataset({{2, 1, 0, 0}, {2, 1, 0, 0}, {2, 1, 0, 0}});
  CHECK_THROWS_AS(sample_comparisons(ids(3), d.votes, 5, 1, 1), SamplingError);
}

TEST_CASE("sampling is deterministic and respects a fixed style") {
  const Dataset d = fixtures::random_votes_dataset(30, 6, 5);
  const auto part = ids(30);
  const auto a = sample_comparisons(part, d.votes, 100, 1, 8, Style::kCottage);
  const auto b = sample_comparisons(part, d.votes, 100, 1, 8, Style::kCottage);
  CHECK(a == b);
  for (const auto& l : a) CHECK(l.style == Style::kCottage);
}

}  // TEST_SUITE
