#include <algorithm>

#include "doctest.h"
#include "fixtures.hpp"
#include "stylegraph/catalog.hpp"
#include "stylegraph/errors.hpp"

using namespace stylegraph;

TEST_SUITE("catalog") {

TEST_CASE("style codes and names") {
  CHECK(style_code(Style::kModern) == 0);
  CHECK(style_code(Style::kCoastal) == 3);
  for (Style s : kAllStyles) {
    CHECK(style_from_code(style_code(s)) == s);
    CHECK(parse_style(style_name(s)) == s);
    CHECK_FALSE(style_description(s).furniture.empty());
  }
  CHECK_FALSE(parse_style("baroque").has_value());
  CHECK_THROWS_AS(style_from_code(4), ValidationError);
}

TEST_CASE("load three well-formed files") {
  fixtures::TempDir dir("catalog");
  CatalogPaths paths{dir / "p.jsonl", dir / "i.jsonl", dir / "v.jsonl"};
  fixtures::write(paths.products,
                  "{\"sku\":\"A\",\"group\":\"Beds\"}\n{\"sku\":\"B\",\"group\":\"Sofas\",\"name\":\"b\"}\n");
  fixtures::write(paths.images,
                  "{\"image_id\":\"i1\",\"skus\":[\"A\"],\"features\":[1,2]}\n"
                  "{\"image_id\":\"i2\",\"skus\":[\"B\",\"A\"],\"features\":[3,4]}\n");
  fixtures::write(paths.votes,
                  "{\"image_id\":\"i1\",\"expert_id\":\"e1\",\"style\":\"modern\"}\n"
                  "{\"image_id\":\"i1\",\"expert_id\":\"e2\",\"style\":\"modern\"}\n"
                  "{\"image_id\":\"i2\",\"expert_id\":\"e1\",\"style\":\"cottage\"}\n"
                  "\n"
                  "{\"image_id\":\"i2\",\"expert_id\":\"e2\",\"style\":\"coastal\"}\n");
  const Dataset d = load_catalog(paths);
  CHECK(d.catalog.size() == 2);
  CHECK(d.images.size() == 2);
  CHECK(d.votes.size() == 4);
  CHECK(d.catalog.at("B").display_name == std::optional<std::string>("b"));
  CHECK(d.images.at("i2").target_sku() == "B");
  CHECK(d.images.dimension() == 2);

  SUBCASE("write then load reproduces the dataset") {
    CatalogPaths out{dir / "p2.jsonl", dir / "i2.jsonl", dir / "v2.jsonl"};
    write_catalog(d, out);
    CHECK(load_catalog(out) == d);
  }
}

TEST_CASE("parse errors carry the line number") {
  fixtures::TempDir dir("catalog");
  CatalogPaths paths{dir / "p.jsonl", dir / "i.jsonl", dir / "v.jsonl"};
  fixtures::write(paths.products, "{\"sku\":\"A\",\"group\":\"Beds\"}\n{\"sku\":\"B\",\n");
  fixtures::write(paths.images, "");
  fixtures::write(paths.votes, "");
  try {
    load_catalog(paths);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("missing file is an I/O error") {
  fixtures::TempDir dir("catalog");
  CatalogPaths paths{dir / "nope.jsonl", dir / "i.jsonl", dir / "v.jsonl"};
  CHECK_THROWS_AS(load_catalog(paths), IoError);
}

TEST_CASE("unknown keys are warnings, not errors") {
  fixtures::TempDir dir("catalog");
  CatalogPaths paths{dir / "p.jsonl", dir / "i.jsonl", dir / "v.jsonl"};
  fixtures::write(paths.products, "{\"sku\":\"A\",\"group\":\"Beds\",\"colour\":\"red\"}\n");
  fixtures::write(paths.images, "{\"image_id\":\"i1\",\"skus\":[\"A\"],\"features\":[1]}\n");
  fixtures::write(paths.votes, "");
  const Dataset d = load_catalog(paths);
  // the image also has no votes, which is its own warning
  REQUIRE(d.warnings.size() == 2);
  CHECK(std::count_if(d.warnings.begin(), d.warnings.end(), [](const std::string& w) {
          return w.find("colour") != std::string::npos;
        }) == 1);
}

TEST_CASE("dangling sku names the offender") {
  try {
    assemble_dataset({{"A", "Beds", {}}}, {{"i1", {"X9"}, {1.0}}}, {});
    FAIL("expected a dangling reference");
  } catch (const DanglingReferenceError& e) {
    CHECK(e.ids() == std::vector<std::string>{"X9"});
    CHECK(std::string(e.what()).find("X9") != std::string::npos);
  }
}

TEST_CASE("vote for an unknown image is dangling") {
  CHECK_THROWS_AS(assemble_dataset({{"A", "Beds", {}}}, {{"i1", {"A"}, {1.0}}},
                                   {{"zz", "e1", Style::kModern}}),
                  DanglingReferenceError);
}

TEST_CASE("feature dimensions must agree") {
  std::vector<double> f8(8, 0.0), f16(16, 0.0);
  CHECK_THROWS_AS(assemble_dataset({{"A", "Beds", {}}}, {{"i1", {"A"}, f8}, {"i2", {"A"}, f16}}, {}),
                  DimensionMismatchError);
}

TEST_CASE("non-finite features are rejected") {
  CHECK_THROWS_AS(ImageSet({{"i1", {"A"}, {std::nan("")}}}), ValidationError);
}

TEST_CASE("duplicate skus and votes") {
  CHECK_THROWS_AS(ProductCatalog({{"A", "Beds", {}}, {"A", "Sofas", {}}}), ValidationError);
  const auto report = validate({{"A", "Beds", {}}}, {{"i1", {"A"}, {1.0}}},
                               {{"i1", "e1", Style::kModern}, {"i1", "e1", Style::kCottage}});
  REQUIRE(report.errors.size() == 1);
  CHECK(report.errors[0].kind == IssueKind::kDuplicateVote);
}

TEST_CASE("validation report tallies") {
  const auto report = validate({{"A", "Beds", {}}, {"B", "Beds", {}}, {"C", "Sofas", {}}},
                               {{"i1", {"A"}, {1.0}}},
                               {{"i1", "e1", Style::kModern}, {"i1", "e2", Style::kCoastal}});
  CHECK(report.ok());
  CHECK(report.products_per_group.at("Beds") == 2);
  CHECK(report.votes_per_style == std::array<std::size_t, 4>{1, 0, 0, 1});
}

TEST_CASE("vote counts") {
  std::vector<Vote> votes{{"a", "e1", Style::kModern},
                          {"a", "e2", Style::kModern},
                          {"a", "e3", Style::kCottage}};
  for (int i = 0; i < 10; ++i) votes.push_back({"c", "e" + std::to_string(i), Style::kTraditional});
  const ImageSet images({{"a", {"P"}, {0.0}}, {"b", {"P"}, {0.0}}, {"c", {"P"}, {0.0}}});
  const VoteTable table(votes, images);
  CHECK(vote_counts("a", table) == StyleCounts{2, 0, 1, 0});
  CHECK(vote_counts("b", table) == StyleCounts{0, 0, 0, 0});
  CHECK(vote_counts("c", table) == StyleCounts{0, 10, 0, 0});
  CHECK_THROWS_AS(vote_counts("zz", table), ValidationError);
  CHECK_FALSE(table.has_votes("b"));
}

TEST_CASE("majority style") {
  auto m = majority_from_counts({2, 0, 1, 0});
  CHECK(m.style == Style::kModern);
  CHECK_FALSE(m.tie);
  m = majority_from_counts({3, 3, 0, 0});
  CHECK(m.style == Style::kModern);
  CHECK(m.tie);
  m = majority_from_counts({0, 1, 4, 4});
  CHECK(m.style == Style::kCottage);
  CHECK(m.tie);
  CHECK_THROWS_AS(majority_from_counts({0, 0, 0, 0}), ValidationError);

  const ImageSet images({{"a", {"P"}, {0.0}}});
  const VoteTable table({}, images);
  CHECK_THROWS_AS(majority_style("a", table), NoLabelError);
}

}  // TEST_SUITE
