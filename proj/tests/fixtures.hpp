#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "stylegraph/catalog.hpp"
#include "stylegraph/random.hpp"

namespace fixtures {

namespace fs = std::filesystem;

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("stylegraph_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline std::string write(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
  return path.string();
}

// Image `id` with one vote per entry of `counts` for the matching style.
inline void add_votes(std::vector<stylegraph::Vote>& votes, const std::string& id,
                      const stylegraph::StyleCounts& counts) {
  int expert = 0;
  for (stylegraph::Style s : stylegraph::kAllStyles) {
    for (int i = 0; i < counts[stylegraph::style_code(s)]; ++i) {
      votes.push_back({id, "e" + std::to_string(expert++), s});
    }
  }
}

// n images "I0".."I{n-1}", one product per image, random vote counts in
// [0, max_votes] per style.
inline stylegraph::Dataset random_votes_dataset(std::size_t n, int max_votes,
                                                std::uint64_t seed) {
  using namespace stylegraph;
  Rng rng(seed);
  std::vector<Product> products;
  std::vector<ImageRecord> images;
  std::vector<Vote> votes;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string sku = "P" + std::to_string(i);
    const std::string id = "I" + std::to_string(i);
    products.push_back({sku, "G", std::nullopt});
    images.push_back({id, {sku}, {rng.normal(), rng.normal()}});
    StyleCounts c{};
    for (auto& v : c) v = static_cast<int>(rng.index(static_cast<std::size_t>(max_votes) + 1));
    add_votes(votes, id, c);
  }
  return assemble_dataset(std::move(products), std::move(images), std::move(votes));
}

}  // namespace fixtures
