#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stylegraph/catalog.hpp"

namespace stylegraph {

// Synthetic 4-style benchmark. Every product has a true style; its images
// scatter around the style's cluster mean. Experts vote for the true style
// with probability `fidelity`, otherwise for a uniformly random style.
struct SynthConfig {
  std::size_t products = 400;
  std::size_t images = 1200;
  std::size_t dim = 16;
  std::size_t experts = 10;
  double fidelity = 0.8;
  double separation = 4.0;     // norm of each style's cluster mean
  double product_spread = 0.6; // stddev of a product around its style mean
  double image_spread = 0.4;   // stddev of an image around its product
  double overlap_rate = 0.1;   // chance an image also stages another product
  std::vector<std::string> groups = {"Accent Chairs", "Bar Stools",  "Beds",
                                     "Coffee Tables", "Dining Chairs", "Dining Tables",
                                     "End Tables",    "Sofas"};
  std::uint64_t seed = 42;
};

struct SynthDataset {
  Dataset data;
  // Generating style per product, in catalog order.
  std::vector<Style> true_styles;
};

SynthDataset generate_synthetic(const SynthConfig& config);

}  // namespace stylegraph
