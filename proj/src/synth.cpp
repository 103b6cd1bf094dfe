#include "stylegraph/synth.hpp"

#include <cmath>
#include <cstdio>

#include "stylegraph/errors.hpp"
#include "stylegraph/random.hpp"

namespace stylegraph {

namespace {

std::string numbered(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%05zu", prefix, i);
  return buf;
}

}  // namespace

SynthDataset generate_synthetic(const SynthConfig& config) {
  if (config.products == 0 || config.images < config.products) {
    throw ValidationError("synthetic data needs >= 1 product and >= 1 image per product");
  }
  if (config.dim == 0) throw ValidationError("feature dimension must be >= 1");
  if (config.groups.empty()) throw ValidationError("at least one product group is required");
  if (config.fidelity < 0.0 || config.fidelity > 1.0) {
    throw ValidationError("expert fidelity must lie in [0, 1]");
  }

  Rng rng(config.seed);

  std::vector<std::vector<double>> style_means(kStyleCount,
                                               std::vector<double>(config.dim));
  for (auto& mean : style_means) {
    double norm = 0.0;
    for (double& v : mean) {
      v = rng.normal();
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (double& v : mean) v *= config.separation / norm;
  }

  SynthDataset out;
  std::vector<Product> products;
  std::vector<std::vector<double>> centers;
  std::vector<std::vector<std::size_t>> by_style(kStyleCount);
  for (std::size_t i = 0; i < config.products; ++i) {
    const Style style = style_from_code(i % kStyleCount);
    const std::string& group = config.groups[rng.index(config.groups.size())];
    products.push_back({numbered("SKU", i), group, group + " " + std::to_string(i)});
    out.true_styles.push_back(style);
    by_style[style_code(style)].push_back(i);

    std::vector<double> center = style_means[style_code(style)];
    for (double& v : center) v += rng.normal(0.0, config.product_spread);
    centers.push_back(std::move(center));
  }

  std::vector<ImageRecord> images;
  std::vector<Vote> votes;
  for (std::size_t j = 0; j < config.images; ++j) {
    const std::size_t p = j % config.products;
    ImageRecord im;
    im.image_id = numbered("IMG", j);
    im.skus.push_back(products[p].sku);
    const auto& peers = by_style[style_code(out.true_styles[p])];
    if (peers.size() > 1 && rng.bernoulli(config.overlap_rate)) {
      std::size_t other = peers[rng.index(peers.size())];
      if (other != p) im.skus.push_back(products[other].sku);
    }
    im.features = centers[p];
    for (double& v : im.features) v += rng.normal(0.0, config.image_spread);

    for (std::size_t e = 0; e < config.experts; ++e) {
      Style s = out.true_styles[p];
      if (!rng.bernoulli(config.fidelity)) s = style_from_code(rng.index(kStyleCount));
      votes.push_back({im.image_id, numbered("expert", e), s});
    }
    images.push_back(std::move(im));
  }

  out.data = assemble_dataset(std::move(products), std::move(images), std::move(votes));
  return out;
}

}  // namespace stylegraph
