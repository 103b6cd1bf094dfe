#include "stylegraph/style_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>

#include "io_util.hpp"
#include "json.hpp"
#include "stylegraph/errors.hpp"
#include "stylegraph/random.hpp"

namespace stylegraph {

using nlohmann::json;

namespace {

constexpr const char* kCheckpointFormat = "stylegraph-checkpoint";
constexpr int kCheckpointVersion = 1;

// Per-tower activations kept for backpropagation.
struct Activations {
  std::vector<double> hidden;
  Embedding embedding{};
  StyleScores scores{};
};

void run_tower(const StyleModel& model, std::span<const double> features,
               Activations& act) {
  const std::size_t d = model.input_dim();
  const std::size_t h = model.hidden_dim();
  if (features.size() != d) {
    throw DimensionMismatchError("feature vector has dimension " +
                                     std::to_string(features.size()) +
                                     ", model expects " + std::to_string(d),
                                 d, features.size());
  }
  const auto w1 = model.w1();
  const auto b1 = model.b1();
  const auto w2 = model.w2();
  const auto b2 = model.b2();
  const auto w3 = model.w3();
  const auto b3 = model.b3();

  act.hidden.assign(b1.begin(), b1.end());
  for (std::size_t i = 0; i < d; ++i) {
    const double f = features[i];
    const double* row = &w1[i * h];
    for (std::size_t j = 0; j < h; ++j) act.hidden[j] += f * row[j];
  }
  for (double& v : act.hidden) v = std::tanh(v);

  std::copy(b2.begin(), b2.end(), act.embedding.begin());
  for (std::size_t j = 0; j < h; ++j) {
    const double v = act.hidden[j];
    const double* row = &w2[j * kEmbeddingDim];
    for (std::size_t k = 0; k < kEmbeddingDim; ++k) act.embedding[k] += v * row[k];
  }

  std::copy(b3.begin(), b3.end(), act.scores.begin());
  for (std::size_t k = 0; k < kEmbeddingDim; ++k) {
    const double e = act.embedding[k];
    const double* row = &w3[k * kStyleCount];
    for (std::size_t s = 0; s < kStyleCount; ++s) act.scores[s] += e * row[s];
  }
}

// Backpropagates d loss / d scores[style] = slope through one tower.
void backprop_tower(const StyleModel& model, std::span<const double> features,
                    const Activations& act, std::size_t style, double slope,
                    std::span<double> grad, std::vector<double>& hidden_grad) {
  const std::size_t d = model.input_dim();
  const std::size_t h = model.hidden_dim();
  const auto w2 = model.w2();
  const auto w3 = model.w3();

  double* g_w1 = &grad[model.w1_offset()];
  double* g_b1 = &grad[model.b1_offset()];
  double* g_w2 = &grad[model.w2_offset()];
  double* g_b2 = &grad[model.b2_offset()];
  double* g_w3 = &grad[model.w3_offset()];
  double* g_b3 = &grad[model.b3_offset()];

  Embedding emb_grad{};
  for (std::size_t k = 0; k < kEmbeddingDim; ++k) {
    g_w3[k * kStyleCount + style] += act.embedding[k] * slope;
    emb_grad[k] = w3[k * kStyleCount + style] * slope;
  }
  g_b3[style] += slope;

  hidden_grad.assign(h, 0.0);
  for (std::size_t j = 0; j < h; ++j) {
    const double v = act.hidden[j];
    const double* w_row = &w2[j * kEmbeddingDim];
    double* g_row = &g_w2[j * kEmbeddingDim];
    double acc = 0.0;
    for (std::size_t k = 0; k < kEmbeddingDim; ++k) {
      g_row[k] += v * emb_grad[k];
      acc += w_row[k] * emb_grad[k];
    }
    hidden_grad[j] = acc * (1.0 - v * v);  // tanh'
  }
  for (std::size_t k = 0; k < kEmbeddingDim; ++k) g_b2[k] += emb_grad[k];

  for (std::size_t i = 0; i < d; ++i) {
    const double f = features[i];
    double* g_row = &g_w1[i * h];
    for (std::size_t j = 0; j < h; ++j) g_row[j] += f * hidden_grad[j];
  }
  for (std::size_t j = 0; j < h; ++j) g_b1[j] += hidden_grad[j];
}

void check_label(int label) {
  if (label != 1 && label != -1) {
    throw ValidationError("comparison label must be +1 or -1, got " +
                          std::to_string(label));
  }
}

}  // namespace

// ---------------------------------------------------------------------------

StyleModel::StyleModel(std::size_t input_dim, std::size_t hidden_dim, std::uint64_t seed)
    : input_dim_(input_dim),
      hidden_dim_(hidden_dim),
      seed_(seed),
      params_(parameter_count(input_dim, hidden_dim), 0.0) {
  if (input_dim == 0 || hidden_dim == 0) {
    throw ValidationError("model dimensions must be >= 1");
  }
}

std::size_t StyleModel::parameter_count(std::size_t input_dim, std::size_t hidden_dim) {
  return input_dim * hidden_dim + hidden_dim + hidden_dim * kEmbeddingDim +
         kEmbeddingDim + kEmbeddingDim * kStyleCount + kStyleCount;
}

StyleModel init_model(std::size_t input_dim, std::size_t hidden_dim, std::uint64_t seed) {
  StyleModel model(input_dim, hidden_dim, seed);
  Rng rng(seed);
  auto params = model.parameters();
  auto fill = [&](std::size_t offset, std::size_t count, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = 0; i < count; ++i) params[offset + i] = rng.uniform(-bound, bound);
  };
  fill(model.w1_offset(), input_dim * hidden_dim, input_dim);
  fill(model.w2_offset(), hidden_dim * kEmbeddingDim, hidden_dim);
  fill(model.w3_offset(), kEmbeddingDim * kStyleCount, kEmbeddingDim);
  return model;
}

ForwardResult forward(const StyleModel& model, std::span<const double> features) {
  Activations act;
  run_tower(model, features, act);
  return {act.embedding, act.scores};
}

StyleScores scores_from_embedding(const StyleModel& model, const Embedding& embedding) {
  const auto w3 = model.w3();
  const auto b3 = model.b3();
  StyleScores scores{};
  std::copy(b3.begin(), b3.end(), scores.begin());
  for (std::size_t k = 0; k < kEmbeddingDim; ++k) {
    for (std::size_t s = 0; s < kStyleCount; ++s) scores[s] += embedding[k] * w3[k * kStyleCount + s];
  }
  return scores;
}

StyleScores style_probabilities(const StyleScores& scores) {
  const double top = *std::max_element(scores.begin(), scores.end());
  StyleScores p{};
  double total = 0.0;
  for (std::size_t s = 0; s < kStyleCount; ++s) {
    p[s] = std::exp(scores[s] - top);
    total += p[s];
  }
  for (double& v : p) v /= total;
  return p;
}

double sigmoid(double z) {
  z = std::clamp(z, -kLogisticClamp, kLogisticClamp);
  return 1.0 / (1.0 + std::exp(-z));
}

double comparison_loss(const StyleScores& scores_a, const StyleScores& scores_b,
                       Style style, int label) {
  check_label(label);
  const std::size_t s = style_code(style);
  const double z = std::clamp(-label * (scores_a[s] - scores_b[s]), -kLogisticClamp,
                              kLogisticClamp);
  return std::log1p(std::exp(z));
}

double comparison_loss_slope(double score_diff, int label) {
  check_label(label);
  // dL/dz = sigmoid(z) with z = -label * diff.
  return -label * sigmoid(-label * score_diff);
}

double accumulate_loss_gradient(const StyleModel& model,
                                std::span<const double> features_a,
                                std::span<const double> features_b, Style style,
                                int label, double scale, std::span<double> grad) {
  check_label(label);
  if (grad.size() != model.parameter_count()) {
    throw InvariantError("gradient buffer has the wrong size");
  }
  Activations a;
  Activations b;
  run_tower(model, features_a, a);
  run_tower(model, features_b, b);
  const std::size_t s = style_code(style);
  const double diff = a.scores[s] - b.scores[s];
  const double slope = scale * comparison_loss_slope(diff, label);

  std::vector<double> scratch;
  backprop_tower(model, features_a, a, s, slope, grad, scratch);
  backprop_tower(model, features_b, b, s, -slope, grad, scratch);
  return comparison_loss(a.scores, b.scores, style, label);
}

std::vector<double> loss_gradient(const StyleModel& model,
                                  std::span<const double> features_a,
                                  std::span<const double> features_b, Style style,
                                  int label) {
  std::vector<double> grad(model.parameter_count(), 0.0);
  accumulate_loss_gradient(model, features_a, features_b, style, label, 1.0, grad);
  return grad;
}

// ---------------------------------------------------------------------------
// Training

TrainResult train(StyleModel model, const Dataset& data, const DatasetSplit& split,
                  const TrainConfig& config) {
  if (!(config.learning_rate >= 0.0) || !std::isfinite(config.learning_rate)) {
    throw ValidationError("learning rate must be finite and non-negative");
  }
  if (config.epochs < 1) throw ValidationError("epochs must be >= 1");
  if (config.batch_size < 1) throw ValidationError("batch size must be >= 1");
  if (config.comparisons_per_epoch < 1) {
    throw ValidationError("comparisons per epoch must be >= 1");
  }
  if (model.input_dim() != data.images.dimension()) {
    throw DimensionMismatchError(
        "model input dimension " + std::to_string(model.input_dim()) +
            " does not match feature dimension " +
            std::to_string(data.images.dimension()),
        model.input_dim(), data.images.dimension());
  }

  auto features_of = [&](const std::string& id) -> std::span<const double> {
    return data.images.at(id).features;
  };

  std::vector<ComparisonLabel> validation;
  if (split.validation.size() >= 2 && config.validation_comparisons > 0) {
    try {
      validation = sample_comparisons(split.validation, data.votes,
                                      config.validation_comparisons,
                                      config.threshold_x, derive_seed(config.seed, 2));
    } catch (const SamplingError&) {
      validation.clear();
    }
  }

  TrainHistory history;
  std::vector<double> grad(model.parameter_count());
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto labels = sample_comparisons(
        split.train, data.votes, config.comparisons_per_epoch, config.threshold_x,
        derive_seed(config.seed, 1000 + epoch));

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < labels.size(); start += config.batch_size) {
      const std::size_t end = std::min(labels.size(), start + config.batch_size);
      const double scale = 1.0 / static_cast<double>(end - start);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t i = start; i < end; ++i) {
        const auto& l = labels[i];
        loss_sum += accumulate_loss_gradient(model, features_of(l.image_a),
                                             features_of(l.image_b), l.style, l.label,
                                             scale, grad);
      }
      auto params = model.parameters();
      for (std::size_t p = 0; p < params.size(); ++p) {
        params[p] -= config.learning_rate * grad[p];
      }
    }
    history.train_loss.push_back(loss_sum / static_cast<double>(labels.size()));

    if (validation.empty()) {
      history.validation_accuracy.push_back(std::nullopt);
      continue;
    }
    std::unordered_map<std::string, StyleScores> cache;
    auto scores_of = [&](const std::string& id) -> const StyleScores& {
      auto it = cache.find(id);
      if (it == cache.end()) it = cache.emplace(id, forward(model, features_of(id)).scores).first;
      return it->second;
    };
    std::size_t correct = 0;
    for (const auto& l : validation) {
      const std::size_t s = style_code(l.style);
      const double diff = scores_of(l.image_a)[s] - scores_of(l.image_b)[s];
      if (diff * l.label > 0.0) ++correct;
    }
    history.validation_accuracy.push_back(static_cast<double>(correct) /
                                          static_cast<double>(validation.size()));
  }
  return {std::move(model), std::move(history)};
}

// ---------------------------------------------------------------------------
// Estimation

Style argmax_style(const StyleScores& scores) {
  std::size_t best = 0;
  for (std::size_t s = 1; s < kStyleCount; ++s) {
    if (scores[s] > scores[best]) best = s;
  }
  return style_from_code(best);
}

Style estimate_style(const StyleModel& model, std::span<const double> features) {
  return argmax_style(forward(model, features).scores);
}

EstimationReport evaluate_estimation(const StyleModel& model, const ImageSet& images,
                                     std::span<const std::string> test_ids,
                                     const VoteTable& votes, bool exclude_ties) {
  if (test_ids.empty()) throw ValidationError("empty test set");
  EstimationReport report;
  std::array<std::size_t, kStyleCount> hits{};
  std::size_t total_hits = 0;
  for (const auto& id : test_ids) {
    const MajorityVote truth = votes.majority(id);
    if (truth.tie && exclude_ties) {
      ++report.skipped_ties;
      continue;
    }
    const std::size_t s = style_code(truth.style);
    ++report.support[s];
    ++report.evaluated;
    if (estimate_style(model, images.at(id).features) == truth.style) {
      ++hits[s];
      ++total_hits;
    }
  }
  if (report.evaluated == 0) throw ValidationError("no evaluable test images");
  report.overall = static_cast<double>(total_hits) / static_cast<double>(report.evaluated);
  for (std::size_t s = 0; s < kStyleCount; ++s) {
    if (report.support[s] > 0) {
      report.per_style[s] =
          static_cast<double>(hits[s]) / static_cast<double>(report.support[s]);
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Checkpoints

std::string checkpoint_json(const StyleModel& model) {
  auto arr = [](std::span<const double> values) {
    return json(std::vector<double>(values.begin(), values.end()));
  };
  json doc = {
      {"format", kCheckpointFormat},
      {"version", kCheckpointVersion},
      {"input_dim", model.input_dim()},
      {"hidden_dim", model.hidden_dim()},
      {"embedding_dim", kEmbeddingDim},
      {"style_count", kStyleCount},
      {"seed", model.seed()},
      {"w1", arr(model.w1())},
      {"b1", arr(model.b1())},
      {"w2", arr(model.w2())},
      {"b2", arr(model.b2())},
      {"w3", arr(model.w3())},
      {"b3", arr(model.b3())},
  };
  return doc.dump() + "\n";
}

StyleModel model_from_checkpoint_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("format") != kCheckpointFormat) {
      throw ValidationError("not a stylegraph checkpoint");
    }
    if (doc.at("version") != kCheckpointVersion) {
      throw ValidationError("unsupported checkpoint version " + doc.at("version").dump());
    }
    if (doc.at("embedding_dim") != kEmbeddingDim || doc.at("style_count") != kStyleCount) {
      throw ValidationError("checkpoint head shape does not match this build");
    }
    StyleModel model(doc.at("input_dim").get<std::size_t>(),
                     doc.at("hidden_dim").get<std::size_t>(),
                     doc.at("seed").get<std::uint64_t>());
    auto params = model.parameters();
    auto load = [&](const char* key, std::size_t offset, std::size_t count) {
      const auto& values = doc.at(key);
      if (!values.is_array() || values.size() != count) {
        throw ValidationError(std::string("checkpoint array '") + key +
                              "' has the wrong length");
      }
      for (std::size_t i = 0; i < count; ++i) {
        const double v = values[i].get<double>();
        if (!std::isfinite(v)) throw ValidationError("non-finite checkpoint parameter");
        params[offset + i] = v;
      }
    };
    const std::size_t d = model.input_dim();
    const std::size_t h = model.hidden_dim();
    load("w1", model.w1_offset(), d * h);
    load("b1", model.b1_offset(), h);
    load("w2", model.w2_offset(), h * kEmbeddingDim);
    load("b2", model.b2_offset(), kEmbeddingDim);
    load("w3", model.w3_offset(), kEmbeddingDim * kStyleCount);
    load("b3", model.b3_offset(), kStyleCount);
    return model;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const StyleModel& model, const std::filesystem::path& path) {
  detail::write_text_file(path, checkpoint_json(model));
}

StyleModel load_checkpoint(const std::filesystem::path& path) {
  return model_from_checkpoint_json(detail::read_text_file(path));
}

std::string model_checksum(const StyleModel& model) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : checkpoint_json(model)) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace stylegraph
