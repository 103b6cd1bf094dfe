#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stylegraph/catalog.hpp"
#include "stylegraph/comparisons.hpp"

namespace stylegraph {

inline constexpr std::size_t kEmbeddingDim = 16;

using Embedding = std::array<double, kEmbeddingDim>;
using StyleScores = std::array<double, kStyleCount>;

// Shared head of the two-tower network:
//
//   hidden    = tanh(f * W1 + b1)        W1: D x H
//   embedding = hidden * W2 + b2         W2: H x 16
//   scores    = embedding * W3 + b3      W3: 16 x 4
//
// All matrices are row-major and live in one flat parameter vector in the
// order W1, b1, W2, b2, W3, b3. Gradients use the same layout.
class StyleModel {
 public:
  StyleModel() = default;
  StyleModel(std::size_t input_dim, std::size_t hidden_dim, std::uint64_t seed = 0);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t hidden_dim() const { return hidden_dim_; }
  std::uint64_t seed() const { return seed_; }

  static std::size_t parameter_count(std::size_t input_dim, std::size_t hidden_dim);
  std::size_t parameter_count() const { return params_.size(); }

  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  std::span<const double> w1() const { return block(w1_offset(), input_dim_ * hidden_dim_); }
  std::span<const double> b1() const { return block(b1_offset(), hidden_dim_); }
  std::span<const double> w2() const { return block(w2_offset(), hidden_dim_ * kEmbeddingDim); }
  std::span<const double> b2() const { return block(b2_offset(), kEmbeddingDim); }
  std::span<const double> w3() const { return block(w3_offset(), kEmbeddingDim * kStyleCount); }
  std::span<const double> b3() const { return block(b3_offset(), kStyleCount); }

  std::size_t w1_offset() const { return 0; }
  std::size_t b1_offset() const { return input_dim_ * hidden_dim_; }
  std::size_t w2_offset() const { return b1_offset() + hidden_dim_; }
  std::size_t b2_offset() const { return w2_offset() + hidden_dim_ * kEmbeddingDim; }
  std::size_t w3_offset() const { return b2_offset() + kEmbeddingDim; }
  std::size_t b3_offset() const { return w3_offset() + kEmbeddingDim * kStyleCount; }

  bool operator==(const StyleModel&) const = default;

 private:
  std::span<const double> block(std::size_t offset, std::size_t n) const {
    return std::span<const double>(params_).subspan(offset, n);
  }

  std::size_t input_dim_ = 0;
  std::size_t hidden_dim_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<double> params_;
};

// Weights uniform on [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero.
StyleModel init_model(std::size_t input_dim, std::size_t hidden_dim, std::uint64_t seed);

struct ForwardResult {
  Embedding embedding;
  StyleScores scores;
};

// Throws DimensionMismatchError when features.size() != input_dim.
ForwardResult forward(const StyleModel& model, std::span<const double> features);

// Style-score layer applied to an embedding (the tail of forward()).
StyleScores scores_from_embedding(const StyleModel& model, const Embedding& embedding);

// Softmax with max subtraction.
StyleScores style_probabilities(const StyleScores& scores);

inline constexpr double kLogisticClamp = 50.0;

// Logistic sigmoid, argument clamped to +-kLogisticClamp.
double sigmoid(double z);

// Bradley-Terry negative log-likelihood of the observed comparison:
// ln(1 + exp(-label * (scores_a[style] - scores_b[style]))).
double comparison_loss(const StyleScores& scores_a, const StyleScores& scores_b,
                       Style style, int label);

// d loss / d (scores_a[style] - scores_b[style]).
double comparison_loss_slope(double score_diff, int label);

// Exact gradient of comparison_loss w.r.t. every parameter, accumulated over
// both towers (they share the parameters). Same layout as parameters().
std::vector<double> loss_gradient(const StyleModel& model,
                                  std::span<const double> features_a,
                                  std::span<const double> features_b, Style style,
                                  int label);

// Adds `scale` times the gradient of one comparison into `grad`; returns the
// comparison's loss. loss_gradient is a thin wrapper over this.
double accumulate_loss_gradient(const StyleModel& model,
                                std::span<const double> features_a,
                                std::span<const double> features_b, Style style,
                                int label, double scale, std::span<double> grad);

struct TrainConfig {
  double learning_rate = 0.01;
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  std::size_t comparisons_per_epoch = 2000;
  std::size_t validation_comparisons = 500;
  int threshold_x = 1;
  std::uint64_t seed = 0;
};

struct TrainHistory {
  std::vector<double> train_loss;  // mean over the epoch's comparisons
  // Fraction of validation comparisons whose sign the model gets right;
  // nullopt when the validation partition yields no comparisons.
  std::vector<std::optional<double>> validation_accuracy;
};

struct TrainResult {
  StyleModel model;
  TrainHistory history;
};

// Plain mini-batch gradient descent on comparisons sampled afresh each epoch
// from the train partition. Deterministic for a given (data, split, config).
TrainResult train(StyleModel model, const Dataset& data, const DatasetSplit& split,
                  const TrainConfig& config);

// Argmax of the scores, ties to the lowest style code.
Style argmax_style(const StyleScores& scores);
Style estimate_style(const StyleModel& model, std::span<const double> features);

struct EstimationReport {
  double overall = 0.0;
  // nullopt for a style no evaluated image has as its majority.
  std::array<std::optional<double>, kStyleCount> per_style{};
  std::array<std::size_t, kStyleCount> support{};
  std::size_t evaluated = 0;
  std::size_t skipped_ties = 0;
};

// Accuracy of estimate_style against the expert majority. With
// `exclude_ties`, images whose majority is a tie are left out.
EstimationReport evaluate_estimation(const StyleModel& model, const ImageSet& images,
                                     std::span<const std::string> test_ids,
                                     const VoteTable& votes, bool exclude_ties = false);

// Checkpoint JSON. Numbers use the shortest round-trip decimal form, so
// save/load is bit-exact.
std::string checkpoint_json(const StyleModel& model);
StyleModel model_from_checkpoint_json(const std::string& text);
void save_checkpoint(const StyleModel& model, const std::filesystem::path& path);
StyleModel load_checkpoint(const std::filesystem::path& path);

// FNV-1a over the checkpoint text, as 16 hex digits.
std::string model_checksum(const StyleModel& model);

}  // namespace stylegraph
