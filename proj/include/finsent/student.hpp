#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "finsent/sentiment.hpp"

namespace finsent {

// Sparse L2-normalized representation of a text: (feature index, weight)
// pairs sorted by index, so dot products accumulate in a fixed order.
struct FeatureVector {
  std::vector<std::pair<std::uint32_t, float>> entries;

  double dot_row(const float* row) const;
  double squared_norm() const;
};

struct FeatureConfig {
  std::uint32_t dim = 1u << 18;
  std::uint32_t ngram_min = 2;
  std::uint32_t ngram_max = 4;
  std::uint64_t hash_seed = 0;
};

// Signed feature hashing over byte n-grams, L2-normalized. Texts shorter
// than ngram_min fall back to one whole-text feature so the unit-norm
// contract holds for every non-empty text.
FeatureVector featurize(const std::string& text, const FeatureConfig& config);

enum class LossKind { Classification, Regression };

// Linear model over hashed n-grams. Classification: 3 weight rows +
// biases, softmax output. Regression: 1 row + bias, tanh output.
struct StudentModel {
  LossKind head = LossKind::Regression;
  FeatureConfig features;
  std::vector<float> weights;  // row-major, rows() x features.dim
  std::vector<float> biases;   // rows()

  std::size_t rows() const { return head == LossKind::Classification ? 3 : 1; }
  static StudentModel zeros(LossKind head, const FeatureConfig& config);
};

struct TrainConfig {
  LossKind loss = LossKind::Regression;
  double learning_rate = 1e-4;
  int batch_size = 64;
  int epochs = 10;
  std::uint64_t seed = 0;
  FeatureConfig features;
};

// Classification targets are labels; regression targets are soft scores in
// [-1, 1].
using TrainTarget = std::variant<Sentiment, double>;

struct TrainExample {
  std::string text;
  TrainTarget target;
};

struct TrainResult {
  StudentModel model;
  std::vector<double> epoch_loss;  // mean per-example loss per epoch
};

// Minibatch SGD: cross-entropy over softmax for classification, squared
// error against tanh output for regression. Initialization and per-epoch
// shuffling are deterministic functions of config.seed.
TrainResult train(const std::vector<TrainExample>& examples,
                  const TrainConfig& config);

// Scalar polarity score in [-1, 1]: tanh output for regression models,
// P(positive) - P(negative) for classification models.
double predict_score(const StudentModel& model, const std::string& text);

struct DecisionThresholds {
  double tau_pos = 1.0 / 3.0;
  double tau_neg = -1.0 / 3.0;
};

void validate(const DecisionThresholds& thresholds);

// Positive if score >= tau_pos, Negative if score <= tau_neg, else Neutral.
Sentiment predict_label(const StudentModel& model, const std::string& text,
                        const DecisionThresholds& thresholds);
Sentiment label_from_score(double score, const DecisionThresholds& thresholds);

// Compares the analytic loss gradient against central finite differences
// over a random subset of the touched coordinates (plus the bias); returns
// the maximum relative deviation.
double gradient_check(const StudentModel& model, const TrainExample& example,
                      double epsilon, std::uint64_t seed = 0,
                      std::size_t max_coords = 32);

// Per-example loss and gradient norm, exposed for the stationarity check.
double loss_value(const StudentModel& model, const TrainExample& example);
double gradient_norm(const StudentModel& model, const TrainExample& example);

// Versioned binary model file ("FSM1", little-endian header + float32
// weights). Writing then reading reproduces predictions bit-exactly.
void save_model(const std::filesystem::path& path, const StudentModel& model);
StudentModel load_model(const std::filesystem::path& path);

// Grid-searches (tau_neg <= tau_pos) maximizing labeled accuracy over
// (score, gold) pairs; used to fit an operating point on a validation split.
DecisionThresholds fit_thresholds(const std::vector<double>& scores,
                                  const std::vector<Sentiment>& golds);

}  // namespace finsent
