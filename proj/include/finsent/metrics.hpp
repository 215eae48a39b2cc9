#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "finsent/sentiment.hpp"

namespace finsent {

// Rows = actual, columns = predicted, both in canonical sentiment order.
struct ConfusionMatrix {
  std::array<std::array<std::int64_t, 3>, 3> counts{};

  std::int64_t total() const;
  std::int64_t trace() const;
  std::int64_t& at(Sentiment actual, Sentiment predicted);
  std::int64_t at(Sentiment actual, Sentiment predicted) const;
};

struct PRPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

struct MetricsReport {
  ConfusionMatrix confusion;
  double accuracy = 0.0;
  std::optional<double> ap_pos;
  std::optional<double> ap_neg;
  std::vector<PRPoint> pr_pos;
  std::vector<PRPoint> pr_neg;
  std::size_t n_examples = 0;

  nlohmann::json to_json() const;
};

ConfusionMatrix confusion(const std::vector<Sentiment>& preds,
                          const std::vector<Sentiment>& golds);

// trace / total.
double accuracy(const ConfusionMatrix& matrix);

// Non-interpolated AP: rank by score descending (ties broken by original
// index), mean of precision at each positive rank.
double average_precision(const std::vector<double>& scores,
                         const std::vector<bool>& positives);

// One point per distinct score threshold, descending; the last point
// predicts everything (recall 1).
std::vector<PRPoint> pr_curve(const std::vector<double>& scores,
                              const std::vector<bool>& positives);

struct PerLabelAp {
  std::optional<double> ap_pos;
  std::optional<double> ap_neg;
};

// AP for the Positive class on the raw scores and for the Negative class
// on negated scores; absent when the class is missing from the golds.
PerLabelAp per_label_ap(const std::vector<Sentiment>& golds,
                        const std::vector<double>& scores);

// Mean over all (post, annotator pair) combinations of the indicator that
// the two labels agree. Every post needs at least two annotations.
double annotator_agreement(const std::vector<std::vector<Sentiment>>& label_sets);

// CSV export, one "threshold,precision,recall" row per point.
void save_pr_csv(const std::filesystem::path& path,
                 const std::vector<PRPoint>& points);

// Shortest round-trip decimal form, for CSV/TSV output.
std::string format_double(double v);

}  // namespace finsent
