#include "finsent/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>

#include "finsent/jsonl.hpp"

namespace finsent {

using nlohmann::json;

std::int64_t ConfusionMatrix::total() const {
  std::int64_t t = 0;
  for (const auto& row : counts) {
    for (std::int64_t c : row) t += c;
  }
  return t;
}

std::int64_t ConfusionMatrix::trace() const {
  return counts[0][0] + counts[1][1] + counts[2][2];
}

std::int64_t& ConfusionMatrix::at(Sentiment actual, Sentiment predicted) {
  return counts[static_cast<std::size_t>(actual)][static_cast<std::size_t>(predicted)];
}

std::int64_t ConfusionMatrix::at(Sentiment actual, Sentiment predicted) const {
  return counts[static_cast<std::size_t>(actual)][static_cast<std::size_t>(predicted)];
}

ConfusionMatrix confusion(const std::vector<Sentiment>& preds,
                          const std::vector<Sentiment>& golds) {
  if (preds.size() != golds.size()) {
    throw DataError("confusion: predictions and golds differ in length");
  }
  if (preds.empty()) {
    throw DataError("confusion: empty input");
  }
  ConfusionMatrix m;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    ++m.at(golds[i], preds[i]);
  }
  return m;
}

double accuracy(const ConfusionMatrix& matrix) {
  std::int64_t total = matrix.total();
  if (total == 0) {
    throw DataError("accuracy: empty confusion matrix");
  }
  return static_cast<double>(matrix.trace()) / static_cast<double>(total);
}

namespace {

// Indices ranked by score descending, ties broken by original position.
std::vector<std::size_t> ranking(const std::vector<double>& scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  return order;
}

std::size_t count_positives(const std::vector<double>& scores,
                            const std::vector<bool>& positives,
                            const char* caller) {
  if (scores.size() != positives.size()) {
    throw DataError(std::string(caller) + ": scores and positives differ in length");
  }
  std::size_t n_pos = 0;
  for (bool p : positives) n_pos += p ? 1 : 0;
  if (n_pos == 0) {
    throw DataError(std::string(caller) + ": no positive examples");
  }
  return n_pos;
}

}  // namespace

double average_precision(const std::vector<double>& scores,
                         const std::vector<bool>& positives) {
  std::size_t n_pos = count_positives(scores, positives, "average_precision");
  std::vector<std::size_t> order = ranking(scores);
  double sum = 0;
  std::size_t tp = 0;
  for (std::size_t rank = 1; rank <= order.size(); ++rank) {
    if (positives[order[rank - 1]]) {
      ++tp;
      sum += static_cast<double>(tp) / static_cast<double>(rank);
    }
  }
  return sum / static_cast<double>(n_pos);
}

std::vector<PRPoint> pr_curve(const std::vector<double>& scores,
                              const std::vector<bool>& positives) {
  std::size_t n_pos = count_positives(scores, positives, "pr_curve");
  std::vector<std::size_t> order = ranking(scores);
  std::vector<PRPoint> points;
  std::size_t tp = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    tp += positives[order[i]] ? 1 : 0;
    // Emit one point per distinct threshold: close the group when the next
    // score differs.
    if (i + 1 < order.size() && scores[order[i + 1]] == scores[order[i]]) {
      continue;
    }
    PRPoint point;
    point.threshold = scores[order[i]];
    point.precision = static_cast<double>(tp) / static_cast<double>(i + 1);
    point.recall = static_cast<double>(tp) / static_cast<double>(n_pos);
    points.push_back(point);
  }
  return points;
}

PerLabelAp per_label_ap(const std::vector<Sentiment>& golds,
                        const std::vector<double>& scores) {
  if (golds.size() != scores.size()) {
    throw DataError("per_label_ap: scores and golds differ in length");
  }
  PerLabelAp result;
  std::vector<bool> is_pos(golds.size());
  std::vector<bool> is_neg(golds.size());
  bool any_pos = false;
  bool any_neg = false;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    is_pos[i] = golds[i] == Sentiment::Positive;
    is_neg[i] = golds[i] == Sentiment::Negative;
    any_pos = any_pos || is_pos[i];
    any_neg = any_neg || is_neg[i];
  }
  if (any_pos) {
    result.ap_pos = average_precision(scores, is_pos);
  }
  if (any_neg) {
    std::vector<double> negated(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) negated[i] = -scores[i];
    result.ap_neg = average_precision(negated, is_neg);
  }
  return result;
}

double annotator_agreement(const std::vector<std::vector<Sentiment>>& label_sets) {
  if (label_sets.empty()) {
    throw DataError("annotator_agreement: no posts");
  }
  std::int64_t pairs = 0;
  std::int64_t agreeing = 0;
  for (std::size_t p = 0; p < label_sets.size(); ++p) {
    const auto& labels = label_sets[p];
    if (labels.size() < 2) {
      throw DataError("annotator_agreement: post " + std::to_string(p) +
                      " has fewer than 2 annotations");
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
      for (std::size_t j = i + 1; j < labels.size(); ++j) {
        ++pairs;
        agreeing += labels[i] == labels[j] ? 1 : 0;
      }
    }
  }
  return static_cast<double>(agreeing) / static_cast<double>(pairs);
}

namespace {

json pr_to_json(const std::vector<PRPoint>& points) {
  json arr = json::array();
  for (const PRPoint& p : points) {
    arr.push_back(json{{"threshold", p.threshold},
                       {"precision", p.precision},
                       {"recall", p.recall}});
  }
  return arr;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

json MetricsReport::to_json() const {
  json conf = json::array();
  for (const auto& row : confusion.counts) {
    conf.push_back(json{row[0], row[1], row[2]});
  }
  return json{{"n_examples", n_examples},
              {"accuracy", accuracy},
              {"ap_pos", ap_pos ? json(*ap_pos) : json(nullptr)},
              {"ap_neg", ap_neg ? json(*ap_neg) : json(nullptr)},
              {"confusion", std::move(conf)},
              {"label_order", json::array({"negative", "neutral", "positive"})},
              {"pr_pos", pr_to_json(pr_pos)},
              {"pr_neg", pr_to_json(pr_neg)}};
}

void save_pr_csv(const std::filesystem::path& path,
                 const std::vector<PRPoint>& points) {
  std::string out = "threshold,precision,recall\n";
  for (const PRPoint& p : points) {
    out += format_double(p.threshold);
    out += ',';
    out += format_double(p.precision);
    out += ',';
    out += format_double(p.recall);
    out += '\n';
  }
  jsonl::atomic_write(path, out);
}

}  // namespace finsent
