#include "finsent/aggregation.hpp"

#include <unordered_set>

#include "finsent/jsonl.hpp"

namespace finsent {

using jsonl::json;

std::pair<Sentiment, int> majority_vote(const std::vector<Sentiment>& labels) {
  if (labels.empty()) {
    throw DataError("majority_vote: empty label list");
  }
  std::array<int, 3> counts{};
  for (Sentiment s : labels) {
    ++counts[static_cast<std::size_t>(s)];
  }
  int max_count = 0;
  int n_modes = 0;
  Sentiment mode = Sentiment::Neutral;
  for (Sentiment s : kAllSentiments) {
    int c = counts[static_cast<std::size_t>(s)];
    if (c > max_count) {
      max_count = c;
      mode = s;
      n_modes = 1;
    } else if (c == max_count) {
      ++n_modes;
    }
  }
  // A tie is maximal uncertainty: abstain to Neutral, keeping the tied
  // count as the agreement.
  if (n_modes > 1) mode = Sentiment::Neutral;
  return {mode, max_count};
}

double soft_score(const std::vector<Sentiment>& labels) {
  if (labels.empty()) {
    throw DataError("soft_score: empty label list");
  }
  long long sum = 0;
  for (Sentiment s : labels) {
    sum += polarity(s);
  }
  return static_cast<double>(sum) / static_cast<double>(labels.size());
}

WeakLabel weak_label(const Post& post, const std::vector<CompletionResult>& paths,
                     const Verbalizer& verbalizer, const std::string& answer_cue) {
  if (paths.empty()) {
    throw DataError("weak_label: no paths for post \"" + post.id + "\"");
  }
  WeakLabel weak;
  weak.post_id = post.id;
  weak.text = post.text;
  weak.ticker = post.ticker;
  for (const CompletionResult& path : paths) {
    auto parsed = parse_completion(path.text, verbalizer, answer_cue);
    if (!parsed) {
      ++weak.n_malformed;
      continue;
    }
    weak.path_labels.push_back(parsed->label);
    weak.cot_summaries.push_back(parsed->cot_summary);
  }
  if (weak.path_labels.empty()) {
    return weak;  // unlabeled marker: every path malformed
  }
  auto [mode, agreement] = majority_vote(weak.path_labels);
  weak.majority = mode;
  weak.agreement = agreement;
  weak.soft_score = soft_score(weak.path_labels);
  return weak;
}

std::vector<WeakLabel> filter_by_agreement(const std::vector<WeakLabel>& weak,
                                           int min_agreement) {
  if (min_agreement < 1) {
    throw DataError("filter_by_agreement: min_agreement must be >= 1");
  }
  std::vector<WeakLabel> kept;
  for (const WeakLabel& w : weak) {
    if (w.labeled() && w.agreement >= min_agreement) kept.push_back(w);
  }
  return kept;
}

std::vector<WeakLabel> load_weak_labels(const std::filesystem::path& path) {
  std::vector<WeakLabel> weak;
  std::unordered_set<std::string> seen;
  jsonl::for_each_object(path, [&](std::size_t line_no, const json& obj) {
    const std::string where = path.string() + ":" + std::to_string(line_no);
    WeakLabel w;
    w.post_id = jsonl::get_string(obj, "id", where);
    if (!seen.insert(w.post_id).second) {
      throw DataError(where + ": duplicate post id \"" + w.post_id + "\"");
    }
    w.text = jsonl::get_string(obj, "text", where);
    w.ticker = jsonl::get_string(obj, "ticker", where);
    auto labels = obj.find("path_labels");
    if (labels == obj.end() || !labels->is_array()) {
      throw DataError(where + ": missing \"path_labels\" array");
    }
    for (const auto& l : *labels) {
      if (!l.is_string()) {
        throw DataError(where + ": \"path_labels\" entries must be strings");
      }
      w.path_labels.push_back(require_sentiment(l.get<std::string>(), where));
    }
    w.n_malformed =
        static_cast<std::size_t>(jsonl::get_number(obj, "n_malformed", where));
    auto majority = obj.find("majority");
    if (majority == obj.end()) {
      throw DataError(where + ": missing \"majority\"");
    }
    if (!majority->is_null()) {
      if (!majority->is_string()) {
        throw DataError(where + ": \"majority\" must be a string or null");
      }
      w.majority = require_sentiment(majority->get<std::string>(), where);
      w.agreement = static_cast<int>(jsonl::get_number(obj, "agreement", where));
      w.soft_score = jsonl::get_number(obj, "soft_score", where);
      if (*w.soft_score < -1.0 || *w.soft_score > 1.0) {
        throw DataError(where + ": soft_score outside [-1, 1]");
      }
      if (w.agreement < 1 ||
          static_cast<std::size_t>(w.agreement) > w.path_labels.size()) {
        throw DataError(where + ": agreement inconsistent with path_labels");
      }
    } else if (!w.path_labels.empty()) {
      throw DataError(where + ": null majority with non-empty path_labels");
    }
    auto cots = obj.find("cots");
    if (cots == obj.end() || !cots->is_array()) {
      throw DataError(where + ": missing \"cots\" array");
    }
    for (const auto& c : *cots) {
      if (!c.is_string()) {
        throw DataError(where + ": \"cots\" entries must be strings");
      }
      w.cot_summaries.push_back(c.get<std::string>());
    }
    weak.push_back(std::move(w));
  });
  return weak;
}

std::string weak_label_line(const WeakLabel& weak) {
  json labels = json::array();
  for (Sentiment s : weak.path_labels) labels.push_back(to_string(s));
  json cots = json::array();
  for (const std::string& c : weak.cot_summaries) cots.push_back(c);
  json obj{{"id", weak.post_id},
           {"text", weak.text},
           {"ticker", weak.ticker},
           {"path_labels", std::move(labels)},
           {"n_malformed", weak.n_malformed},
           {"majority", weak.majority ? json(to_string(*weak.majority))
                                      : json(nullptr)},
           {"agreement", weak.agreement},
           {"soft_score", weak.soft_score ? json(*weak.soft_score)
                                          : json(nullptr)},
           {"cots", std::move(cots)}};
  return obj.dump();
}

void save_weak_labels(const std::filesystem::path& path,
                      const std::vector<WeakLabel>& weak) {
  std::string out;
  for (const WeakLabel& w : weak) {
    out += weak_label_line(w);
    out += '\n';
  }
  jsonl::atomic_write(path, out);
}

}  // namespace finsent
