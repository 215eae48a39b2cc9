#include "finsent/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "finsent/jsonl.hpp"
#include "finsent/rng.hpp"

namespace finsent {

using jsonl::json;

namespace {

std::string at_line(const std::filesystem::path& path, std::size_t line_no) {
  return path.string() + ":" + std::to_string(line_no);
}

Post parse_post(const json& obj, const std::string& where) {
  Post post;
  post.id = jsonl::get_string(obj, "id", where);
  post.text = jsonl::get_string(obj, "text", where);
  post.ticker = jsonl::get_string(obj, "ticker", where);
  if (post.id.empty()) throw DataError(where + ": empty post id");
  if (post.text.empty()) throw DataError(where + ": empty post text");
  return post;
}

void check_unique_id(std::unordered_set<std::string>& seen, const std::string& id,
                     const std::string& where) {
  if (!seen.insert(id).second) {
    throw DataError(where + ": duplicate post id \"" + id + "\"");
  }
}

}  // namespace

void validate(const SplitRatios& ratios) {
  if (ratios.train < 0 || ratios.valid < 0 || ratios.test < 0) {
    throw DataError("split ratios must be non-negative");
  }
  double sum = ratios.train + ratios.valid + ratios.test;
  if (std::abs(sum - 1.0) > 1e-9) {
    throw DataError("split ratios must sum to 1, got " + std::to_string(sum));
  }
}

std::vector<Post> load_posts(const std::filesystem::path& path) {
  std::vector<Post> posts;
  std::unordered_set<std::string> seen;
  jsonl::for_each_object(path, [&](std::size_t line_no, const json& obj) {
    const std::string where = at_line(path, line_no);
    Post post = parse_post(obj, where);
    check_unique_id(seen, post.id, where);
    posts.push_back(std::move(post));
  });
  return posts;
}

std::vector<LabeledExample> load_labeled(const std::filesystem::path& path) {
  std::vector<LabeledExample> examples;
  std::unordered_set<std::string> seen;
  jsonl::for_each_object(path, [&](std::size_t line_no, const json& obj) {
    const std::string where = at_line(path, line_no);
    LabeledExample ex;
    ex.post = parse_post(obj, where);
    check_unique_id(seen, ex.post.id, where);
    ex.label = require_sentiment(jsonl::get_string(obj, "label", where), where);
    examples.push_back(std::move(ex));
  });
  return examples;
}

std::vector<FiqaRecord> load_fiqa(const std::filesystem::path& path) {
  std::vector<FiqaRecord> records;
  std::unordered_set<std::string> seen;
  jsonl::for_each_object(path, [&](std::size_t line_no, const json& obj) {
    const std::string where = at_line(path, line_no);
    FiqaRecord rec;
    rec.id = jsonl::get_string(obj, "id", where);
    rec.text = jsonl::get_string(obj, "text", where);
    check_unique_id(seen, rec.id, where);
    auto it = obj.find("tickers");
    if (it == obj.end() || !it->is_array() || it->empty()) {
      throw DataError(where + ": \"tickers\" must be a non-empty array");
    }
    for (const auto& t : *it) {
      if (!t.is_string()) {
        throw DataError(where + ": \"tickers\" entries must be strings");
      }
      rec.tickers.push_back(t.get<std::string>());
    }
    rec.score = jsonl::get_number(obj, "score", where);
    if (!std::isfinite(rec.score)) {
      throw DataError(where + ": non-finite score");
    }
    records.push_back(std::move(rec));
  });
  return records;
}

std::vector<Annotation> load_annotations(const std::filesystem::path& path) {
  std::vector<Annotation> annotations;
  std::unordered_set<std::string> seen;
  jsonl::for_each_object(path, [&](std::size_t line_no, const json& obj) {
    const std::string where = at_line(path, line_no);
    Annotation ann;
    ann.id = jsonl::get_string(obj, "id", where);
    check_unique_id(seen, ann.id, where);
    auto it = obj.find("labels");
    if (it == obj.end() || !it->is_array() || it->empty()) {
      throw DataError(where + ": \"labels\" must be a non-empty array");
    }
    for (const auto& l : *it) {
      if (!l.is_string()) {
        throw DataError(where + ": \"labels\" entries must be strings");
      }
      ann.labels.push_back(require_sentiment(l.get<std::string>(), where));
    }
    annotations.push_back(std::move(ann));
  });
  return annotations;
}

void save_posts(const std::filesystem::path& path,
                const std::vector<Post>& posts) {
  std::string out;
  for (const Post& post : posts) {
    json obj{{"id", post.id}, {"text", post.text}, {"ticker", post.ticker}};
    out += obj.dump();
    out += '\n';
  }
  jsonl::atomic_write(path, out);
}

void save_labeled(const std::filesystem::path& path,
                  const std::vector<LabeledExample>& examples) {
  std::string out;
  for (const LabeledExample& ex : examples) {
    json obj{{"id", ex.post.id},
             {"text", ex.post.text},
             {"ticker", ex.post.ticker},
             {"label", to_string(ex.label)}};
    out += obj.dump();
    out += '\n';
  }
  jsonl::atomic_write(path, out);
}

std::pair<std::vector<LabeledExample>, FiqaDropSummary> convert_fiqa(
    const std::vector<FiqaRecord>& records) {
  std::vector<LabeledExample> out;
  FiqaDropSummary drops;
  for (const FiqaRecord& rec : records) {
    if (rec.tickers.size() > 1) {
      ++drops.dropped_multi_ticker;
      continue;
    }
    if (rec.score == 0.0) {
      ++drops.dropped_zero_score;
      continue;
    }
    LabeledExample ex;
    ex.post.id = rec.id;
    ex.post.text = rec.text;
    ex.post.ticker = rec.tickers.front();
    ex.label = rec.score > 0.0 ? Sentiment::Positive : Sentiment::Negative;
    out.push_back(std::move(ex));
  }
  return {std::move(out), drops};
}

std::tuple<std::vector<LabeledExample>, std::vector<LabeledExample>,
           std::vector<LabeledExample>>
split_dataset(const std::vector<LabeledExample>& examples,
              const SplitRatios& ratios, std::uint64_t seed) {
  validate(ratios);
  if (examples.empty()) {
    throw DataError("split_dataset: empty input");
  }
  const std::size_t n = examples.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  DetRng rng(splitmix64(seed));
  rng.shuffle(order);

  std::size_t n_train = static_cast<std::size_t>(ratios.train * n);
  std::size_t n_valid = static_cast<std::size_t>(ratios.valid * n);
  std::size_t n_test = static_cast<std::size_t>(ratios.test * n);
  // Remainder from the floors goes train-first.
  std::size_t remainder = n - (n_train + n_valid + n_test);
  std::size_t* const parts[3] = {&n_train, &n_valid, &n_test};
  for (std::size_t i = 0; remainder > 0; ++i, --remainder) {
    ++*parts[i % 3];
  }

  std::vector<LabeledExample> train, valid, test;
  train.reserve(n_train);
  valid.reserve(n_valid);
  test.reserve(n_test);
  for (std::size_t i = 0; i < n; ++i) {
    const LabeledExample& ex = examples[order[i]];
    if (i < n_train) {
      train.push_back(ex);
    } else if (i < n_train + n_valid) {
      valid.push_back(ex);
    } else {
      test.push_back(ex);
    }
  }
  return {std::move(train), std::move(valid), std::move(test)};
}

std::optional<Sentiment> resolve_gold(const std::vector<Sentiment>& annotations) {
  if (annotations.empty()) {
    throw DataError("resolve_gold: empty annotation list");
  }
  std::array<std::size_t, 3> counts{};
  for (Sentiment s : annotations) {
    ++counts[static_cast<std::size_t>(s)];
  }
  for (Sentiment s : kAllSentiments) {
    if (2 * counts[static_cast<std::size_t>(s)] > annotations.size()) {
      return s;
    }
  }
  return std::nullopt;
}

}  // namespace finsent
