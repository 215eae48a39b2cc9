#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "finsent/sentiment.hpp"

namespace finsent {

// One social-media text about one ticker; the unit of labeling.
struct Post {
  std::string id;
  std::string text;
  std::string ticker;

  bool operator==(const Post&) const = default;
};

struct LabeledExample {
  Post post;
  Sentiment label = Sentiment::Neutral;

  bool operator==(const LabeledExample&) const = default;
};

// A record of the FiQA benchmark: real-valued sentiment score in [-1, 1]
// and possibly several tickers.
struct FiqaRecord {
  std::string id;
  std::string text;
  std::vector<std::string> tickers;
  double score = 0.0;
};

struct SplitRatios {
  double train = 0.8;
  double valid = 0.1;
  double test = 0.1;
};

// Throws DataError unless the ratios are non-negative and sum to 1 within
// 1e-9.
void validate(const SplitRatios& ratios);

struct FiqaDropSummary {
  std::size_t dropped_zero_score = 0;
  std::size_t dropped_multi_ticker = 0;

  std::size_t total() const { return dropped_zero_score + dropped_multi_ticker; }
};

struct GoldResolution {
  std::vector<LabeledExample> gold;
  std::size_t no_majority = 0;  // posts dropped for lack of a strict majority
};

// JSONL loaders. All verify schema per line and report errors as
// "<file>:<line>: <problem>".
std::vector<Post> load_posts(const std::filesystem::path& path);
std::vector<LabeledExample> load_labeled(const std::filesystem::path& path);
std::vector<FiqaRecord> load_fiqa(const std::filesystem::path& path);

// Annotations file: {"id": str, "labels": [str]} with >=1 label per post.
struct Annotation {
  std::string id;
  std::vector<Sentiment> labels;
};
std::vector<Annotation> load_annotations(const std::filesystem::path& path);

void save_posts(const std::filesystem::path& path,
                const std::vector<Post>& posts);
void save_labeled(const std::filesystem::path& path,
                  const std::vector<LabeledExample>& examples);

// Binary conversion of FiQA records: score > 0 -> Positive, score < 0 ->
// Negative. Records with score exactly 0 or more than one ticker are
// dropped (counted, not errors). Output preserves input order.
std::pair<std::vector<LabeledExample>, FiqaDropSummary> convert_fiqa(
    const std::vector<FiqaRecord>& records);

// Disjoint train/valid/test partition. Sizes are floor(n * ratio) with the
// remainder handed out train-first; the permutation is a deterministic
// function of the seed alone.
std::tuple<std::vector<LabeledExample>, std::vector<LabeledExample>,
           std::vector<LabeledExample>>
split_dataset(const std::vector<LabeledExample>& examples,
              const SplitRatios& ratios, std::uint64_t seed);

// Strict-majority adjudication over one post's annotations: the label held
// by more than half the annotators, or nullopt when no such label exists.
std::optional<Sentiment> resolve_gold(const std::vector<Sentiment>& annotations);

}  // namespace finsent
