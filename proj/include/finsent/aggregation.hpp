#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "finsent/corpus.hpp"
#include "finsent/llm_backend.hpp"
#include "finsent/prompting.hpp"

namespace finsent {

// Per-post aggregate of the parsed reasoning paths. A post where every
// path was malformed carries no majority (labeled() is false) and is
// excluded downstream.
struct WeakLabel {
  std::string post_id;
  std::string text;
  std::string ticker;
  std::vector<Sentiment> path_labels;  // parsed paths only, in path order
  std::size_t n_malformed = 0;
  std::optional<Sentiment> majority;
  int agreement = 0;  // paths carrying the modal label (max count on ties)
  std::optional<double> soft_score;  // mean polarity of parsed paths
  std::vector<std::string> cot_summaries;

  bool labeled() const { return majority.has_value(); }
};

// Modal label and its count. Ties resolve to Neutral (the abstain class)
// while keeping the tied maximal count as the agreement.
std::pair<Sentiment, int> majority_vote(const std::vector<Sentiment>& labels);

// Mean of per-label polarities (Negative -1, Neutral 0, Positive +1).
double soft_score(const std::vector<Sentiment>& labels);

// Parses every path, counts malformed ones out of the vote, and aggregates
// the rest.
WeakLabel weak_label(const Post& post, const std::vector<CompletionResult>& paths,
                     const Verbalizer& verbalizer, const std::string& answer_cue);

// Keeps labeled records with agreement >= min_agreement, order preserved.
std::vector<WeakLabel> filter_by_agreement(const std::vector<WeakLabel>& weak,
                                           int min_agreement);

std::vector<WeakLabel> load_weak_labels(const std::filesystem::path& path);
void save_weak_labels(const std::filesystem::path& path,
                      const std::vector<WeakLabel>& weak);

// One JSONL line (no trailing newline) in the weak-label schema; used both
// by save_weak_labels and by the streaming label command.
std::string weak_label_line(const WeakLabel& weak);

}  // namespace finsent
