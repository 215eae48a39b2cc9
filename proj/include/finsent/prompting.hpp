#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "finsent/corpus.hpp"

namespace finsent {

// A worked example shown to the model: the post, a TL;DR-style summary of
// its financial arguments, and the label.
struct Demonstration {
  Post post;
  std::string cot_summary;
  Sentiment label = Sentiment::Neutral;
};

// Bidirectional map between labels and the phrases the model completes
// with. phrase() renders the answer for a prompt (expanding {ticker});
// recognize() scans an answer span for the key substrings in canonical
// sentiment order and returns the first hit.
class Verbalizer {
 public:
  Verbalizer();  // default phrasing: price will go up / go down / is uncertain

  Verbalizer(std::array<std::string, 3> phrase_templates,
             std::array<std::string, 3> recognizer_keys);

  std::string phrase(Sentiment s, const std::string& ticker) const;
  std::optional<Sentiment> recognize(const std::string& answer_span) const;

  const std::string& phrase_template(Sentiment s) const {
    return phrase_templates_[static_cast<std::size_t>(s)];
  }
  const std::string& recognizer_key(Sentiment s) const {
    return recognizer_keys_[static_cast<std::size_t>(s)];
  }

 private:
  std::array<std::string, 3> phrase_templates_;  // indexed by Sentiment
  std::array<std::string, 3> recognizer_keys_;
};

struct PromptTemplate {
  std::string task_description;
  std::vector<Demonstration> demonstrations;
  // Prefix rendered before every post, demonstrations and query alike.
  // A "{ticker}" placeholder expands to the post's ticker.
  std::string query_preamble = "Post about {ticker}: ";
  std::string cot_cue = "TL;DR:";
  std::string answer_cue = "Answer:";
};

// Demonstrations non-empty and every sentiment covered; throws DataError
// otherwise.
void validate(const PromptTemplate& tmpl);

struct DemonstrationSelection {
  std::vector<Demonstration> demonstrations;  // in prompt order
  std::vector<std::string> selected_ids;      // for excluding from eval splits
};

// Picks per_class demonstrations for every class present in the pool,
// sampled and ordered deterministically from the seed. Throws DataError
// naming the class when the pool is too small for one.
DemonstrationSelection select_demonstrations(
    const std::vector<Demonstration>& pool, std::size_t per_class,
    std::uint64_t seed);

// Drops every example whose post id is in ids (order preserved).
std::vector<LabeledExample> exclude_ids(
    const std::vector<LabeledExample>& examples,
    const std::vector<std::string>& ids);

// Renders the full few-shot prompt: task description, each demonstration as
// post / cot / answer, then the query post ending exactly at the cot cue.
// Byte-identical output for identical inputs.
std::string build_prompt(const PromptTemplate& tmpl, const Verbalizer& verbalizer,
                         const Post& query);

struct ParsedCompletion {
  std::string cot_summary;
  Sentiment label = Sentiment::Neutral;
};

// Splits a completion at the first answer cue; the prefix (trimmed) is the
// COT summary, the suffix is matched by the verbalizer. nullopt when there
// is no cue or no recognizable phrase.
std::optional<ParsedCompletion> parse_completion(const std::string& completion,
                                                 const Verbalizer& verbalizer,
                                                 const std::string& answer_cue);

// Demonstrations file: LabeledExample schema plus "cot".
std::vector<Demonstration> load_demonstrations(const std::filesystem::path& path);
void save_demonstrations(const std::filesystem::path& path,
                         const std::vector<Demonstration>& demos);

}  // namespace finsent
