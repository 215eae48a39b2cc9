#include "finsent/prompting.hpp"

#include <algorithm>
#include <unordered_set>

#include "finsent/jsonl.hpp"
#include "finsent/rng.hpp"

namespace finsent {

using jsonl::json;

namespace {

std::string expand_ticker(const std::string& text, const std::string& ticker) {
  static const std::string placeholder = "{ticker}";
  std::string out = text;
  std::size_t pos = 0;
  while ((pos = out.find(placeholder, pos)) != std::string::npos) {
    out.replace(pos, placeholder.size(), ticker);
    pos += ticker.size();
  }
  return out;
}

std::string trim(const std::string& s) {
  std::size_t begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  std::size_t end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

Verbalizer::Verbalizer()
    : Verbalizer({"the stock price of {ticker} will go down",
                  "the stock price of {ticker} is uncertain",
                  "the stock price of {ticker} will go up"},
                 {"go down", "uncertain", "go up"}) {}

Verbalizer::Verbalizer(std::array<std::string, 3> phrase_templates,
                       std::array<std::string, 3> recognizer_keys)
    : phrase_templates_(std::move(phrase_templates)),
      recognizer_keys_(std::move(recognizer_keys)) {
  for (Sentiment s : kAllSentiments) {
    const auto i = static_cast<std::size_t>(s);
    if (phrase_templates_[i].empty() || recognizer_keys_[i].empty()) {
      throw DataError("verbalizer: empty phrase or recognizer key for " +
                      to_string(s));
    }
    // Injectivity of the inverse: the phrase for s must hit its own key
    // first when scanned in canonical order.
    for (Sentiment other : kAllSentiments) {
      if (other == s) break;
      if (phrase_templates_[i].find(
              recognizer_keys_[static_cast<std::size_t>(other)]) !=
          std::string::npos) {
        throw DataError("verbalizer: phrase for " + to_string(s) +
                        " matches recognizer key for " + to_string(other));
      }
    }
    if (phrase_templates_[i].find(recognizer_keys_[i]) == std::string::npos) {
      throw DataError("verbalizer: phrase for " + to_string(s) +
                      " does not contain its recognizer key");
    }
  }
}

std::string Verbalizer::phrase(Sentiment s, const std::string& ticker) const {
  return expand_ticker(phrase_templates_[static_cast<std::size_t>(s)], ticker);
}

std::optional<Sentiment> Verbalizer::recognize(
    const std::string& answer_span) const {
  for (Sentiment s : kAllSentiments) {
    if (answer_span.find(recognizer_keys_[static_cast<std::size_t>(s)]) !=
        std::string::npos) {
      return s;
    }
  }
  return std::nullopt;
}

void validate(const PromptTemplate& tmpl) {
  if (tmpl.demonstrations.empty()) {
    throw DataError("prompt template: no demonstrations");
  }
  if (tmpl.cot_cue.empty() || tmpl.answer_cue.empty()) {
    throw DataError("prompt template: empty cue");
  }
  std::array<bool, 3> covered{};
  for (const Demonstration& demo : tmpl.demonstrations) {
    if (demo.cot_summary.empty()) {
      throw DataError("prompt template: demonstration \"" + demo.post.id +
                      "\" has an empty cot summary");
    }
    covered[static_cast<std::size_t>(demo.label)] = true;
  }
  for (Sentiment s : kAllSentiments) {
    if (!covered[static_cast<std::size_t>(s)]) {
      throw DataError("prompt template: no demonstration for class " +
                      to_string(s));
    }
  }
}

DemonstrationSelection select_demonstrations(
    const std::vector<Demonstration>& pool, std::size_t per_class,
    std::uint64_t seed) {
  if (per_class == 0) {
    throw DataError("select_demonstrations: per_class must be >= 1");
  }
  // Classes present in the pool define the task's classes (3 for the
  // three-way task, 2 for binary FiQA).
  std::vector<std::size_t> picked;
  for (Sentiment s : kAllSentiments) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (pool[i].label == s) members.push_back(i);
    }
    if (members.empty()) continue;
    if (members.size() < per_class) {
      throw DataError("select_demonstrations: class " + to_string(s) +
                      " has " + std::to_string(members.size()) +
                      " demonstrations, need " + std::to_string(per_class));
    }
    DetRng rng(derive_seed(seed, static_cast<std::uint64_t>(s)));
    rng.shuffle(members);
    picked.insert(picked.end(), members.begin(), members.begin() + per_class);
  }
  if (picked.empty()) {
    throw DataError("select_demonstrations: empty pool");
  }
  DetRng order_rng(derive_seed(seed, 3));
  order_rng.shuffle(picked);

  DemonstrationSelection selection;
  for (std::size_t i : picked) {
    selection.demonstrations.push_back(pool[i]);
    selection.selected_ids.push_back(pool[i].post.id);
  }
  return selection;
}

std::vector<LabeledExample> exclude_ids(
    const std::vector<LabeledExample>& examples,
    const std::vector<std::string>& ids) {
  std::unordered_set<std::string> banned(ids.begin(), ids.end());
  std::vector<LabeledExample> out;
  out.reserve(examples.size());
  for (const LabeledExample& ex : examples) {
    if (!banned.count(ex.post.id)) out.push_back(ex);
  }
  return out;
}

std::string build_prompt(const PromptTemplate& tmpl, const Verbalizer& verbalizer,
                         const Post& query) {
  validate(tmpl);
  if (query.text.empty()) {
    throw DataError("build_prompt: empty query text");
  }
  std::string prompt = tmpl.task_description;
  prompt += "\n\n";
  for (const Demonstration& demo : tmpl.demonstrations) {
    prompt += expand_ticker(tmpl.query_preamble, demo.post.ticker);
    prompt += demo.post.text;
    prompt += '\n';
    prompt += tmpl.cot_cue;
    prompt += ' ';
    prompt += demo.cot_summary;
    prompt += '\n';
    prompt += tmpl.answer_cue;
    prompt += ' ';
    prompt += verbalizer.phrase(demo.label, demo.post.ticker);
    prompt += "\n\n";
  }
  prompt += expand_ticker(tmpl.query_preamble, query.ticker);
  prompt += query.text;
  prompt += '\n';
  // The prompt ends at the cot cue; the model continues from here.
  prompt += tmpl.cot_cue;
  return prompt;
}

std::optional<ParsedCompletion> parse_completion(const std::string& completion,
                                                 const Verbalizer& verbalizer,
                                                 const std::string& answer_cue) {
  std::size_t cue = completion.find(answer_cue);
  if (cue == std::string::npos) return std::nullopt;
  // Only the answer span feeds the recognizer, so summary wording cannot
  // decide the label.
  std::string answer_span = completion.substr(cue + answer_cue.size());
  auto label = verbalizer.recognize(answer_span);
  if (!label) return std::nullopt;
  ParsedCompletion parsed;
  parsed.cot_summary = trim(completion.substr(0, cue));
  parsed.label = *label;
  return parsed;
}

std::vector<Demonstration> load_demonstrations(
    const std::filesystem::path& path) {
  std::vector<Demonstration> demos;
  std::unordered_set<std::string> seen;
  jsonl::for_each_object(path, [&](std::size_t line_no, const json& obj) {
    const std::string where = path.string() + ":" + std::to_string(line_no);
    Demonstration demo;
    demo.post.id = jsonl::get_string(obj, "id", where);
    demo.post.text = jsonl::get_string(obj, "text", where);
    demo.post.ticker = jsonl::get_string(obj, "ticker", where);
    demo.label = require_sentiment(jsonl::get_string(obj, "label", where), where);
    demo.cot_summary = jsonl::get_string(obj, "cot", where);
    if (demo.post.text.empty()) throw DataError(where + ": empty post text");
    if (demo.cot_summary.empty()) throw DataError(where + ": empty cot summary");
    if (!seen.insert(demo.post.id).second) {
      throw DataError(where + ": duplicate post id \"" + demo.post.id + "\"");
    }
    demos.push_back(std::move(demo));
  });
  return demos;
}

void save_demonstrations(const std::filesystem::path& path,
                         const std::vector<Demonstration>& demos) {
  std::string out;
  for (const Demonstration& demo : demos) {
    json obj{{"id", demo.post.id},
             {"text", demo.post.text},
             {"ticker", demo.post.ticker},
             {"label", to_string(demo.label)},
             {"cot", demo.cot_summary}};
    out += obj.dump();
    out += '\n';
  }
  jsonl::atomic_write(path, out);
}

}  // namespace finsent
