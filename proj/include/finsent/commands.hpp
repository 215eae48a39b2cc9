#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "finsent/aggregation.hpp"
#include "finsent/llm_backend.hpp"
#include "finsent/metrics.hpp"
#include "finsent/prompting.hpp"
#include "finsent/student.hpp"

namespace finsent::cli {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitBackend = 3;

extern const char* kDefaultTaskDescription;

struct PromptOptions {
  std::string task_description;  // empty -> kDefaultTaskDescription
  std::string query_preamble = "Post about {ticker}: ";
  std::string cot_cue = "TL;DR:";
  std::string answer_cue = "Answer:";
  std::string verbalize_positive;  // empty -> Verbalizer defaults
  std::string verbalize_negative;
  std::string verbalize_neutral;
  std::string recognize_positive;
  std::string recognize_negative;
  std::string recognize_neutral;
  std::filesystem::path demos;  // demonstration pool (JSONL with "cot")
  int per_class = 2;

  PromptTemplate make_template(const std::vector<Demonstration>& demos) const;
  Verbalizer make_verbalizer() const;
};

struct BackendOptions {
  std::string kind = "mock";  // mock | http
  std::filesystem::path script;  // mock script JSONL
  int timeout_sec = 30;
  int max_attempts = 3;
  int backoff_initial_ms = 500;
};

struct LabelOptions {
  std::filesystem::path input;   // posts JSONL
  std::filesystem::path output;  // weak-label JSONL
  PromptOptions prompt;
  BackendOptions backend;
  SamplingConfig sampling;
  std::uint64_t seed = 0;
};

struct LabelResult {
  std::size_t posts_labeled = 0;
  std::size_t unlabeled_posts = 0;
  std::size_t malformed_paths = 0;
  std::uint64_t backend_calls = 0;
};

// Weak-labels every input post through the backend. Output streams to
// <output>.partial and is renamed into place only on success; the manifest
// is written either way.
LabelResult cmd_label(const LabelOptions& options,
                      CompletionBackend* backend = nullptr);

struct FilterOptions {
  std::filesystem::path input;
  std::filesystem::path output;
  int min_agreement = 5;
};

struct FilterResult {
  std::size_t kept = 0;
  std::size_t dropped = 0;
};

FilterResult cmd_filter(const FilterOptions& options);

struct TrainCmdOptions {
  std::filesystem::path input;   // weak-label JSONL
  std::filesystem::path output;  // model file
  int min_agreement = 5;
  TrainConfig train;
};

struct TrainCmdResult {
  std::size_t kept = 0;
  std::size_t dropped = 0;
  std::vector<double> epoch_loss;
};

// Filter-then-train: classification mode fits majority labels, regression
// mode fits soft scores.
TrainCmdResult cmd_train(const TrainCmdOptions& options);

struct EvalOptions {
  std::filesystem::path model;
  std::filesystem::path input;   // gold-labeled JSONL
  std::filesystem::path output;  // report JSON; PR CSVs alongside
  DecisionThresholds thresholds;
  std::optional<std::filesystem::path> fit_thresholds_on;  // validation JSONL
  bool quiet = false;
};

// Scores the test file, emits the report JSON plus per-class PR CSVs
// (<output stem>.pr_pos.csv / .pr_neg.csv), prints accuracy and APs.
MetricsReport cmd_eval(const EvalOptions& options);

enum class AblateAxis { Paths, Agreement, Loss };

AblateAxis parse_ablate_axis(const std::string& name);

struct AblateOptions {
  std::filesystem::path input;   // weak-label JSONL
  std::filesystem::path output;  // table file (TSV)
  AblateAxis axis = AblateAxis::Agreement;
  std::filesystem::path golds;   // gold-labeled JSONL (paths/agreement/loss)
  std::vector<int> thresholds = {8, 7, 6, 5};  // agreement axis
  int min_agreement = 5;                       // loss axis
  TrainConfig train;
  DecisionThresholds decision;
};

struct AblateRow {
  std::string name;
  std::vector<double> values;
};

struct AblateResult {
  std::vector<std::string> columns;
  std::vector<AblateRow> rows;
};

// agreement: Table-shaped grid (threshold x loss -> AP, kept counts).
// paths: first-k-paths re-aggregation accuracy for k = 1..n_paths.
// loss: AP summary per loss plus PR curve CSVs for both heads.
AblateResult cmd_ablate(const AblateOptions& options);

struct ReportOptions {
  std::filesystem::path annotations;  // {"id", "labels": [str]} JSONL
  std::filesystem::path posts;        // posts JSONL to join text/ticker
  std::filesystem::path output;       // adjudicated gold JSONL
  bool quiet = false;
};

struct ReportResult {
  double agreement = 0.0;
  std::size_t gold_posts = 0;
  std::size_t no_majority = 0;
};

// Annotation-quality report: pairwise percent agreement plus the
// strict-majority gold set.
ReportResult cmd_report(const ReportOptions& options);

}  // namespace finsent::cli
