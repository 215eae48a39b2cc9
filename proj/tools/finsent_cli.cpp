#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "finsent/commands.hpp"

namespace {

using namespace finsent;
using namespace finsent::cli;

struct LabelFlags {
  std::string input, output, demos, backend = "mock", script;
  std::string task_description, query_preamble = "Post about {ticker}: ";
  std::string cot_cue = "TL;DR:", answer_cue = "Answer:";
  std::string verbalize_positive, verbalize_negative, verbalize_neutral;
  std::string recognize_positive, recognize_negative, recognize_neutral;
  int per_class = 2;
  int n_paths = 8;
  double temperature = 0.5;
  int max_tokens = 256;
  int parallelism = 1;
  int timeout_sec = 30;
  int max_attempts = 3;
  int backoff_ms = 500;
  std::uint64_t seed = 0;

  LabelOptions to_options() const {
    LabelOptions options;
    options.input = input;
    options.output = output;
    options.seed = seed;
    options.prompt.demos = demos;
    options.prompt.per_class = per_class;
    options.prompt.task_description = task_description;
    options.prompt.query_preamble = query_preamble;
    options.prompt.cot_cue = cot_cue;
    options.prompt.answer_cue = answer_cue;
    options.prompt.verbalize_positive = verbalize_positive;
    options.prompt.verbalize_negative = verbalize_negative;
    options.prompt.verbalize_neutral = verbalize_neutral;
    options.prompt.recognize_positive = recognize_positive;
    options.prompt.recognize_negative = recognize_negative;
    options.prompt.recognize_neutral = recognize_neutral;
    options.backend.kind = backend;
    options.backend.script = script;
    options.backend.timeout_sec = timeout_sec;
    options.backend.max_attempts = max_attempts;
    options.backend.backoff_initial_ms = backoff_ms;
    options.sampling.n_paths = n_paths;
    options.sampling.temperature = temperature;
    options.sampling.max_tokens = max_tokens;
    options.sampling.parallelism = parallelism;
    return options;
  }
};

struct TrainFlags {
  std::string input, output, loss = "regression";
  int min_agreement = 5;
  double learning_rate = 1e-4;
  int batch_size = 64;
  int epochs = 10;
  std::uint64_t seed = 0;
  std::uint32_t dim = 1u << 18;
  std::uint32_t ngram_min = 2;
  std::uint32_t ngram_max = 4;
  std::uint64_t hash_seed = 0;

  TrainConfig to_config() const {
    TrainConfig config;
    config.loss = loss == "classification" ? LossKind::Classification
                                           : LossKind::Regression;
    config.learning_rate = learning_rate;
    config.batch_size = batch_size;
    config.epochs = epochs;
    config.seed = seed;
    config.features.dim = dim;
    config.features.ngram_min = ngram_min;
    config.features.ngram_max = ngram_max;
    config.features.hash_seed = hash_seed;
    return config;
  }
};

void add_train_flags(CLI::App* cmd, TrainFlags& flags) {
  cmd->add_option("--loss", flags.loss, "Training loss")
      ->check(CLI::IsMember({"classification", "regression"}));
  cmd->add_option("--lr", flags.learning_rate, "Learning rate");
  cmd->add_option("--batch-size", flags.batch_size, "Minibatch size");
  cmd->add_option("--epochs", flags.epochs, "Training epochs");
  cmd->add_option("--seed", flags.seed, "Training seed");
  cmd->add_option("--dim", flags.dim, "Hashed feature dimension");
  cmd->add_option("--ngram-min", flags.ngram_min, "Smallest byte n-gram");
  cmd->add_option("--ngram-max", flags.ngram_max, "Largest byte n-gram");
  cmd->add_option("--hash-seed", flags.hash_seed, "Feature hash seed");
}

int run(int argc, char** argv) {
  CLI::App app{"Weak-supervision financial sentiment pipeline"};
  app.set_config("--config", "", "TOML-style config file; CLI flags override it");
  app.require_subcommand(1);

  LabelFlags label;
  CLI::App* label_cmd =
      app.add_subcommand("label", "Weak-label posts with sampled reasoning paths");
  label_cmd->add_option("--input", label.input, "Posts JSONL")->required();
  label_cmd->add_option("--output", label.output, "Weak-label JSONL")->required();
  label_cmd->add_option("--demos", label.demos, "Demonstration pool JSONL")
      ->required();
  label_cmd->add_option("--per-class", label.per_class,
                        "Demonstrations per sentiment class");
  label_cmd->add_option("--backend", label.backend, "Completion backend")
      ->check(CLI::IsMember({"mock", "http"}));
  label_cmd->add_option("--script", label.script, "Mock backend script JSONL");
  label_cmd->add_option("--n-paths", label.n_paths, "Reasoning paths per post");
  label_cmd->add_option("--temperature", label.temperature, "Sampling temperature");
  label_cmd->add_option("--max-tokens", label.max_tokens, "Max completion tokens");
  label_cmd->add_option("--parallelism", label.parallelism,
                        "Posts labeled concurrently");
  label_cmd->add_option("--seed", label.seed, "Base sampling seed");
  label_cmd->add_option("--task-description", label.task_description,
                        "Prompt task description (default built in)");
  label_cmd->add_option("--query-preamble", label.query_preamble,
                        "Prefix before each post; {ticker} expands");
  label_cmd->add_option("--cot-cue", label.cot_cue, "Chain-of-thought cue");
  label_cmd->add_option("--answer-cue", label.answer_cue, "Answer cue");
  label_cmd->add_option("--verbalize-positive", label.verbalize_positive,
                        "Positive answer phrase");
  label_cmd->add_option("--verbalize-negative", label.verbalize_negative,
                        "Negative answer phrase");
  label_cmd->add_option("--verbalize-neutral", label.verbalize_neutral,
                        "Neutral answer phrase");
  label_cmd->add_option("--recognize-positive", label.recognize_positive,
                        "Positive recognizer substring");
  label_cmd->add_option("--recognize-negative", label.recognize_negative,
                        "Negative recognizer substring");
  label_cmd->add_option("--recognize-neutral", label.recognize_neutral,
                        "Neutral recognizer substring");
  label_cmd->add_option("--timeout-sec", label.timeout_sec, "HTTP timeout");
  label_cmd->add_option("--max-attempts", label.max_attempts, "HTTP retry budget");
  label_cmd->add_option("--backoff-ms", label.backoff_ms,
                        "Initial HTTP retry backoff");

  struct {
    std::string input, output;
    int min_agreement = 5;
  } filter;
  CLI::App* filter_cmd =
      app.add_subcommand("filter", "Keep weak labels with enough agreement");
  filter_cmd->add_option("--input", filter.input, "Weak-label JSONL")->required();
  filter_cmd->add_option("--output", filter.output, "Filtered JSONL")->required();
  filter_cmd->add_option("--min-agreement", filter.min_agreement,
                         "Minimum agreement count");

  TrainFlags train;
  int train_min_agreement = 5;
  CLI::App* train_cmd =
      app.add_subcommand("train", "Distill weak labels into a student model");
  train_cmd->add_option("--input", train.input, "Weak-label JSONL")->required();
  train_cmd->add_option("--output", train.output, "Model file")->required();
  train_cmd->add_option("--min-agreement", train_min_agreement,
                        "Minimum agreement count");
  add_train_flags(train_cmd, train);

  struct {
    std::string model, input, output, fit_on;
    double tau_pos = 1.0 / 3.0;
    double tau_neg = -1.0 / 3.0;
    bool quiet = false;
  } eval;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate a model on gold labels");
  eval_cmd->add_option("--model", eval.model, "Model file")->required();
  eval_cmd->add_option("--input", eval.input, "Gold-labeled JSONL")->required();
  eval_cmd->add_option("--output", eval.output, "Report JSON")->required();
  eval_cmd->add_option("--tau-pos", eval.tau_pos, "Positive decision threshold");
  eval_cmd->add_option("--tau-neg", eval.tau_neg, "Negative decision threshold");
  eval_cmd->add_option("--fit-thresholds", eval.fit_on,
                       "Fit thresholds on this validation JSONL");
  eval_cmd->add_flag("--quiet", eval.quiet, "Suppress metric printout");

  TrainFlags ablate_train;
  struct {
    std::string input, output, axis, golds;
    std::vector<int> thresholds = {8, 7, 6, 5};
    int min_agreement = 5;
    double tau_pos = 1.0 / 3.0;
    double tau_neg = -1.0 / 3.0;
  } ablate;
  CLI::App* ablate_cmd =
      app.add_subcommand("ablate", "Sweep paths, agreement, or loss");
  ablate_cmd->add_option("--input", ablate.input, "Weak-label JSONL")->required();
  ablate_cmd->add_option("--output", ablate.output, "Table file (TSV)")->required();
  ablate_cmd->add_option("--axis", ablate.axis, "paths | agreement | loss")
      ->required();
  ablate_cmd->add_option("--golds", ablate.golds, "Gold-labeled JSONL")->required();
  ablate_cmd->add_option("--thresholds", ablate.thresholds,
                         "Agreement thresholds (agreement axis)");
  ablate_cmd->add_option("--min-agreement", ablate.min_agreement,
                         "Agreement filter (loss axis)");
  ablate_cmd->add_option("--tau-pos", ablate.tau_pos, "Positive decision threshold");
  ablate_cmd->add_option("--tau-neg", ablate.tau_neg, "Negative decision threshold");
  add_train_flags(ablate_cmd, ablate_train);

  struct {
    std::string annotations, posts, output;
    bool quiet = false;
  } report;
  CLI::App* report_cmd = app.add_subcommand(
      "report", "Annotator agreement and strict-majority gold adjudication");
  report_cmd->add_option("--annotations", report.annotations, "Annotations JSONL")
      ->required();
  report_cmd->add_option("--posts", report.posts, "Posts JSONL")->required();
  report_cmd->add_option("--output", report.output, "Gold-labeled JSONL")
      ->required();
  report_cmd->add_flag("--quiet", report.quiet, "Suppress printout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  }

  try {
    if (label_cmd->parsed()) {
      cmd_label(label.to_options());
    } else if (filter_cmd->parsed()) {
      FilterOptions options;
      options.input = filter.input;
      options.output = filter.output;
      options.min_agreement = filter.min_agreement;
      cmd_filter(options);
    } else if (train_cmd->parsed()) {
      TrainCmdOptions options;
      options.input = train.input;
      options.output = train.output;
      options.min_agreement = train_min_agreement;
      options.train = train.to_config();
      cmd_train(options);
    } else if (eval_cmd->parsed()) {
      EvalOptions options;
      options.model = eval.model;
      options.input = eval.input;
      options.output = eval.output;
      options.thresholds = {eval.tau_pos, eval.tau_neg};
      if (!eval.fit_on.empty()) options.fit_thresholds_on = eval.fit_on;
      options.quiet = eval.quiet;
      cmd_eval(options);
    } else if (ablate_cmd->parsed()) {
      AblateOptions options;
      options.input = ablate.input;
      options.output = ablate.output;
      options.axis = parse_ablate_axis(ablate.axis);
      options.golds = ablate.golds;
      options.thresholds = ablate.thresholds;
      options.min_agreement = ablate.min_agreement;
      options.train = ablate_train.to_config();
      options.decision = {ablate.tau_pos, ablate.tau_neg};
      cmd_ablate(options);
    } else if (report_cmd->parsed()) {
      ReportOptions options;
      options.annotations = report.annotations;
      options.posts = report.posts;
      options.output = report.output;
      options.quiet = report.quiet;
      cmd_report(options);
    }
  } catch (const BackendError& e) {
    std::fprintf(stderr, "backend error: %s\n", e.what());
    return kExitBackend;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
