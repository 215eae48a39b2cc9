#include "finsent/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "finsent/jsonl.hpp"
#include "finsent/manifest.hpp"
#include "finsent/rng.hpp"

namespace finsent::cli {

using nlohmann::json;

const char* kDefaultTaskDescription =
    "The posts below are from an online investing forum. Each post discusses "
    "one company's stock. Read the post, summarize the author's financial "
    "arguments, and then state whether the stock price of the company will "
    "go up, will go down, or is uncertain.";

Verbalizer PromptOptions::make_verbalizer() const {
  Verbalizer defaults;
  auto pick = [](const std::string& value, const std::string& fallback) {
    return value.empty() ? fallback : value;
  };
  return Verbalizer(
      {pick(verbalize_negative, defaults.phrase_template(Sentiment::Negative)),
       pick(verbalize_neutral, defaults.phrase_template(Sentiment::Neutral)),
       pick(verbalize_positive, defaults.phrase_template(Sentiment::Positive))},
      {pick(recognize_negative, defaults.recognizer_key(Sentiment::Negative)),
       pick(recognize_neutral, defaults.recognizer_key(Sentiment::Neutral)),
       pick(recognize_positive, defaults.recognizer_key(Sentiment::Positive))});
}

PromptTemplate PromptOptions::make_template(
    const std::vector<Demonstration>& demos) const {
  PromptTemplate tmpl;
  tmpl.task_description =
      task_description.empty() ? kDefaultTaskDescription : task_description;
  tmpl.demonstrations = demos;
  tmpl.query_preamble = query_preamble;
  tmpl.cot_cue = cot_cue;
  tmpl.answer_cue = answer_cue;
  return tmpl;
}

namespace {

std::unique_ptr<CompletionBackend> make_backend(const BackendOptions& options) {
  if (options.kind == "mock") {
    if (options.script.empty()) {
      throw DataError("mock backend needs --script");
    }
    return std::make_unique<MockBackend>(MockBackend::load_script(options.script));
  }
  if (options.kind == "http") {
    HttpBackendConfig config = http_config_from_env();
    config.timeout_sec = options.timeout_sec;
    config.max_attempts = options.max_attempts;
    config.backoff_initial_ms = options.backoff_initial_ms;
    return std::make_unique<HttpBackend>(std::move(config));
  }
  throw DataError("unknown backend \"" + options.kind + "\" (mock|http)");
}

// Largest per-record path count; the denominator agreement thresholds are
// checked against.
int weak_n_paths(const std::vector<WeakLabel>& weak) {
  std::size_t n_paths = 0;
  for (const WeakLabel& w : weak) {
    n_paths = std::max(n_paths, w.path_labels.size() + w.n_malformed);
  }
  return static_cast<int>(n_paths);
}

void check_agreement_bound(int min_agreement, int n_paths) {
  if (min_agreement < 1) {
    throw DataError("min_agreement must be >= 1");
  }
  if (min_agreement > n_paths) {
    throw DataError("min_agreement " + std::to_string(min_agreement) +
                    " is unsatisfiable: records carry at most " +
                    std::to_string(n_paths) + " paths");
  }
}

std::vector<TrainExample> to_train_examples(const std::vector<WeakLabel>& kept,
                                            LossKind loss) {
  std::vector<TrainExample> examples;
  examples.reserve(kept.size());
  for (const WeakLabel& w : kept) {
    TrainExample ex;
    ex.text = w.text;
    if (loss == LossKind::Classification) {
      ex.target = *w.majority;
    } else {
      ex.target = *w.soft_score;
    }
    examples.push_back(std::move(ex));
  }
  return examples;
}

json sampling_to_json(const SamplingConfig& config) {
  return json{{"n_paths", config.n_paths},
              {"temperature", config.temperature},
              {"max_tokens", config.max_tokens},
              {"parallelism", config.parallelism}};
}

json train_to_json(const TrainConfig& config) {
  return json{{"loss", config.loss == LossKind::Classification ? "classification"
                                                               : "regression"},
              {"learning_rate", config.learning_rate},
              {"batch_size", config.batch_size},
              {"epochs", config.epochs},
              {"seed", config.seed},
              {"dim", config.features.dim},
              {"ngram_min", config.features.ngram_min},
              {"ngram_max", config.features.ngram_max},
              {"hash_seed", config.features.hash_seed}};
}

std::filesystem::path with_suffix(const std::filesystem::path& base,
                                  const std::string& suffix) {
  std::filesystem::path p = base;
  p.replace_extension();
  p += suffix;
  return p;
}

}  // namespace

LabelResult cmd_label(const LabelOptions& options, CompletionBackend* backend) {
  RunManifest manifest("label");
  manifest.set_config(json{{"input", options.input.string()},
                           {"output", options.output.string()},
                           {"demos", options.prompt.demos.string()},
                           {"per_class", options.prompt.per_class},
                           {"backend", options.backend.kind},
                           {"script", options.backend.script.string()},
                           {"seed", options.seed},
                           {"sampling", sampling_to_json(options.sampling)}});
  std::filesystem::path partial = options.output;
  partial += ".partial";

  try {
    validate(options.sampling);
    if (options.prompt.per_class < 1) {
      throw DataError("per_class must be >= 1");
    }
    // Everything that can fail cheaply fails before the first backend call.
    std::vector<Post> posts = load_posts(options.input);
    std::vector<Demonstration> pool = load_demonstrations(options.prompt.demos);
    DemonstrationSelection selection = select_demonstrations(
        pool, static_cast<std::size_t>(options.prompt.per_class), options.seed);
    Verbalizer verbalizer = options.prompt.make_verbalizer();
    PromptTemplate tmpl = options.prompt.make_template(selection.demonstrations);
    validate(tmpl);

    std::unique_ptr<CompletionBackend> owned;
    if (backend == nullptr) {
      owned = make_backend(options.backend);
      backend = owned.get();
    }
    manifest.add_input(options.input);
    manifest.add_input(options.prompt.demos);
    if (options.backend.kind == "mock" && owned != nullptr) {
      manifest.add_input(options.backend.script);
    }

    const std::uint64_t calls_before = backend->calls();
    std::ofstream out(partial, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw DataError("cannot write " + partial.string());
    }

    SamplingConfig path_config = options.sampling;
    path_config.parallelism = 1;  // fan-out is per post here

    LabelResult result;
    auto label_one = [&](std::size_t index) {
      const Post& post = posts[index];
      std::string prompt = build_prompt(tmpl, verbalizer, post);
      std::vector<CompletionResult> paths = sample_paths(
          *backend, prompt, path_config, derive_seed(options.seed, index));
      return weak_label(post, paths, verbalizer, tmpl.answer_cue);
    };

    const std::size_t stride =
        static_cast<std::size_t>(std::max(1, options.sampling.parallelism));
    for (std::size_t start = 0; start < posts.size(); start += stride) {
      const std::size_t end = std::min(posts.size(), start + stride);
      std::vector<WeakLabel> chunk(end - start);
      if (stride == 1) {
        chunk[0] = label_one(start);
      } else {
        std::vector<std::thread> threads;
        std::exception_ptr failure;
        std::mutex failure_mutex;
        for (std::size_t i = start; i < end; ++i) {
          threads.emplace_back([&, i] {
            try {
              chunk[i - start] = label_one(i);
            } catch (...) {
              std::lock_guard<std::mutex> lock(failure_mutex);
              if (!failure) failure = std::current_exception();
            }
          });
        }
        for (std::thread& t : threads) t.join();
        if (failure) std::rethrow_exception(failure);
      }
      for (const WeakLabel& weak : chunk) {
        result.malformed_paths += weak.n_malformed;
        result.unlabeled_posts += weak.labeled() ? 0 : 1;
        ++result.posts_labeled;
        out << weak_label_line(weak) << '\n';
      }
    }
    out.flush();
    if (!out) {
      throw DataError("short write to " + partial.string());
    }
    out.close();
    std::filesystem::rename(partial, options.output);

    result.backend_calls = backend->calls() - calls_before;
    manifest.add_output(options.output);
    manifest.set_count("posts_labeled",
                       static_cast<std::int64_t>(result.posts_labeled));
    manifest.set_count("unlabeled_posts",
                       static_cast<std::int64_t>(result.unlabeled_posts));
    manifest.set_count("malformed_paths",
                       static_cast<std::int64_t>(result.malformed_paths));
    manifest.set_count("backend_calls",
                       static_cast<std::int64_t>(result.backend_calls));
    manifest.set_status_ok();
    manifest.write(RunManifest::path_for(options.output));
    return result;
  } catch (const std::exception& e) {
    manifest.set_status_error(e.what());
    manifest.write(RunManifest::path_for(options.output));
    throw;
  }
}

FilterResult cmd_filter(const FilterOptions& options) {
  RunManifest manifest("filter");
  manifest.set_config(json{{"input", options.input.string()},
                           {"output", options.output.string()},
                           {"min_agreement", options.min_agreement}});
  try {
    std::vector<WeakLabel> weak = load_weak_labels(options.input);
    manifest.add_input(options.input);
    check_agreement_bound(options.min_agreement, weak_n_paths(weak));
    std::vector<WeakLabel> kept = filter_by_agreement(weak, options.min_agreement);
    save_weak_labels(options.output, kept);

    FilterResult result;
    result.kept = kept.size();
    result.dropped = weak.size() - kept.size();
    manifest.add_output(options.output);
    manifest.set_count("kept", static_cast<std::int64_t>(result.kept));
    manifest.set_count("dropped", static_cast<std::int64_t>(result.dropped));
    manifest.set_status_ok();
    manifest.write(RunManifest::path_for(options.output));
    return result;
  } catch (const std::exception& e) {
    manifest.set_status_error(e.what());
    manifest.write(RunManifest::path_for(options.output));
    throw;
  }
}

TrainCmdResult cmd_train(const TrainCmdOptions& options) {
  RunManifest manifest("train");
  manifest.set_config(json{{"input", options.input.string()},
                           {"output", options.output.string()},
                           {"min_agreement", options.min_agreement},
                           {"train", train_to_json(options.train)}});
  try {
    std::vector<WeakLabel> weak = load_weak_labels(options.input);
    manifest.add_input(options.input);
    check_agreement_bound(options.min_agreement, weak_n_paths(weak));
    std::vector<WeakLabel> kept = filter_by_agreement(weak, options.min_agreement);
    if (kept.empty()) {
      throw DataError("no training examples left at agreement >= " +
                      std::to_string(options.min_agreement) + " (0 of " +
                      std::to_string(weak.size()) + " records kept)");
    }
    TrainResult trained =
        train(to_train_examples(kept, options.train.loss), options.train);
    save_model(options.output, trained.model);

    TrainCmdResult result;
    result.kept = kept.size();
    result.dropped = weak.size() - kept.size();
    result.epoch_loss = trained.epoch_loss;
    manifest.add_output(options.output);
    manifest.set_count("kept", static_cast<std::int64_t>(result.kept));
    manifest.set_count("dropped", static_cast<std::int64_t>(result.dropped));
    manifest.set_count("epochs", options.train.epochs);
    manifest.set_status_ok();
    manifest.write(RunManifest::path_for(options.output));
    return result;
  } catch (const std::exception& e) {
    manifest.set_status_error(e.what());
    manifest.write(RunManifest::path_for(options.output));
    throw;
  }
}

namespace {

struct Scored {
  std::vector<double> scores;
  std::vector<Sentiment> golds;
  std::vector<Sentiment> preds;
};

Scored score_examples(const StudentModel& model,
                      const std::vector<LabeledExample>& examples,
                      const DecisionThresholds& thresholds) {
  Scored scored;
  scored.scores.reserve(examples.size());
  for (const LabeledExample& ex : examples) {
    double s = predict_score(model, ex.post.text);
    scored.scores.push_back(s);
    scored.golds.push_back(ex.label);
    scored.preds.push_back(label_from_score(s, thresholds));
  }
  return scored;
}

MetricsReport build_report(const Scored& scored) {
  MetricsReport report;
  report.n_examples = scored.golds.size();
  report.confusion = confusion(scored.preds, scored.golds);
  report.accuracy = accuracy(report.confusion);
  PerLabelAp ap = per_label_ap(scored.golds, scored.scores);
  report.ap_pos = ap.ap_pos;
  report.ap_neg = ap.ap_neg;
  if (ap.ap_pos) {
    std::vector<bool> is_pos(scored.golds.size());
    for (std::size_t i = 0; i < scored.golds.size(); ++i) {
      is_pos[i] = scored.golds[i] == Sentiment::Positive;
    }
    report.pr_pos = pr_curve(scored.scores, is_pos);
  }
  if (ap.ap_neg) {
    std::vector<bool> is_neg(scored.golds.size());
    std::vector<double> negated(scored.scores.size());
    for (std::size_t i = 0; i < scored.golds.size(); ++i) {
      is_neg[i] = scored.golds[i] == Sentiment::Negative;
      negated[i] = -scored.scores[i];
    }
    report.pr_neg = pr_curve(negated, is_neg);
  }
  return report;
}

}  // namespace

MetricsReport cmd_eval(const EvalOptions& options) {
  RunManifest manifest("eval");
  manifest.set_config(
      json{{"model", options.model.string()},
           {"input", options.input.string()},
           {"output", options.output.string()},
           {"tau_pos", options.thresholds.tau_pos},
           {"tau_neg", options.thresholds.tau_neg},
           {"fit_thresholds_on", options.fit_thresholds_on
                                     ? options.fit_thresholds_on->string()
                                     : ""}});
  try {
    StudentModel model = load_model(options.model);
    manifest.add_input(options.model);
    std::vector<LabeledExample> test = load_labeled(options.input);
    manifest.add_input(options.input);
    if (test.empty()) {
      throw DataError(options.input.string() + ": empty test set");
    }

    DecisionThresholds thresholds = options.thresholds;
    validate(thresholds);
    if (options.fit_thresholds_on) {
      std::vector<LabeledExample> valid = load_labeled(*options.fit_thresholds_on);
      manifest.add_input(*options.fit_thresholds_on);
      if (valid.empty()) {
        throw DataError(options.fit_thresholds_on->string() +
                        ": empty validation set");
      }
      std::vector<double> scores;
      std::vector<Sentiment> golds;
      for (const LabeledExample& ex : valid) {
        scores.push_back(predict_score(model, ex.post.text));
        golds.push_back(ex.label);
      }
      thresholds = fit_thresholds(scores, golds);
    }

    Scored scored = score_examples(model, test, thresholds);
    MetricsReport report = build_report(scored);

    json out = report.to_json();
    out["tau_pos"] = thresholds.tau_pos;
    out["tau_neg"] = thresholds.tau_neg;
    jsonl::atomic_write(options.output, out.dump(2) + "\n");
    std::filesystem::path pr_pos_path = with_suffix(options.output, ".pr_pos.csv");
    std::filesystem::path pr_neg_path = with_suffix(options.output, ".pr_neg.csv");
    save_pr_csv(pr_pos_path, report.pr_pos);
    save_pr_csv(pr_neg_path, report.pr_neg);

    if (!options.quiet) {
      std::printf("accuracy %.3f\n", report.accuracy);
      std::printf("ap_pos %s\n",
                  report.ap_pos ? format_double(*report.ap_pos).c_str() : "n/a");
      std::printf("ap_neg %s\n",
                  report.ap_neg ? format_double(*report.ap_neg).c_str() : "n/a");
    }

    manifest.add_output(options.output);
    manifest.add_output(pr_pos_path);
    manifest.add_output(pr_neg_path);
    manifest.set_count("n_examples", static_cast<std::int64_t>(report.n_examples));
    manifest.set_status_ok();
    manifest.write(RunManifest::path_for(options.output));
    return report;
  } catch (const std::exception& e) {
    manifest.set_status_error(e.what());
    manifest.write(RunManifest::path_for(options.output));
    throw;
  }
}

AblateAxis parse_ablate_axis(const std::string& name) {
  if (name == "paths") return AblateAxis::Paths;
  if (name == "agreement") return AblateAxis::Agreement;
  if (name == "loss") return AblateAxis::Loss;
  throw DataError("unknown ablation axis \"" + name +
                  "\" (choices: paths, agreement, loss)");
}

namespace {

std::string axis_name(AblateAxis axis) {
  switch (axis) {
    case AblateAxis::Paths:
      return "paths";
    case AblateAxis::Agreement:
      return "agreement";
    case AblateAxis::Loss:
      return "loss";
  }
  return "?";
}

std::string render_table(const AblateResult& table) {
  std::string out = "metric";
  for (const std::string& column : table.columns) {
    out += '\t';
    out += column;
  }
  out += '\n';
  for (const AblateRow& row : table.rows) {
    out += row.name;
    for (double v : row.values) {
      out += '\t';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

// Gold labels joined by post id; every weak record must have a gold.
std::vector<Sentiment> join_golds(const std::vector<WeakLabel>& weak,
                                  const std::vector<LabeledExample>& golds) {
  std::unordered_map<std::string, Sentiment> by_id;
  for (const LabeledExample& ex : golds) by_id.emplace(ex.post.id, ex.label);
  std::vector<Sentiment> joined;
  joined.reserve(weak.size());
  for (const WeakLabel& w : weak) {
    auto it = by_id.find(w.post_id);
    if (it == by_id.end()) {
      throw DataError("no gold label for post id \"" + w.post_id + "\"");
    }
    joined.push_back(it->second);
  }
  return joined;
}

}  // namespace

AblateResult cmd_ablate(const AblateOptions& options) {
  RunManifest manifest("ablate");
  json thresholds = json::array();
  for (int t : options.thresholds) thresholds.push_back(t);
  manifest.set_config(json{{"input", options.input.string()},
                           {"output", options.output.string()},
                           {"axis", axis_name(options.axis)},
                           {"golds", options.golds.string()},
                           {"thresholds", std::move(thresholds)},
                           {"min_agreement", options.min_agreement},
                           {"train", train_to_json(options.train)}});
  try {
    std::vector<WeakLabel> weak = load_weak_labels(options.input);
    manifest.add_input(options.input);
    std::vector<LabeledExample> golds = load_labeled(options.golds);
    manifest.add_input(options.golds);
    const int n_paths = weak_n_paths(weak);

    AblateResult table;
    std::vector<std::filesystem::path> extra_outputs;

    if (options.axis == AblateAxis::Agreement) {
      if (options.thresholds.empty()) {
        throw DataError("agreement ablation needs at least one threshold");
      }
      for (int t : options.thresholds) check_agreement_bound(t, n_paths);
      table.rows = {{"n_examples", {}}, {"pos_cls_ap", {}}, {"pos_rgr_ap", {}},
                    {"neg_cls_ap", {}}, {"neg_rgr_ap", {}}};
      for (int t : options.thresholds) {
        table.columns.push_back(std::to_string(t));
        std::vector<WeakLabel> kept = filter_by_agreement(weak, t);
        if (kept.empty()) {
          throw DataError("agreement threshold " + std::to_string(t) +
                          " keeps no examples");
        }
        table.rows[0].values.push_back(static_cast<double>(kept.size()));
        for (LossKind loss : {LossKind::Classification, LossKind::Regression}) {
          TrainConfig config = options.train;
          config.loss = loss;
          TrainResult trained = train(to_train_examples(kept, loss), config);
          Scored scored = score_examples(trained.model, golds, options.decision);
          PerLabelAp ap = per_label_ap(scored.golds, scored.scores);
          std::size_t row = loss == LossKind::Classification ? 1 : 2;
          table.rows[row].values.push_back(ap.ap_pos.value_or(
              std::numeric_limits<double>::quiet_NaN()));
          table.rows[row + 2].values.push_back(ap.ap_neg.value_or(
              std::numeric_limits<double>::quiet_NaN()));
        }
      }
    } else if (options.axis == AblateAxis::Paths) {
      // Reuses the stored per-path labels; no backend involved.
      std::vector<Sentiment> gold_labels = join_golds(weak, golds);
      table.rows = {{"n_evaluated", {}}, {"accuracy", {}}};
      for (int k = 1; k <= n_paths; ++k) {
        table.columns.push_back(std::to_string(k));
        std::vector<Sentiment> preds;
        std::vector<Sentiment> matched_golds;
        for (std::size_t i = 0; i < weak.size(); ++i) {
          const WeakLabel& w = weak[i];
          if (w.path_labels.empty()) continue;
          std::size_t take = std::min(w.path_labels.size(),
                                      static_cast<std::size_t>(k));
          std::vector<Sentiment> first_k(w.path_labels.begin(),
                                         w.path_labels.begin() +
                                             static_cast<std::ptrdiff_t>(take));
          preds.push_back(majority_vote(first_k).first);
          matched_golds.push_back(gold_labels[i]);
        }
        if (preds.empty()) {
          throw DataError("paths ablation: no labeled records to evaluate");
        }
        table.rows[0].values.push_back(static_cast<double>(preds.size()));
        table.rows[1].values.push_back(accuracy(confusion(preds, matched_golds)));
      }
    } else {
      check_agreement_bound(options.min_agreement, n_paths);
      std::vector<WeakLabel> kept =
          filter_by_agreement(weak, options.min_agreement);
      if (kept.empty()) {
        throw DataError("no training examples left at agreement >= " +
                        std::to_string(options.min_agreement));
      }
      table.columns = {"ap_pos", "ap_neg"};
      for (LossKind loss : {LossKind::Classification, LossKind::Regression}) {
        const std::string name =
            loss == LossKind::Classification ? "cls" : "rgr";
        TrainConfig config = options.train;
        config.loss = loss;
        TrainResult trained = train(to_train_examples(kept, loss), config);
        Scored scored = score_examples(trained.model, golds, options.decision);
        MetricsReport report = build_report(scored);
        table.rows.push_back(
            {name,
             {report.ap_pos.value_or(std::numeric_limits<double>::quiet_NaN()),
              report.ap_neg.value_or(std::numeric_limits<double>::quiet_NaN())}});
        std::filesystem::path pos_csv =
            with_suffix(options.output, "." + name + ".pr_pos.csv");
        std::filesystem::path neg_csv =
            with_suffix(options.output, "." + name + ".pr_neg.csv");
        save_pr_csv(pos_csv, report.pr_pos);
        save_pr_csv(neg_csv, report.pr_neg);
        extra_outputs.push_back(pos_csv);
        extra_outputs.push_back(neg_csv);
      }
    }

    jsonl::atomic_write(options.output, render_table(table));
    manifest.add_output(options.output);
    for (const auto& path : extra_outputs) manifest.add_output(path);
    manifest.set_count("records", static_cast<std::int64_t>(weak.size()));
    manifest.set_count("n_paths", n_paths);
    manifest.set_status_ok();
    manifest.write(RunManifest::path_for(options.output));
    return table;
  } catch (const std::exception& e) {
    manifest.set_status_error(e.what());
    manifest.write(RunManifest::path_for(options.output));
    throw;
  }
}

ReportResult cmd_report(const ReportOptions& options) {
  RunManifest manifest("report");
  manifest.set_config(json{{"annotations", options.annotations.string()},
                           {"posts", options.posts.string()},
                           {"output", options.output.string()}});
  try {
    std::vector<Annotation> annotations = load_annotations(options.annotations);
    manifest.add_input(options.annotations);
    std::vector<Post> posts = load_posts(options.posts);
    manifest.add_input(options.posts);
    if (annotations.empty()) {
      throw DataError(options.annotations.string() + ": no annotations");
    }

    std::unordered_map<std::string, const Post*> by_id;
    for (const Post& post : posts) by_id.emplace(post.id, &post);

    std::vector<std::vector<Sentiment>> label_sets;
    std::vector<LabeledExample> gold;
    std::size_t no_majority = 0;
    for (const Annotation& ann : annotations) {
      auto it = by_id.find(ann.id);
      if (it == by_id.end()) {
        throw DataError("annotation for unknown post id \"" + ann.id + "\"");
      }
      label_sets.push_back(ann.labels);
      if (auto resolved = resolve_gold(ann.labels)) {
        gold.push_back({*it->second, *resolved});
      } else {
        ++no_majority;
      }
    }
    double agreement = annotator_agreement(label_sets);
    save_labeled(options.output, gold);

    if (!options.quiet) {
      std::printf("annotator_agreement %.4f\n", agreement);
      std::printf("gold_posts %zu\n", gold.size());
      std::printf("no_majority %zu\n", no_majority);
    }

    ReportResult result;
    result.agreement = agreement;
    result.gold_posts = gold.size();
    result.no_majority = no_majority;
    manifest.add_output(options.output);
    manifest.set_count("gold_posts", static_cast<std::int64_t>(gold.size()));
    manifest.set_count("no_majority", static_cast<std::int64_t>(no_majority));
    manifest.set_status_ok();
    manifest.write(RunManifest::path_for(options.output));
    return result;
  } catch (const std::exception& e) {
    manifest.set_status_error(e.what());
    manifest.write(RunManifest::path_for(options.output));
    throw;
  }
}

}  // namespace finsent::cli
