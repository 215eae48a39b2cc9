#include "finsent/aggregation.hpp"

#include <algorithm>

#include <doctest.h>

#include "finsent/errors.hpp"
#include "finsent/rng.hpp"
#include "support/synthetic.hpp"
#include "support/testutil.hpp"

using namespace finsent;
using namespace finsent::testsupport;

namespace {

using S = Sentiment;

// Independent reference: per-candidate counting via std::count.
std::pair<S, int> oracle_majority(const std::vector<S>& labels) {
  int best = -1;
  std::vector<S> modes;
  for (S s : kAllSentiments) {
    int c = static_cast<int>(std::count(labels.begin(), labels.end(), s));
    if (c > best) {
      best = c;
      modes = {s};
    } else if (c == best) {
      modes.push_back(s);
    }
  }
  return {modes.size() == 1 ? modes.front() : S::Neutral, best};
}

double oracle_soft(const std::vector<S>& labels) {
  auto n_pos =
      static_cast<long long>(std::count(labels.begin(), labels.end(), S::Positive));
  auto n_neg =
      static_cast<long long>(std::count(labels.begin(), labels.end(), S::Negative));
  return static_cast<double>(n_pos - n_neg) / static_cast<double>(labels.size());
}

std::vector<S> repeated(std::initializer_list<std::pair<int, S>> runs) {
  std::vector<S> labels;
  for (const auto& [count, s] : runs) {
    labels.insert(labels.end(), static_cast<std::size_t>(count), s);
  }
  return labels;
}

CompletionResult path(const std::string& text) {
  CompletionResult result;
  result.text = text;
  result.backend_id = "test";
  return result;
}

}  // namespace

TEST_CASE("majority_vote on the worked examples") {
  CHECK(majority_vote(repeated({{8, S::Positive}})) ==
        std::pair{S::Positive, 8});
  CHECK(majority_vote(repeated({{5, S::Positive}, {2, S::Neutral}, {1, S::Negative}})) ==
        std::pair{S::Positive, 5});
  // Tie: abstain to Neutral but keep the tied count.
  CHECK(majority_vote(repeated({{4, S::Positive}, {4, S::Negative}})) ==
        std::pair{S::Neutral, 4});
  expect_error<DataError>([] { majority_vote({}); }, "empty");
}

TEST_CASE("soft_score on the worked examples") {
  CHECK(soft_score(repeated({{8, S::Positive}})) == 1.0);
  CHECK(soft_score(repeated({{8, S::Neutral}})) == 0.0);
  // (5 - 1) / 8
  CHECK(soft_score(repeated({{5, S::Positive}, {2, S::Neutral}, {1, S::Negative}})) ==
        0.5);
  expect_error<DataError>([] { soft_score({}); }, "empty");
}

TEST_CASE("exhaustive oracle equivalence for all lists up to length 8") {
  std::size_t cases = 0;
  for (std::size_t n = 1; n <= 8; ++n) {
    std::size_t combos = 1;
    for (std::size_t i = 0; i < n; ++i) combos *= 3;
    for (std::size_t code = 0; code < combos; ++code) {
      std::vector<S> labels;
      std::size_t c = code;
      for (std::size_t i = 0; i < n; ++i) {
        labels.push_back(static_cast<S>(c % 3));
        c /= 3;
      }
      ++cases;
      REQUIRE(majority_vote(labels) == oracle_majority(labels));
      REQUIRE(soft_score(labels) == oracle_soft(labels));
    }
  }
  CHECK(cases == 9840);  // 3 + 9 + ... + 3^8
}

TEST_CASE("majority and soft score are permutation-invariant") {
  DetRng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<S> labels;
    std::size_t n = 1 + rng.next_below(8);
    for (std::size_t i = 0; i < n; ++i) {
      labels.push_back(static_cast<S>(rng.next_below(3)));
    }
    auto vote = majority_vote(labels);
    double score = soft_score(labels);
    auto shuffled = labels;
    rng.shuffle(shuffled);
    CHECK(majority_vote(shuffled) == vote);
    CHECK(soft_score(shuffled) == score);

    // Polarity antisymmetry under Positive <-> Negative swap.
    std::vector<S> swapped;
    for (S s : labels) {
      swapped.push_back(s == S::Positive  ? S::Negative
                        : s == S::Negative ? S::Positive
                                           : S::Neutral);
    }
    CHECK(soft_score(swapped) == -score);
  }
}

TEST_CASE("unanimity is equivalent to extreme soft scores") {
  DetRng rng(6);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<S> labels;
    std::size_t n = 1 + rng.next_below(8);
    for (std::size_t i = 0; i < n; ++i) {
      labels.push_back(static_cast<S>(rng.next_below(3)));
    }
    auto [mode, agreement] = majority_vote(labels);
    double score = soft_score(labels);
    bool unanimous_polar =
        agreement == static_cast<int>(labels.size()) && mode != S::Neutral;
    CHECK(unanimous_polar == (std::abs(score) == 1.0));
    if (agreement == static_cast<int>(labels.size()) && mode == S::Neutral) {
      CHECK(score == 0.0);
    }
  }
}

TEST_CASE("weak_label parses, counts malformed paths, and aggregates") {
  Verbalizer verbalizer;
  Post post{"p1", "rocket talk", "GME"};

  SUBCASE("all paths positive") {
    std::vector<CompletionResult> paths(
        8, path(" Strong buys. Answer: the stock price will go up."));
    WeakLabel weak = weak_label(post, paths, verbalizer, "Answer:");
    CHECK(weak.labeled());
    CHECK(weak.majority == S::Positive);
    CHECK(weak.agreement == 8);
    CHECK(weak.soft_score == 1.0);
    CHECK(weak.n_malformed == 0);
    CHECK(weak.cot_summaries.size() == 8);
  }

  SUBCASE("two malformed paths shrink the vote, not the label") {
    std::vector<CompletionResult> paths(
        6, path(" Sell-off coming. Answer: the stock price will go down."));
    paths.push_back(path(" no cue in this one"));
    paths.push_back(path(" another rambling path"));
    WeakLabel weak = weak_label(post, paths, verbalizer, "Answer:");
    CHECK(weak.majority == S::Negative);
    CHECK(weak.agreement == 6);
    CHECK(weak.soft_score == -1.0);
    CHECK(weak.n_malformed == 2);
  }

  SUBCASE("all paths malformed leaves an unlabeled marker") {
    std::vector<CompletionResult> paths(8, path(" nothing to see"));
    WeakLabel weak = weak_label(post, paths, verbalizer, "Answer:");
    CHECK(!weak.labeled());
    CHECK(weak.n_malformed == 8);
    CHECK(weak.path_labels.empty());
    CHECK(!weak.soft_score.has_value());
  }

  SUBCASE("no paths is an error") {
    expect_error<DataError>([&] { weak_label(post, {}, verbalizer, "Answer:"); });
  }
}

namespace {

WeakLabel weak_with(const std::string& id, std::vector<S> labels,
                    std::size_t n_malformed = 0) {
  WeakLabel weak;
  weak.post_id = id;
  weak.text = "text for " + id;
  weak.ticker = "T";
  weak.path_labels = std::move(labels);
  weak.n_malformed = n_malformed;
  if (!weak.path_labels.empty()) {
    auto [mode, agreement] = majority_vote(weak.path_labels);
    weak.majority = mode;
    weak.agreement = agreement;
    weak.soft_score = soft_score(weak.path_labels);
    weak.cot_summaries.assign(weak.path_labels.size(), "why");
  }
  return weak;
}

}  // namespace

TEST_CASE("filter_by_agreement keeps records at or above the threshold") {
  std::vector<WeakLabel> weak = {
      weak_with("a", repeated({{8, S::Positive}})),
      weak_with("b", repeated({{6, S::Negative}, {2, S::Neutral}})),
      weak_with("c", repeated({{5, S::Neutral}, {3, S::Positive}})),
  };

  auto kept = filter_by_agreement(weak, 6);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].post_id == "a");
  CHECK(kept[1].post_id == "b");

  SUBCASE("min 1 is the identity on labeled records") {
    CHECK(filter_by_agreement(weak, 1).size() == weak.size());
  }

  SUBCASE("unlabeled markers never survive") {
    weak.push_back(weak_with("d", {}, 8));
    CHECK(filter_by_agreement(weak, 1).size() == 3);
  }
}

TEST_CASE("filter nesting holds on random weak-label sets") {
  DetRng rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<WeakLabel> weak;
    std::size_t n = 1 + rng.next_below(20);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<S> labels;
      std::size_t n_paths = 1 + rng.next_below(8);
      for (std::size_t p = 0; p < n_paths; ++p) {
        labels.push_back(static_cast<S>(rng.next_below(3)));
      }
      weak.push_back(weak_with("p" + std::to_string(i), std::move(labels)));
    }
    int k = 1 + static_cast<int>(rng.next_below(8));
    auto at_k = filter_by_agreement(weak, k);
    auto at_k1 = filter_by_agreement(weak, k + 1);
    CHECK(at_k1.size() <= at_k.size());
    // Every survivor at k+1 also survives at k.
    std::size_t found = 0;
    for (const auto& w : at_k1) {
      for (const auto& v : at_k) {
        if (v.post_id == w.post_id) {
          ++found;
          break;
        }
      }
    }
    CHECK(found == at_k1.size());
  }
}

TEST_CASE("a threshold above half the paths forces a unique mode") {
  DetRng rng(12);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<S> labels;
    for (std::size_t p = 0; p < 8; ++p) {
      labels.push_back(static_cast<S>(rng.next_below(3)));
    }
    auto weak = weak_with("x", labels);
    for (const auto& kept : filter_by_agreement({weak}, 5)) {
      // agreement >= 5 of 8: the mode is unique, so no tie fallback fired.
      auto counts = std::array<int, 3>{};
      for (S s : kept.path_labels) ++counts[static_cast<std::size_t>(s)];
      CHECK(counts[static_cast<std::size_t>(*kept.majority)] == kept.agreement);
      int with_max = 0;
      for (int c : counts) with_max += c == kept.agreement ? 1 : 0;
      CHECK(with_max == 1);
    }
  }
}

TEST_CASE("weak label files round-trip, unlabeled markers included") {
  auto dir = scratch_dir("aggregation");
  auto file = dir / "weak.jsonl";
  std::vector<WeakLabel> weak = {
      weak_with("a", repeated({{5, S::Positive}, {3, S::Negative}})),
      weak_with("b", {}, 8),
      weak_with("c", repeated({{4, S::Neutral}}), 4),
  };
  save_weak_labels(file, weak);
  auto loaded = load_weak_labels(file);
  REQUIRE(loaded.size() == 3);
  CHECK(loaded[0].majority == S::Positive);
  CHECK(loaded[0].agreement == 5);
  CHECK(loaded[0].soft_score == doctest::Approx(0.25));
  CHECK(!loaded[1].labeled());
  CHECK(loaded[1].n_malformed == 8);
  CHECK(loaded[2].majority == S::Neutral);
  CHECK(loaded[2].path_labels.size() == 4);

  SUBCASE("inconsistent agreement is rejected") {
    write_file(file,
               R"({"id":"x","text":"t","ticker":"T","path_labels":["positive"],)"
               R"("n_malformed":0,"majority":"positive","agreement":5,)"
               R"("soft_score":1.0,"cots":["w"]})" "\n");
    expect_error<DataError>([&] { load_weak_labels(file); }, "agreement");
  }

  SUBCASE("null majority with parsed labels is rejected") {
    write_file(file,
               R"({"id":"x","text":"t","ticker":"T","path_labels":["positive"],)"
               R"("n_malformed":0,"majority":null,"agreement":0,)"
               R"("soft_score":null,"cots":["w"]})" "\n");
    expect_error<DataError>([&] { load_weak_labels(file); }, "majority");
  }
}
