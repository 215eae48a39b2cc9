#include "finsent/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <doctest.h>

#include "finsent/errors.hpp"
#include "finsent/rng.hpp"
#include "support/testutil.hpp"

using namespace finsent;
using namespace finsent::testsupport;

namespace {

using S = Sentiment;

// Reference AP: selection-sort ranking plus full prefix recounts.
double oracle_average_precision(const std::vector<double>& scores,
                                const std::vector<bool>& positives) {
  std::vector<std::size_t> remaining(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) remaining[i] = i;
  std::vector<std::size_t> ranked;
  while (!remaining.empty()) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < remaining.size(); ++j) {
      if (scores[remaining[j]] > scores[remaining[best]]) best = j;
    }
    ranked.push_back(remaining[best]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
  }
  std::size_t n_pos = 0;
  for (bool p : positives) n_pos += p ? 1 : 0;
  double sum = 0;
  for (std::size_t rank = 1; rank <= ranked.size(); ++rank) {
    if (!positives[ranked[rank - 1]]) continue;
    std::size_t tp = 0;
    for (std::size_t k = 0; k < rank; ++k) tp += positives[ranked[k]] ? 1 : 0;
    sum += static_cast<double>(tp) / static_cast<double>(rank);
  }
  return sum / static_cast<double>(n_pos);
}

bool perfectly_separated(const std::vector<double>& scores,
                         const std::vector<bool>& positives) {
  for (std::size_t i = 0; i < scores.size(); ++i) {
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (positives[i] && !positives[j] && scores[i] <= scores[j]) return false;
    }
  }
  return true;
}

// Distinct random scores plus a non-empty positive mask.
std::pair<std::vector<double>, std::vector<bool>> random_case(DetRng& rng,
                                                              std::size_t n) {
  std::vector<double> scores;
  while (scores.size() < n) {
    double s = rng.next_double(-1.0, 1.0);
    if (std::find(scores.begin(), scores.end(), s) == scores.end()) {
      scores.push_back(s);
    }
  }
  std::vector<bool> positives(n, false);
  bool any = false;
  while (!any) {
    for (std::size_t i = 0; i < n; ++i) {
      positives[i] = rng.next_below(2) == 1;
      any = any || positives[i];
    }
  }
  return {scores, positives};
}

ConfusionMatrix table4() {
  ConfusionMatrix m;
  m.counts = {{{9, 10, 0}, {3, 32, 7}, {2, 9, 28}}};
  return m;
}

}  // namespace

TEST_CASE("published confusion matrix cross-checks to 0.690 accuracy") {
  CHECK(accuracy(table4()) == 0.69);
  CHECK(table4().total() == 100);
  CHECK(table4().trace() == 69);
}

TEST_CASE("confusion counts actual x predicted") {
  SUBCASE("identity predictions") {
    std::vector<S> all_pos(5, S::Positive);
    auto m = confusion(all_pos, all_pos);
    CHECK(m.at(S::Positive, S::Positive) == 5);
    CHECK(m.total() == 5);
    CHECK(m.trace() == 5);
  }

  SUBCASE("single off-diagonal pair") {
    auto m = confusion({S::Neutral}, {S::Negative});
    CHECK(m.at(S::Negative, S::Neutral) == 1);
    CHECK(m.trace() == 0);
  }

  SUBCASE("empty and mismatched inputs are errors") {
    expect_error<DataError>([] { confusion({}, {}); }, "empty");
    expect_error<DataError>([] { confusion({S::Neutral}, {}); }, "length");
  }
}

TEST_CASE("accuracy of diagonal and off-diagonal matrices") {
  ConfusionMatrix diag;
  diag.counts = {{{3, 0, 0}, {0, 4, 0}, {0, 0, 5}}};
  CHECK(accuracy(diag) == 1.0);

  ConfusionMatrix off;
  off.counts = {{{0, 2, 0}, {1, 0, 0}, {0, 3, 0}}};
  CHECK(accuracy(off) == 0.0);

  expect_error<DataError>([] { accuracy(ConfusionMatrix{}); }, "empty");
}

TEST_CASE("accuracy equals the direct agreement fraction") {
  DetRng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t n = 1 + rng.next_below(50);
    std::vector<S> preds;
    std::vector<S> golds;
    std::size_t agree = 0;
    for (std::size_t i = 0; i < n; ++i) {
      preds.push_back(static_cast<S>(rng.next_below(3)));
      golds.push_back(static_cast<S>(rng.next_below(3)));
      agree += preds.back() == golds.back() ? 1 : 0;
    }
    CHECK(accuracy(confusion(preds, golds)) ==
          static_cast<double>(agree) / static_cast<double>(n));
  }
}

TEST_CASE("average precision on the worked examples") {
  CHECK(average_precision({0.9, 0.8, 0.1}, {true, true, false}) == 1.0);
  CHECK(average_precision({0.9, 0.8, 0.7, 0.6}, {true, false, true, false}) ==
        doctest::Approx(5.0 / 6.0).epsilon(1e-12));
  expect_error<DataError>(
      [] { average_precision({0.5, 0.4}, {false, false}); }, "positive");
}

TEST_CASE("average precision matches the prefix-enumeration oracle") {
  DetRng rng(31);
  for (int trial = 0; trial < 2000; ++trial) {
    std::size_t n = 1 + rng.next_below(12);
    auto [scores, positives] = random_case(rng, n);
    double got = average_precision(scores, positives);
    REQUIRE(got == oracle_average_precision(scores, positives));
    REQUIRE((got == 1.0) == perfectly_separated(scores, positives));
    CHECK(got > 0.0);
    CHECK(got <= 1.0);
  }
}

TEST_CASE("average precision is invariant under joint shuffles") {
  DetRng rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t n = 2 + rng.next_below(10);
    auto [scores, positives] = random_case(rng, n);
    double before = average_precision(scores, positives);

    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    rng.shuffle(perm);
    std::vector<double> shuffled_scores(n);
    std::vector<bool> shuffled_positives(n);
    for (std::size_t i = 0; i < n; ++i) {
      shuffled_scores[i] = scores[perm[i]];
      shuffled_positives[i] = positives[perm[i]];
    }
    CHECK(average_precision(shuffled_scores, shuffled_positives) == before);
  }
}

TEST_CASE("pr_curve emits one point per distinct threshold") {
  SUBCASE("perfect separation, two positives and two negatives") {
    auto points = pr_curve({0.9, 0.8, 0.2, 0.1}, {true, true, false, false});
    REQUIRE(points.size() == 4);
    CHECK(points[0].precision == 1.0);
    CHECK(points[0].recall == 0.5);
    CHECK(points[1].precision == 1.0);
    CHECK(points[1].recall == 1.0);
    CHECK(points.back().recall == 1.0);
  }

  SUBCASE("single positive example") {
    auto points = pr_curve({0.3}, {true});
    REQUIRE(points.size() == 1);
    CHECK(points[0].precision == 1.0);
    CHECK(points[0].recall == 1.0);
    CHECK(points[0].threshold == 0.3);
  }

  SUBCASE("constant scores collapse to one base-rate point") {
    auto points = pr_curve({0.5, 0.5, 0.5, 0.5}, {true, false, false, true});
    REQUIRE(points.size() == 1);
    CHECK(points[0].recall == 1.0);
    CHECK(points[0].precision == 0.5);
  }
}

TEST_CASE("pr_curve points recompute from scratch") {
  DetRng rng(51);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = 1 + rng.next_below(20);
    auto [scores, positives] = random_case(rng, n);
    auto points = pr_curve(scores, positives);
    std::size_t total_pos = 0;
    for (bool p : positives) total_pos += p ? 1 : 0;
    double prev_recall = -1;
    for (const auto& point : points) {
      std::size_t predicted = 0;
      std::size_t tp = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (scores[i] >= point.threshold) {
          ++predicted;
          tp += positives[i] ? 1 : 0;
        }
      }
      CHECK(point.precision ==
            static_cast<double>(tp) / static_cast<double>(predicted));
      CHECK(point.recall ==
            static_cast<double>(tp) / static_cast<double>(total_pos));
      CHECK(point.recall >= prev_recall);  // descending thresholds
      prev_recall = point.recall;
    }
    CHECK(points.back().recall == 1.0);
  }
}

TEST_CASE("per-label AP handles absent classes and mirror symmetry") {
  SUBCASE("all-positive golds") {
    auto ap = per_label_ap({S::Positive, S::Positive}, {0.9, 0.7});
    REQUIRE(ap.ap_pos.has_value());
    CHECK(*ap.ap_pos == 1.0);
    CHECK(!ap.ap_neg.has_value());
  }

  SUBCASE("mirror-symmetric dataset has equal APs") {
    DetRng rng(61);
    std::vector<S> golds;
    std::vector<double> scores;
    for (int i = 0; i < 40; ++i) {
      double s;
      do {
        s = rng.next_double(0.01, 1.0);
      } while (std::find(scores.begin(), scores.end(), s) != scores.end() ||
               std::find(scores.begin(), scores.end(), -s) != scores.end());
      auto g = static_cast<S>(rng.next_below(3));
      golds.push_back(g);
      scores.push_back(s);
      // and the mirrored twin
      golds.push_back(g == S::Positive  ? S::Negative
                      : g == S::Negative ? S::Positive
                                         : S::Neutral);
      scores.push_back(-s);
    }
    auto ap = per_label_ap(golds, scores);
    REQUIRE(ap.ap_pos.has_value());
    REQUIRE(ap.ap_neg.has_value());
    CHECK(*ap.ap_pos == *ap.ap_neg);
  }

  SUBCASE("random scores give AP near the base rate") {
    DetRng rng(71);
    const std::size_t n = 10000;
    std::vector<S> golds;
    std::vector<double> scores;
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
      bool pos = rng.next_below(10) < 3;  // 30% positives
      golds.push_back(pos ? S::Positive : S::Neutral);
      n_pos += pos ? 1 : 0;
      scores.push_back(rng.next_double(-1.0, 1.0));
    }
    auto ap = per_label_ap(golds, scores);
    double base_rate = static_cast<double>(n_pos) / static_cast<double>(n);
    REQUIRE(ap.ap_pos.has_value());
    CHECK(*ap.ap_pos == doctest::Approx(base_rate).epsilon(0.18));
    CHECK(std::abs(*ap.ap_pos - base_rate) < 0.05);
    CHECK(!ap.ap_neg.has_value());
  }
}

TEST_CASE("annotator agreement is the mean pairwise indicator") {
  SUBCASE("identical annotators everywhere") {
    std::vector<std::vector<S>> sets(6, {S::Neutral, S::Neutral, S::Neutral});
    CHECK(annotator_agreement(sets) == 1.0);
  }

  SUBCASE("two annotators agreeing on 7 of 10 posts") {
    std::vector<std::vector<S>> sets;
    for (int i = 0; i < 7; ++i) sets.push_back({S::Positive, S::Positive});
    for (int i = 0; i < 3; ++i) sets.push_back({S::Positive, S::Negative});
    CHECK(annotator_agreement(sets) == 0.7);
  }

  SUBCASE("three annotators all pairwise different contribute zero") {
    CHECK(annotator_agreement({{S::Positive, S::Neutral, S::Negative}}) == 0.0);
  }

  SUBCASE("a post with a single annotation is an error") {
    expect_error<DataError>(
        [] { annotator_agreement({{S::Positive, S::Positive}, {S::Neutral}}); },
        "fewer than 2");
  }
}

TEST_CASE("report serialization includes the full surface") {
  MetricsReport report;
  report.confusion = table4();
  report.accuracy = accuracy(report.confusion);
  report.ap_pos = 0.5;
  report.pr_pos = {{0.9, 1.0, 0.5}, {0.1, 0.75, 1.0}};
  report.n_examples = 100;

  auto j = report.to_json();
  CHECK(j["accuracy"] == 0.69);
  CHECK(j["ap_neg"].is_null());
  CHECK(j["confusion"][0][1] == 10);
  CHECK(j["pr_pos"].size() == 2);

  auto dir = scratch_dir("metrics");
  save_pr_csv(dir / "pr.csv", report.pr_pos);
  auto csv = read_file(dir / "pr.csv");
  CHECK(csv == "threshold,precision,recall\n0.9,1,0.5\n0.1,0.75,1\n");
}
