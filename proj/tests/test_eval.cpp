#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "absa/eval.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace absa;

namespace {

TaskItem aspect_item(int start, int end) {
  return TaskItem{TokenSpan{start, end}, {}, {}};
}

TaskItem sc_item(int start, int end, Polarity p) {
  return TaskItem{TokenSpan{start, end}, {}, p};
}

TaskItem triple_item(TokenSpan a, TokenSpan o, Polarity p) {
  return TaskItem{a, o, p};
}

SentencePrediction sent(const std::string& id, std::vector<TaskItem> items) {
  return SentencePrediction{id, std::move(items)};
}

}  // namespace

TEST_CASE("counts translate to the standard precision recall f1") {
  Metrics m = prf1(3, 1, 2);
  CHECK(m.precision == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(m.recall == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(m.f1 == doctest::Approx(2.0 * 0.75 * 0.6 / 1.35).epsilon(1e-12));
}

TEST_CASE("empty denominators score as vacuous successes") {
  Metrics no_pred = prf1(0, 0, 5);
  CHECK(no_pred.precision == 1.0);
  CHECK(no_pred.recall == 0.0);
  CHECK(no_pred.f1 == 0.0);

  Metrics no_gold = prf1(0, 3, 0);
  CHECK(no_gold.precision == 0.0);
  CHECK(no_gold.recall == 1.0);
  CHECK(no_gold.f1 == 0.0);

  Metrics nothing = prf1(0, 0, 0);
  CHECK(nothing.precision == 1.0);
  CHECK(nothing.recall == 1.0);
  CHECK(nothing.f1 == 1.0);
}

TEST_CASE("f1 is exactly the harmonic mean whenever defined") {
  for (long tp : {1L, 3L, 7L}) {
    for (long fp : {0L, 2L, 5L}) {
      for (long fn : {0L, 1L, 4L}) {
        Metrics m = prf1(tp, fp, fn);
        double expect = 2.0 * m.precision * m.recall / (m.precision + m.recall);
        CHECK(m.f1 == doctest::Approx(expect).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("the two-correct two-spurious hand count") {
  Metrics m = prf1(2, 2, 0);
  CHECK(m.precision == doctest::Approx(0.500).epsilon(1e-9));
  CHECK(m.recall == doctest::Approx(1.000).epsilon(1e-9));
  CHECK(m.f1 == doctest::Approx(0.667).epsilon(1e-3));
}

TEST_CASE("identical prediction and gold sets score perfectly") {
  std::vector<SentencePrediction> gold = {
      sent("a", {aspect_item(0, 1), aspect_item(3, 5)}),
      sent("b", {aspect_item(2, 3)}),
  };
  Metrics m = evaluate_task(Subtask::AE, gold, gold);
  CHECK(m.precision == 1.0);
  CHECK(m.recall == 1.0);
  CHECK(m.f1 == 1.0);
  CHECK(m.tp == 3);
  CHECK(m.fp == 0);
  CHECK(m.fn == 0);
}

TEST_CASE("one shared item out of two on each side scores one half") {
  std::vector<SentencePrediction> pred = {
      sent("s", {aspect_item(0, 1), aspect_item(1, 2)})};  // {A, B}
  std::vector<SentencePrediction> gold = {
      sent("s", {aspect_item(1, 2), aspect_item(2, 3)})};  // {B, C}
  Metrics m = evaluate_task(Subtask::AE, pred, gold);
  CHECK(m.tp == 1);
  CHECK(m.fp == 1);
  CHECK(m.fn == 1);
  CHECK(m.precision == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(m.recall == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(m.f1 == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("two correct and two swapped triples score half precision full recall") {
  TokenSpan rice{0, 1}, too_dry{2, 4}, tuna{5, 6}, not_fresh{6, 10};
  std::vector<SentencePrediction> gold = {
      sent("rice", {triple_item(rice, too_dry, Polarity::Negative),
                    triple_item(tuna, not_fresh, Polarity::Negative)})};
  std::vector<SentencePrediction> pred = {
      sent("rice", {triple_item(rice, too_dry, Polarity::Negative),
                    triple_item(tuna, not_fresh, Polarity::Negative),
                    triple_item(rice, not_fresh, Polarity::Negative),
                    triple_item(tuna, too_dry, Polarity::Negative)})};
  Metrics m = evaluate_task(Subtask::Triple, pred, gold);
  CHECK(m.precision == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(m.recall == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(m.f1 == doctest::Approx(0.667).epsilon(1e-3));
}

TEST_CASE("empty predictions against empty gold are vacuously perfect") {
  std::vector<SentencePrediction> pred = {sent("a", {}), sent("b", {})};
  Metrics m = evaluate_task(Subtask::AE, pred, pred);
  CHECK(m.precision == 1.0);
  CHECK(m.recall == 1.0);
  CHECK(m.f1 == 1.0);
}

TEST_CASE("missing predictions drop recall but not precision") {
  std::vector<SentencePrediction> pred = {sent("a", {})};
  std::vector<SentencePrediction> gold = {sent("a", {aspect_item(0, 1)})};
  Metrics m = evaluate_task(Subtask::AE, pred, gold);
  CHECK(m.precision == 1.0);
  CHECK(m.recall == 0.0);
  CHECK(m.f1 == 0.0);
}

TEST_CASE("precision of one side is the recall of the other") {
  std::vector<SentencePrediction> a = {
      sent("s", {aspect_item(0, 1), aspect_item(1, 2), aspect_item(4, 6)})};
  std::vector<SentencePrediction> b = {
      sent("s", {aspect_item(1, 2), aspect_item(2, 3)})};
  Metrics ab = evaluate_task(Subtask::AE, a, b);
  Metrics ba = evaluate_task(Subtask::AE, b, a);
  CHECK(ab.precision == doctest::Approx(ba.recall).epsilon(1e-12));
  CHECK(ab.recall == doctest::Approx(ba.precision).epsilon(1e-12));
}

TEST_CASE("polarity classification is macro-averaged over the three classes") {
  std::vector<SentencePrediction> gold = {
      sent("s1", {sc_item(0, 1, Polarity::Positive), sc_item(1, 2, Polarity::Neutral)}),
      sent("s2", {sc_item(0, 1, Polarity::Negative)}),
  };
  std::vector<SentencePrediction> pred = {
      sent("s1", {sc_item(0, 1, Polarity::Positive), sc_item(1, 2, Polarity::Positive)}),
      sent("s2", {sc_item(0, 1, Polarity::Negative)}),
  };
  Metrics m = evaluate_task(Subtask::SC, pred, gold);
  // Positive: tp 1, fp 1 -> P 1/2, R 1. Neutral: fn 1 -> P 1, R 0.
  // Negative: tp 1 -> P 1, R 1. Macro over the three classes:
  CHECK(m.precision == doctest::Approx((0.5 + 1.0 + 1.0) / 3.0).epsilon(1e-12));
  CHECK(m.recall == doctest::Approx((1.0 + 0.0 + 1.0) / 3.0).epsilon(1e-12));
  CHECK(m.f1 == doctest::Approx((2.0 / 3.0 + 0.0 + 1.0) / 3.0).epsilon(1e-12));
  CHECK(m.tp == 2);
  CHECK(m.fp == 1);
  CHECK(m.fn == 1);
}

TEST_CASE("sentence ids must match one to one") {
  std::vector<SentencePrediction> pred = {sent("a", {}), sent("b", {})};
  std::vector<SentencePrediction> gold = {sent("a", {}), sent("c", {})};
  CHECK_THROWS_WITH_AS(evaluate_task(Subtask::AE, pred, gold),
                       doctest::Contains("sentence id c"), std::invalid_argument);
  CHECK_THROWS_AS(evaluate_task(Subtask::AE, gold, pred), std::invalid_argument);

  std::vector<SentencePrediction> dup = {sent("a", {}), sent("a", {})};
  std::vector<SentencePrediction> two = {sent("a", {}), sent("b", {})};
  CHECK_THROWS_AS(evaluate_task(Subtask::AE, dup, two), std::invalid_argument);
}

TEST_CASE("the score report prints six-decimal columns") {
  Metrics m = prf1(2, 2, 0);
  std::string report = format_score_report({{"triple", m}});
  CHECK(report ==
        "task\tprecision\trecall\tf1\ttp\tfp\tfn\n"
        "triple\t0.500000\t1.000000\t0.666667\t2\t2\t0\n");
}

TEST_CASE("the json report carries the same numbers") {
  Metrics m = prf1(3, 1, 2);
  nlohmann::json parsed = nlohmann::json::parse(format_score_json({{"ae", m}}));
  CHECK(parsed["ae"]["precision"].get<double>() == doctest::Approx(m.precision));
  CHECK(parsed["ae"]["recall"].get<double>() == doctest::Approx(m.recall));
  CHECK(parsed["ae"]["f1"].get<double>() == doctest::Approx(m.f1));
  CHECK(parsed["ae"]["tp"].get<long>() == 3);
  CHECK(parsed["ae"]["fp"].get<long>() == 1);
  CHECK(parsed["ae"]["fn"].get<long>() == 2);
}

TEST_CASE("extra correct predictions never hurt recall") {
  std::vector<SentencePrediction> gold = {
      sent("s", {aspect_item(0, 1), aspect_item(2, 3)})};
  std::vector<SentencePrediction> partial = {sent("s", {aspect_item(0, 1)})};
  std::vector<SentencePrediction> full = {
      sent("s", {aspect_item(0, 1), aspect_item(2, 3)})};
  Metrics before = evaluate_task(Subtask::AE, partial, gold);
  Metrics after = evaluate_task(Subtask::AE, full, gold);
  CHECK(after.recall >= before.recall);

  std::vector<SentencePrediction> noisy = {
      sent("s", {aspect_item(0, 1), aspect_item(5, 6)})};
  Metrics with_noise = evaluate_task(Subtask::AE, noisy, gold);
  CHECK(with_noise.precision <= before.precision);
}
