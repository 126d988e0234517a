#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "absa/decode.hpp"
#include "absa/rng.hpp"
#include "doctest.h"

using namespace absa;
using Eigen::Vector3d;
using Eigen::VectorXd;

namespace {

VectorXd vec(const std::vector<double>& v) {
  VectorXd out(static_cast<int>(v.size()));
  for (size_t i = 0; i < v.size(); ++i) out[static_cast<int>(i)] = v[i];
  return out;
}

std::vector<TokenSpan> run_both_and_compare(const std::vector<double>& starts,
                                            const std::vector<double>& ends,
                                            const DecodeConfig& cfg) {
  std::vector<TokenSpan> fast = decode_spans(vec(starts), vec(ends), cfg);
  std::vector<TokenSpan> slow =
      brute_force_spans(starts, ends, cfg.threshold, cfg.max_spans, cfg.max_span_len);
  CHECK(fast == slow);
  return fast;
}

}  // namespace

TEST_CASE("everything below the threshold decodes to nothing") {
  DecodeConfig cfg;
  cfg.threshold = 0.0;
  std::vector<double> lows(6, -50.0);
  CHECK(run_both_and_compare(lows, lows, cfg).empty());
}

TEST_CASE("a single sharp peak decodes to exactly its span") {
  DecodeConfig cfg;
  std::vector<double> starts(6, -10.0), ends(6, -10.0);
  starts[2] = 10.0;
  ends[4] = 10.0;
  std::vector<TokenSpan> spans = run_both_and_compare(starts, ends, cfg);
  REQUIRE(spans.size() == 1);
  CHECK(spans[0] == TokenSpan{2, 5});
}

TEST_CASE("a fixed six-position table matches the reference decoder") {
  DecodeConfig cfg;
  cfg.threshold = 0.0;
  cfg.max_spans = 3;
  cfg.max_span_len = 4;
  std::vector<double> starts = {1.5, -0.2, 2.0, 0.1, -1.0, 0.7};
  std::vector<double> ends = {0.3, 1.1, -0.4, 2.2, 0.6, -0.9};
  std::vector<TokenSpan> spans = run_both_and_compare(starts, ends, cfg);
  CHECK(!spans.empty());
  for (const TokenSpan& s : spans) {
    CHECK(s.length() <= 4);
    CHECK(starts[static_cast<size_t>(s.start)] + ends[static_cast<size_t>(s.end - 1)] >=
          0.0);
  }
}

TEST_CASE("max_spans of one keeps only the best candidate") {
  DecodeConfig cfg;
  cfg.max_spans = 1;
  std::vector<double> starts = {5.0, 4.0, 3.0, 2.0};
  std::vector<double> ends = {5.0, 4.0, 3.0, 2.0};
  std::vector<TokenSpan> spans = run_both_and_compare(starts, ends, cfg);
  REQUIRE(spans.size() == 1);
  CHECK(spans[0] == TokenSpan{0, 1});  // 10.0, the top score
}

TEST_CASE("ties prefer the earlier and shorter span") {
  DecodeConfig cfg;
  cfg.max_spans = 8;
  cfg.max_span_len = 4;
  // All logits equal: every candidate scores the same, so the greedy pass
  // takes [0,1), then the next non-overlapping start, and so on.
  std::vector<double> flat(5, 1.0);
  std::vector<TokenSpan> spans = run_both_and_compare(flat, flat, cfg);
  REQUIRE(spans.size() == 5);
  for (int i = 0; i < 5; ++i) CHECK(spans[static_cast<size_t>(i)] == TokenSpan{i, i + 1});
}

TEST_CASE("decoded spans never overlap and respect every cap") {
  Rng rng(404);
  DecodeConfig cfg;
  cfg.threshold = -1.0;
  cfg.max_spans = 3;
  cfg.max_span_len = 3;
  for (int trial = 0; trial < 200; ++trial) {
    int len = 1 + rng.uniform_int(12);
    std::vector<double> starts(static_cast<size_t>(len)), ends(static_cast<size_t>(len));
    for (int i = 0; i < len; ++i) {
      starts[static_cast<size_t>(i)] = rng.normal(0.0, 2.0);
      ends[static_cast<size_t>(i)] = rng.normal(0.0, 2.0);
    }
    std::vector<TokenSpan> spans = decode_spans(vec(starts), vec(ends), cfg);
    CHECK(spans.size() <= 3);
    for (size_t i = 0; i < spans.size(); ++i) {
      CHECK(spans[i].length() >= 1);
      CHECK(spans[i].length() <= 3);
      CHECK(spans[i].start >= 0);
      CHECK(spans[i].end <= len);
      CHECK(starts[static_cast<size_t>(spans[i].start)] +
                ends[static_cast<size_t>(spans[i].end - 1)] >=
            cfg.threshold);
      if (i > 0) {
        CHECK(spans[i - 1].end <= spans[i].start);  // sorted and disjoint
      }
    }
  }
}

TEST_CASE("random logits agree with the reference decoder across settings") {
  Rng rng(2024);
  int trials = 0;
  for (double threshold : {-1.0, 0.0, 1.0}) {
    for (int max_spans : {1, 3, 8}) {
      for (int max_span_len : {2, 4, 8}) {
        DecodeConfig cfg;
        cfg.threshold = threshold;
        cfg.max_spans = max_spans;
        cfg.max_span_len = max_span_len;
        for (int t = 0; t < 12; ++t) {
          int len = 1 + rng.uniform_int(16);
          std::vector<double> starts(static_cast<size_t>(len)),
              ends(static_cast<size_t>(len));
          for (int i = 0; i < len; ++i) {
            starts[static_cast<size_t>(i)] = rng.normal(0.0, 1.5);
            ends[static_cast<size_t>(i)] = rng.normal(0.0, 1.5);
          }
          run_both_and_compare(starts, ends, cfg);
          ++trials;
        }
      }
    }
  }
  CHECK(trials == 324);
}

TEST_CASE("raising the threshold only removes spans") {
  Rng rng(99);
  DecodeConfig low;
  low.threshold = -1.0;
  DecodeConfig high = low;
  high.threshold = 1.0;
  for (int t = 0; t < 50; ++t) {
    int len = 2 + rng.uniform_int(10);
    VectorXd starts(len), ends(len);
    for (int i = 0; i < len; ++i) {
      starts[i] = rng.normal(0.0, 2.0);
      ends[i] = rng.normal(0.0, 2.0);
    }
    std::vector<TokenSpan> at_high = decode_spans(starts, ends, high);
    for (const TokenSpan& s : at_high) {
      CHECK(starts[s.start] + ends[s.end - 1] >= high.threshold);
    }
  }
}

TEST_CASE("the reference decoder refuses long inputs") {
  std::vector<double> logits(17, 0.0);
  CHECK_THROWS_AS(brute_force_spans(logits, logits, 0.0, 8, 8),
                  std::invalid_argument);
}

TEST_CASE("mismatched logit lengths are rejected") {
  CHECK_THROWS_AS(decode_spans(VectorXd::Zero(4), VectorXd::Zero(5), DecodeConfig{}),
                  std::invalid_argument);
}

TEST_CASE("decode config validation enforces positive caps") {
  DecodeConfig bad;
  bad.max_spans = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.max_spans = 1;
  bad.max_span_len = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("polarity argmax breaks ties toward the lowest index") {
  CHECK(classify_polarity(Vector3d(0, 0, 0)) == Polarity::Positive);
  CHECK(classify_polarity(Vector3d(-1, 5, 2)) == Polarity::Neutral);
  CHECK(classify_polarity(Vector3d(1, 3, 3)) == Polarity::Neutral);
}

TEST_CASE("polarity argmax ignores a constant shift") {
  Rng rng(7);
  for (int t = 0; t < 100; ++t) {
    Vector3d logits(rng.normal(), rng.normal(), rng.normal());
    double shift = rng.normal(0.0, 10.0);
    CHECK(classify_polarity(logits) ==
          classify_polarity(logits + Vector3d::Constant(shift)));
  }
}
