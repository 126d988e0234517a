#include "absa/decode.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace absa {

void DecodeConfig::validate() const {
  if (max_spans <= 0 || max_span_len <= 0)
    throw std::invalid_argument("decode limits must be positive");
  if (!std::isfinite(threshold))
    throw std::invalid_argument("decode threshold must be finite");
}

std::vector<TokenSpan> decode_spans(const Eigen::VectorXd& start_logits,
                                    const Eigen::VectorXd& end_logits,
                                    const DecodeConfig& config) {
  config.validate();
  if (start_logits.size() != end_logits.size())
    throw std::invalid_argument("start/end logit lengths differ");
  const int n = static_cast<int>(start_logits.size());

  struct Candidate {
    double score;
    TokenSpan span;
  };
  std::vector<Candidate> candidates;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < std::min(n, i + config.max_span_len); ++j) {
      const double score = start_logits(i) + end_logits(j);
      if (score >= config.threshold) candidates.push_back({score, {i, j + 1}});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.span.start != b.span.start) return a.span.start < b.span.start;
    return a.span.end < b.span.end;
  });

  std::vector<TokenSpan> accepted;
  for (const auto& c : candidates) {
    if (static_cast<int>(accepted.size()) == config.max_spans) break;
    const bool clashes = std::any_of(accepted.begin(), accepted.end(),
                                     [&](const TokenSpan& s) { return s.overlaps(c.span); });
    if (!clashes) accepted.push_back(c.span);
  }
  std::sort(accepted.begin(), accepted.end(),
            [](const TokenSpan& a, const TokenSpan& b) { return a.start < b.start; });
  return accepted;
}

std::vector<TokenSpan> brute_force_spans(const std::vector<double>& start_logits,
                                         const std::vector<double>& end_logits,
                                         double threshold, int max_spans,
                                         int max_span_len) {
  if (start_logits.size() != end_logits.size())
    throw std::invalid_argument("start/end logit lengths differ");
  if (start_logits.size() > 16)
    throw std::invalid_argument("brute_force_spans is limited to 16 positions");

  // Enumerate every legal (start, end, score) row.
  struct Row {
    int start, end;
    double score;
  };
  std::vector<Row> pool;
  const int n = static_cast<int>(start_logits.size());
  for (int start = 0; start < n; ++start) {
    for (int end = start + 1; end <= n; ++end) {
      if (end - start > max_span_len) continue;
      const double score = start_logits[start] + end_logits[end - 1];
      if (score < threshold) continue;
      pool.push_back({start, end, score});
    }
  }

  // Repeatedly pull out the best remaining row, then discard everything
  // that shares a token with it.
  std::vector<Row> kept;
  while (!pool.empty() && static_cast<int>(kept.size()) < max_spans) {
    size_t best = 0;
    for (size_t i = 1; i < pool.size(); ++i) {
      const Row& a = pool[i];
      const Row& b = pool[best];
      const bool better = a.score > b.score ||
                          (a.score == b.score &&
                           (a.start < b.start || (a.start == b.start && a.end < b.end)));
      if (better) best = i;
    }
    const Row chosen = pool[best];
    kept.push_back(chosen);
    std::vector<Row> surviving;
    for (const Row& r : pool) {
      const bool disjoint = r.end <= chosen.start || r.start >= chosen.end;
      if (disjoint) surviving.push_back(r);
    }
    pool.swap(surviving);
  }

  std::sort(kept.begin(), kept.end(), [](const Row& a, const Row& b) { return a.start < b.start; });
  std::vector<TokenSpan> out;
  for (const Row& r : kept) out.push_back({r.start, r.end});
  return out;
}

Polarity classify_polarity(const Eigen::Vector3d& class_probs) {
  int best = 0;
  for (int i = 1; i < kNumPolarities; ++i)
    if (class_probs(i) > class_probs(best)) best = i;
  return static_cast<Polarity>(best);
}

}  // namespace absa
