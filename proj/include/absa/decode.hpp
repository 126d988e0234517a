#pragma once

#include <vector>

#include <Eigen/Dense>

#include "absa/types.hpp"

namespace absa {

struct DecodeConfig {
  double threshold = 0.0;  // minimum start+end logit sum
  int max_spans = 8;       // cap on extracted spans
  int max_span_len = 8;    // longest span in tokens

  void validate() const;
};

/// Greedy non-maximum suppression over candidate spans. Candidates are all
/// [i, j) with 0 < j - i <= max_span_len, scored start_logits[i] +
/// end_logits[j-1]; below-threshold candidates are dropped, the rest are
/// taken best-first (ties to the earlier span) skipping any that overlap an
/// already accepted span. Result is sorted by start position.
std::vector<TokenSpan> decode_spans(const Eigen::VectorXd& start_logits,
                                    const Eigen::VectorXd& end_logits,
                                    const DecodeConfig& config);

/// Reference decoder with the same contract, written as plain list
/// manipulation. Guarded to short inputs; used to cross-check decode_spans.
std::vector<TokenSpan> brute_force_spans(const std::vector<double>& start_logits,
                                         const std::vector<double>& end_logits,
                                         double threshold, int max_spans,
                                         int max_span_len);

/// Argmax polarity; ties resolve to the lowest class index.
Polarity classify_polarity(const Eigen::Vector3d& class_probs);

}  // namespace absa
