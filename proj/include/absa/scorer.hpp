#pragma once

#include <optional>

#include <Eigen/Dense>

#include "absa/corpus.hpp"
#include "absa/tokenizer.hpp"
#include "absa/types.hpp"

namespace absa {

struct ScoreRequest {
  Side side = Side::Left;
  TokenSeq query;
  TokenSeq context;
  /// For right-side queries: the aspect the query asks about, in context
  /// token coordinates. Test doubles key on it; the trained model reads the
  /// aspect from the query text instead.
  std::optional<TokenSpan> given_aspect;
};

struct ScoreResult {
  /// Start/end scores restricted to context positions (length = context size).
  Eigen::VectorXd start_logits, end_logits;
  std::optional<Eigen::Vector3d> class_probs;
};

/// Scoring interface the inference pipeline runs against, so tests can swap
/// in hand-built scorers with known answers.
class MrcScorer {
 public:
  virtual ~MrcScorer() = default;
  virtual ScoreResult score(const ScoreRequest& request) = 0;
};

}  // namespace absa
