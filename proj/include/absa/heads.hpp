#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "absa/rng.hpp"
#include "absa/types.hpp"

namespace absa {

struct SpanHeadParams {
  Eigen::MatrixXd start_weight;  // d_model x 1
  Eigen::MatrixXd end_weight;    // d_model x 1

  static SpanHeadParams init(int d_model, Rng& rng);
};

struct ClassHeadParams {
  Eigen::MatrixXd weight;  // kNumPolarities x d_model
  Eigen::MatrixXd bias;    // kNumPolarities x 1

  static ClassHeadParams init(int d_model, Rng& rng);
};

struct ModelOutput {
  Eigen::VectorXd start_logits, end_logits;  // full sequence
  Eigen::VectorXd start_probs, end_probs;    // exactly 0 at masked positions
  std::optional<Eigen::Vector3d> class_logits, class_probs;
};

/// Multi-hot start/end marks over the encoded sequence (0 or 1 per position).
struct SpanTargets {
  Eigen::VectorXi start_marks, end_marks;

  /// Marks token spans relative to the context segment of the sequence.
  static SpanTargets from_spans(const std::vector<TokenSpan>& spans,
                                int seq_len, int context_offset, int context_len);
};

struct LossWeights {
  double alpha = 1.0 / 3.0;  // aspect extraction
  double beta = 1.0 / 3.0;   // sentiment classification
  double gamma = 1.0 / 3.0;  // opinion extraction

  void validate() const;
};

/// Start/end scores for every position plus a softmax over the unmasked ones.
ModelOutput span_logits(const Eigen::MatrixXd& per_token, const SpanHeadParams& head,
                        const std::vector<std::uint8_t>& mask);

/// Sum of -log p over the marked starts and ends. A target with no spans is
/// trained to point both distributions at position 0 (the [CLS] sentinel).
double span_loss(const ModelOutput& output, const SpanTargets& targets);

struct SpanLossGrad {
  double loss = 0.0;
  Eigen::VectorXd d_start_logits, d_end_logits;
};
SpanLossGrad span_loss_grad(const ModelOutput& output, const SpanTargets& targets);

/// Three-way polarity logits/probabilities from the pooled state.
std::pair<Eigen::Vector3d, Eigen::Vector3d> class_logits(const Eigen::VectorXd& pooled,
                                                         const ClassHeadParams& head);

double class_loss(const Eigen::Vector3d& probs, Polarity label);

struct ClassLossGrad {
  double loss = 0.0;
  Eigen::Vector3d d_logits;
};
ClassLossGrad class_loss_grad(const Eigen::Vector3d& probs, Polarity label);

/// Weighted sum of the three sub-losses. A disabled head contributes via a
/// zero weight, so its term vanishes exactly.
double joint_loss(double ae_loss, double sc_loss, double aoe_loss,
                  const LossWeights& weights);

/// P(span) under the factorized model: start prob at `span.start` times end
/// prob at `span.end - 1`, both in sequence coordinates.
double span_probability(const ModelOutput& output, const TokenSpan& seq_span);

/// Joint score of (span, polarity): span probability times class probability.
double triple_score(const ModelOutput& output, const TokenSpan& seq_span, Polarity p);

}  // namespace absa
