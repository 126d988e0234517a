#include "absa/heads.hpp"

#include <cmath>
#include <stdexcept>

namespace absa {

namespace {

Eigen::MatrixXd normal_matrix(int rows, int cols, double stddev, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.normal(0.0, stddev);
  return m;
}

/// Softmax restricted to unmasked positions; masked entries are exactly 0.
Eigen::VectorXd masked_softmax(const Eigen::VectorXd& logits,
                               const std::vector<std::uint8_t>& mask) {
  const int n = static_cast<int>(logits.size());
  double mx = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    if (mask[i]) mx = std::max(mx, logits(i));
  Eigen::VectorXd probs = Eigen::VectorXd::Zero(n);
  double z = 0.0;
  for (int i = 0; i < n; ++i) {
    if (mask[i]) {
      probs(i) = std::exp(logits(i) - mx);
      z += probs(i);
    }
  }
  if (z == 0.0) throw std::invalid_argument("span softmax over an all-masked sequence");
  probs /= z;
  return probs;
}

/// Applies the no-answer convention: with zero marked spans the [CLS] slot
/// at position 0 becomes the target.
Eigen::VectorXi effective_marks(const Eigen::VectorXi& marks, int total) {
  if (total > 0) return marks;
  Eigen::VectorXi sentinel = Eigen::VectorXi::Zero(marks.size());
  sentinel(0) = 1;
  return sentinel;
}

void check_targets(const ModelOutput& output, const SpanTargets& targets) {
  if (targets.start_marks.size() != output.start_probs.size() ||
      targets.end_marks.size() != output.end_probs.size())
    throw std::invalid_argument("span target length differs from sequence length");
  if (targets.start_marks.sum() != targets.end_marks.sum())
    throw std::invalid_argument("start and end mark counts differ");
  for (int i = 0; i < targets.start_marks.size(); ++i) {
    if ((targets.start_marks(i) && output.start_probs(i) == 0.0) ||
        (targets.end_marks(i) && output.end_probs(i) == 0.0))
      throw std::invalid_argument("span target marks a masked position");
  }
}

}  // namespace

SpanHeadParams SpanHeadParams::init(int d_model, Rng& rng) {
  return {normal_matrix(d_model, 1, 0.02, rng), normal_matrix(d_model, 1, 0.02, rng)};
}

ClassHeadParams ClassHeadParams::init(int d_model, Rng& rng) {
  return {normal_matrix(kNumPolarities, d_model, 0.02, rng),
          Eigen::MatrixXd::Zero(kNumPolarities, 1)};
}

SpanTargets SpanTargets::from_spans(const std::vector<TokenSpan>& spans, int seq_len,
                                    int context_offset, int context_len) {
  SpanTargets t;
  t.start_marks = Eigen::VectorXi::Zero(seq_len);
  t.end_marks = Eigen::VectorXi::Zero(seq_len);
  for (const auto& span : spans) {
    if (span.start < 0 || span.end <= span.start || span.end > context_len)
      throw std::invalid_argument("answer span " + to_string(span) +
                                  " falls outside the context");
    t.start_marks(context_offset + span.start) = 1;
    t.end_marks(context_offset + span.end - 1) = 1;
  }
  return t;
}

void LossWeights::validate() const {
  for (double w : {alpha, beta, gamma})
    if (w < 0.0 || w > 1.0 || !std::isfinite(w))
      throw std::invalid_argument("loss weights must lie in [0, 1]");
}

ModelOutput span_logits(const Eigen::MatrixXd& per_token, const SpanHeadParams& head,
                        const std::vector<std::uint8_t>& mask) {
  if (static_cast<int>(mask.size()) != per_token.rows())
    throw std::invalid_argument("attention mask length differs from sequence length");
  ModelOutput out;
  out.start_logits = per_token * head.start_weight.col(0);
  out.end_logits = per_token * head.end_weight.col(0);
  out.start_probs = masked_softmax(out.start_logits, mask);
  out.end_probs = masked_softmax(out.end_logits, mask);
  return out;
}

double span_loss(const ModelOutput& output, const SpanTargets& targets) {
  check_targets(output, targets);
  const Eigen::VectorXi starts = effective_marks(targets.start_marks, targets.start_marks.sum());
  const Eigen::VectorXi ends = effective_marks(targets.end_marks, targets.end_marks.sum());
  double loss = 0.0;
  for (int i = 0; i < starts.size(); ++i) {
    if (starts(i)) loss -= std::log(output.start_probs(i));
    if (ends(i)) loss -= std::log(output.end_probs(i));
  }
  return loss;
}

SpanLossGrad span_loss_grad(const ModelOutput& output, const SpanTargets& targets) {
  check_targets(output, targets);
  const Eigen::VectorXi starts = effective_marks(targets.start_marks, targets.start_marks.sum());
  const Eigen::VectorXi ends = effective_marks(targets.end_marks, targets.end_marks.sum());
  SpanLossGrad g;
  const int n = static_cast<int>(starts.size());
  g.d_start_logits = Eigen::VectorXd::Zero(n);
  g.d_end_logits = Eigen::VectorXd::Zero(n);
  const double n_start = starts.sum();
  const double n_end = ends.sum();
  for (int i = 0; i < n; ++i) {
    if (starts(i)) g.loss -= std::log(output.start_probs(i));
    if (ends(i)) g.loss -= std::log(output.end_probs(i));
    // d/dlogit of sum_k y_k (-log p_k) = (sum y) p_i - y_i; masked positions
    // hold probability 0 and no marks, so their gradient is exactly 0.
    g.d_start_logits(i) = n_start * output.start_probs(i) - starts(i);
    g.d_end_logits(i) = n_end * output.end_probs(i) - ends(i);
  }
  return g;
}

std::pair<Eigen::Vector3d, Eigen::Vector3d> class_logits(const Eigen::VectorXd& pooled,
                                                         const ClassHeadParams& head) {
  Eigen::Vector3d logits = head.weight * pooled + head.bias.col(0);
  const double mx = logits.maxCoeff();
  Eigen::Vector3d probs = (logits.array() - mx).exp();
  probs /= probs.sum();
  return {logits, probs};
}

double class_loss(const Eigen::Vector3d& probs, Polarity label) {
  return -std::log(probs(static_cast<int>(label)));
}

ClassLossGrad class_loss_grad(const Eigen::Vector3d& probs, Polarity label) {
  ClassLossGrad g;
  g.loss = class_loss(probs, label);
  g.d_logits = probs;
  g.d_logits(static_cast<int>(label)) -= 1.0;
  return g;
}

double joint_loss(double ae_loss, double sc_loss, double aoe_loss,
                  const LossWeights& weights) {
  weights.validate();
  return weights.alpha * ae_loss + weights.beta * sc_loss + weights.gamma * aoe_loss;
}

double span_probability(const ModelOutput& output, const TokenSpan& seq_span) {
  if (seq_span.start < 0 || seq_span.end <= seq_span.start ||
      seq_span.end > output.start_probs.size())
    throw std::invalid_argument("span " + to_string(seq_span) + " outside the sequence");
  return output.start_probs(seq_span.start) * output.end_probs(seq_span.end - 1);
}

double triple_score(const ModelOutput& output, const TokenSpan& seq_span, Polarity p) {
  if (!output.class_probs)
    throw std::invalid_argument("triple_score needs class probabilities");
  return span_probability(output, seq_span) * (*output.class_probs)(static_cast<int>(p));
}

}  // namespace absa
