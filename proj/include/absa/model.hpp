#pragma once

#include <string>
#include <vector>

#include "absa/corpus.hpp"
#include "absa/encoder.hpp"
#include "absa/heads.hpp"
#include "absa/scorer.hpp"

namespace absa {

/// The full trainable model: shared encoder, one span head per query side,
/// and the polarity head fed by the pooled state of right-side queries.
/// Opinion-only queries run through the right span head.
struct Model {
  EncoderParams encoder;
  SpanHeadParams left_head, right_head;
  ClassHeadParams class_head;

  static Model init(const EncoderConfig& config, uint64_t seed);
  static Model zeros_like(const Model& other);
  void set_zero();
};

std::vector<NamedTensor> tensor_refs(Model& model);

/// Binary checkpoint: magic "AMRC", format version, encoder config as JSON,
/// then every tensor by name with its shape and raw doubles (little-endian).
void save_checkpoint(const std::string& path, const Model& model);
Model load_checkpoint(const std::string& path);

struct BatchLoss {
  double total = 0.0;  // weighted joint objective
  double ae = 0.0;     // mean aspect-span loss over left instances
  double sc = 0.0;     // mean polarity loss over right instances
  double aoe = 0.0;    // mean opinion-span loss over right + opinion-only
};

/// Joint loss over a batch, each term averaged over the instances that carry
/// it, then combined with the configured weights. When `grads` is non-null
/// the exact parameter gradients of `total` accumulate into it.
BatchLoss batch_loss(const Model& model, const std::vector<const MrcInstance*>& batch,
                     const Vocab& vocab, int max_len, const LossWeights& weights,
                     bool train_mode, Rng* rng, Model* grads);

/// Finite-difference check of the full training gradient (encoder and heads
/// together) on the given batch. Returns the worst relative error.
double model_grad_check(const EncoderConfig& config,
                        const std::vector<const MrcInstance*>& batch,
                        const Vocab& vocab, const LossWeights& weights,
                        double epsilon, int coords_per_tensor = 0);

/// Production scorer: encodes the query/context pair, runs the encoder and
/// the side-matching heads, and restricts span scores to context positions.
class ModelScorer : public MrcScorer {
 public:
  ModelScorer(const Model& model, const Vocab& vocab, int max_len)
      : model_(model), vocab_(vocab), max_len_(max_len) {}
  ScoreResult score(const ScoreRequest& request) override;

 private:
  const Model& model_;
  const Vocab& vocab_;
  int max_len_;
};

}  // namespace absa
