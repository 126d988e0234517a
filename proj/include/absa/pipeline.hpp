#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "absa/corpus.hpp"
#include "absa/decode.hpp"
#include "absa/heads.hpp"
#include "absa/model.hpp"
#include "absa/scorer.hpp"

namespace absa {

/// The seven query routings: pure extraction (AE, OE), aspect-conditioned
/// prediction on gold aspects (SC, AOE), and the composed two-stage runs
/// (AESC, Pair, Triple).
enum class Subtask { AE, OE, SC, AOE, AESC, Pair, Triple };

Subtask parse_subtask(std::string_view name);
const char* to_string(Subtask task);

using TripleSet = std::set<Triple>;

/// One predicted unit; which fields are set depends on the subtask.
struct TaskItem {
  std::optional<TokenSpan> aspect;
  std::optional<TokenSpan> opinion;
  std::optional<Polarity> polarity;

  auto operator<=>(const TaskItem&) const = default;
};

struct SentencePrediction {
  std::string sentence_id;
  std::vector<TaskItem> items;
};

struct PipelineConfig {
  DecodeConfig left;   // aspect extraction pass
  DecodeConfig right;  // opinion extraction passes (and OE)
};

/// One extracted aspect with everything its follow-up query produced.
struct AspectResult {
  TokenSpan aspect;
  std::vector<TokenSpan> opinions;
  Polarity polarity = Polarity::Positive;
};

struct PipelineResult {
  std::vector<AspectResult> aspects;
};

/// Two-stage inference over one sentence: extract aspects with the left
/// query, then ask one right query per extracted aspect. A sentence with no
/// extracted aspects yields an empty result.
PipelineResult infer_triples(MrcScorer& scorer, const TokenSeq& sentence,
                             const QueryTemplates& templates,
                             const PipelineConfig& config);

TripleSet triples_of(const PipelineResult& result);

/// Runs one subtask over one sentence. SC and AOE condition on the gold
/// aspects of `sentence`; the other subtasks predict from the text alone.
std::vector<TaskItem> run_task(Subtask task, MrcScorer& scorer,
                               const LabeledSentence& sentence,
                               const QueryTemplates& templates,
                               const PipelineConfig& config);

/// Gold-side items for the same subtask, for exact-match scoring.
std::vector<TaskItem> gold_items(Subtask task, const LabeledSentence& sentence);

struct TrainConfig {
  double learning_rate = 2e-5;
  double warmup_fraction = 0.1;
  int epochs = 3;
  int batch_size = 12;
  int max_steps = 0;  // 0 = run every epoch to completion
  LossWeights weights;
  uint64_t seed = 7;  // drives shuffling and dropout
  // Ablation switches: each zeroes its head's loss weight for the whole run.
  bool disable_right_extraction = false;      // opinion spans (gamma -> 0)
  bool disable_right_classification = false;  // polarity (beta -> 0)

  LossWeights effective_weights() const;
  void validate() const;
};

struct TrainStats {
  std::vector<double> epoch_mean_loss;
  int steps = 0;
};

/// Adam with linear warmup then a constant rate. Deterministic for a fixed
/// seed; throws with the failing step index if the loss turns non-finite.
TrainStats train(Model& model, const MrcDataset& data, const Vocab& vocab,
                 const TrainConfig& config);

}  // namespace absa
