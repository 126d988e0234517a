#include "absa/threshold.hpp"

#include <stdexcept>

namespace absa {

ThresholdSweep tune_threshold(MrcScorer& scorer,
                              const std::vector<LabeledSentence>& sentences,
                              const QueryTemplates& templates, Subtask task,
                              PipelineConfig config, Side side,
                              const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("threshold grid is empty");
  if (sentences.empty()) throw std::invalid_argument("no sentences to tune on");
  if (side == Side::OpinionOnly)
    throw std::invalid_argument("tuning targets the left or right threshold");

  std::vector<SentencePrediction> gold;
  for (const auto& s : sentences) gold.push_back({s.id, gold_items(task, s)});

  ThresholdSweep sweep;
  bool have_best = false;
  double best_f1 = 0.0;
  for (double value : grid) {
    (side == Side::Left ? config.left : config.right).threshold = value;
    std::vector<SentencePrediction> predictions;
    for (const auto& s : sentences)
      predictions.push_back({s.id, run_task(task, scorer, s, templates, config)});
    const Metrics metrics = evaluate_task(task, predictions, gold);
    sweep.points.push_back({value, metrics});
    if (!have_best || metrics.f1 > best_f1 ||
        (metrics.f1 == best_f1 && value < sweep.best)) {
      have_best = true;
      best_f1 = metrics.f1;
      sweep.best = value;
    }
  }
  return sweep;
}

}  // namespace absa
