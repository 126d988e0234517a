#pragma once

#include <vector>

#include "absa/eval.hpp"
#include "absa/pipeline.hpp"

namespace absa {

struct ThresholdPoint {
  double threshold = 0.0;
  Metrics metrics;
};

struct ThresholdSweep {
  std::vector<ThresholdPoint> points;  // grid order
  double best = 0.0;                   // highest f1, ties to the smaller value
};

/// Sweeps one side's decode threshold over `grid`, scoring `task` on the
/// given sentences at each setting. The other side keeps its configured
/// threshold.
ThresholdSweep tune_threshold(MrcScorer& scorer,
                              const std::vector<LabeledSentence>& sentences,
                              const QueryTemplates& templates, Subtask task,
                              PipelineConfig config, Side side,
                              const std::vector<double>& grid);

}  // namespace absa
