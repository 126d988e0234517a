#pragma once

#include <string>
#include <utility>
#include <vector>

#include "absa/pipeline.hpp"

namespace absa {

struct Metrics {
  long tp = 0, fp = 0, fn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
};

/// Exact-match counts to scores. Empty denominators score perfect:
/// no predictions -> precision 1, no gold -> recall 1, and f1 is 0 only
/// when precision + recall is 0.
Metrics prf1(long tp, long fp, long fn);

/// Scores predictions against gold, joined per sentence id (every id must
/// appear on both sides exactly once). Extraction-style subtasks use
/// micro-averaged exact match; SC is macro-averaged over the three polarity
/// classes, matching predictions to gold aspects.
Metrics evaluate_task(Subtask task, const std::vector<SentencePrediction>& predictions,
                      const std::vector<SentencePrediction>& gold);

/// Fixed-format TSV: header then one row per task, six decimals throughout.
/// For SC rows the counts are the per-class sums under macro averaging.
std::string format_score_report(const std::vector<std::pair<std::string, Metrics>>& rows);
void write_score_report(const std::string& path,
                        const std::vector<std::pair<std::string, Metrics>>& rows);

/// The same numbers as a JSON object keyed by task.
std::string format_score_json(const std::vector<std::pair<std::string, Metrics>>& rows);

}  // namespace absa
