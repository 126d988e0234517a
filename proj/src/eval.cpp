#include "absa/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace absa {

namespace {

std::map<std::string, std::set<TaskItem>> by_sentence(
    const std::vector<SentencePrediction>& rows, const char* what) {
  std::map<std::string, std::set<TaskItem>> out;
  for (const auto& row : rows) {
    const auto [it, fresh] =
        out.emplace(row.sentence_id, std::set<TaskItem>(row.items.begin(), row.items.end()));
    if (!fresh)
      throw std::invalid_argument(std::string(what) + " repeats sentence id " +
                                  row.sentence_id);
  }
  return out;
}

void check_same_ids(const std::map<std::string, std::set<TaskItem>>& pred,
                    const std::map<std::string, std::set<TaskItem>>& gold) {
  for (const auto& [id, items] : gold)
    if (!pred.count(id))
      throw std::invalid_argument("no prediction for sentence id " + id);
  for (const auto& [id, items] : pred)
    if (!gold.count(id))
      throw std::invalid_argument("prediction for unknown sentence id " + id);
}

Metrics micro_exact_match(const std::map<std::string, std::set<TaskItem>>& pred,
                          const std::map<std::string, std::set<TaskItem>>& gold) {
  long tp = 0, fp = 0, fn = 0;
  for (const auto& [id, gold_items] : gold) {
    const auto& pred_items = pred.at(id);
    long hits = 0;
    for (const auto& item : pred_items)
      if (gold_items.count(item)) ++hits;
    tp += hits;
    fp += static_cast<long>(pred_items.size()) - hits;
    fn += static_cast<long>(gold_items.size()) - hits;
  }
  return prf1(tp, fp, fn);
}

/// Per-class counts over (aspect -> polarity) decisions, macro-averaged.
Metrics macro_class_match(const std::map<std::string, std::set<TaskItem>>& pred,
                          const std::map<std::string, std::set<TaskItem>>& gold) {
  long tp[kNumPolarities] = {0}, fp[kNumPolarities] = {0}, fn[kNumPolarities] = {0};
  for (const auto& [id, gold_items] : gold) {
    std::map<TokenSpan, Polarity> predicted;
    for (const auto& item : pred.at(id)) {
      if (!item.aspect || !item.polarity)
        throw std::invalid_argument("polarity prediction lacks an aspect or label");
      predicted.emplace(*item.aspect, *item.polarity);
    }
    for (const auto& item : gold_items) {
      const int want = static_cast<int>(*item.polarity);
      const auto got = predicted.find(*item.aspect);
      if (got == predicted.end()) {
        ++fn[want];
      } else if (static_cast<int>(got->second) == want) {
        ++tp[want];
      } else {
        ++fn[want];
        ++fp[static_cast<int>(got->second)];
      }
    }
  }
  Metrics macro;
  for (int c = 0; c < kNumPolarities; ++c) {
    const Metrics m = prf1(tp[c], fp[c], fn[c]);
    macro.tp += m.tp;
    macro.fp += m.fp;
    macro.fn += m.fn;
    macro.precision += m.precision / kNumPolarities;
    macro.recall += m.recall / kNumPolarities;
    macro.f1 += m.f1 / kNumPolarities;
  }
  return macro;
}

}  // namespace

Metrics prf1(long tp, long fp, long fn) {
  Metrics m;
  m.tp = tp;
  m.fp = fp;
  m.fn = fn;
  m.precision = (tp + fp) == 0 ? 1.0 : static_cast<double>(tp) / (tp + fp);
  m.recall = (tp + fn) == 0 ? 1.0 : static_cast<double>(tp) / (tp + fn);
  const double pr = m.precision + m.recall;
  m.f1 = pr == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / pr;
  return m;
}

Metrics evaluate_task(Subtask task, const std::vector<SentencePrediction>& predictions,
                      const std::vector<SentencePrediction>& gold) {
  const auto pred_map = by_sentence(predictions, "predictions");
  const auto gold_map = by_sentence(gold, "gold");
  check_same_ids(pred_map, gold_map);
  return task == Subtask::SC ? macro_class_match(pred_map, gold_map)
                             : micro_exact_match(pred_map, gold_map);
}

std::string format_score_report(const std::vector<std::pair<std::string, Metrics>>& rows) {
  std::string out = "task\tprecision\trecall\tf1\ttp\tfp\tfn\n";
  char line[200];
  for (const auto& [task, m] : rows) {
    std::snprintf(line, sizeof(line), "%s\t%.6f\t%.6f\t%.6f\t%ld\t%ld\t%ld\n",
                  task.c_str(), m.precision, m.recall, m.f1, m.tp, m.fp, m.fn);
    out += line;
  }
  return out;
}

std::string format_score_json(const std::vector<std::pair<std::string, Metrics>>& rows) {
  nlohmann::json tasks = nlohmann::json::object();
  for (const auto& [task, m] : rows)
    tasks[task] = {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1},
                   {"tp", m.tp},               {"fp", m.fp},         {"fn", m.fn}};
  return tasks.dump(2) + "\n";
}

void write_score_report(const std::string& path,
                        const std::vector<std::pair<std::string, Metrics>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write score report to " + path);
  out << format_score_report(rows);
}

}  // namespace absa
