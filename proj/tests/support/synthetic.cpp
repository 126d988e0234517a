#include "synthetic.hpp"

#include <stdexcept>

#include "absa/rng.hpp"

namespace absa::testsupport {

namespace {

// 20 distinct words overall: 7 aspect words, 8 opinion words, 5 connectives.
// Every aspect carries one fixed opinion and polarity, so the right answer
// is fully determined by which aspect a query names.
struct AspectEntry {
  std::vector<std::string> aspect;
  std::vector<std::string> opinion;
  Polarity polarity;
};

const std::vector<AspectEntry> kAspects = {
    {{"food"}, {"tasty"}, Polarity::Positive},
    {{"service"}, {"awful"}, Polarity::Negative},
    {{"screen"}, {"really", "nice"}, Polarity::Positive},
    {{"staff"}, {"not", "good"}, Polarity::Negative},
    {{"battery", "life"}, {"fine"}, Polarity::Neutral},
    {{"price"}, {"great"}, Polarity::Positive}};

}  // namespace

const std::map<std::string, Polarity>& synthetic_polarity_table() {
  static const std::map<std::string, Polarity> table = [] {
    std::map<std::string, Polarity> t;
    for (const auto& entry : kAspects) {
      std::string surface;
      for (const auto& w : entry.opinion) {
        if (!surface.empty()) surface += " ";
        surface += w;
      }
      t[surface] = entry.polarity;
    }
    return t;
  }();
  return table;
}

std::vector<LabeledSentence> make_synthetic_corpus(int n_sentences, uint64_t seed) {
  Rng rng(seed);
  std::vector<LabeledSentence> out;
  for (int i = 0; i < n_sentences; ++i) {
    const bool two_aspects = rng.uniform() < 0.5;
    int a1 = rng.uniform_int(static_cast<int>(kAspects.size()));
    int a2 = a1;
    while (two_aspects && a2 == a1) a2 = rng.uniform_int(static_cast<int>(kAspects.size()));
    const bool join_but = rng.uniform() < 0.5;

    std::vector<std::string> words;
    LabeledSentence s;
    auto emit_clause = [&](int aspect_idx) {
      const AspectEntry& entry = kAspects[aspect_idx];
      words.push_back("the");
      const int aspect_start = static_cast<int>(words.size());
      for (const auto& w : entry.aspect) words.push_back(w);
      const int aspect_end = static_cast<int>(words.size());
      words.push_back("was");
      const int opinion_start = static_cast<int>(words.size());
      for (const auto& w : entry.opinion) words.push_back(w);
      const int opinion_end = static_cast<int>(words.size());
      s.triples.push_back({{aspect_start, aspect_end},
                           {opinion_start, opinion_end},
                           entry.polarity});
    };
    emit_clause(a1);
    if (two_aspects) {
      words.push_back(join_but ? "but" : "and");
      emit_clause(a2);
    }
    words.push_back(".");

    s.id = "syn-" + std::to_string(i);
    for (const auto& w : words) {
      if (!s.text.empty()) s.text += " ";
      s.text += w;
    }
    s.tokens = tokenize(s.text);
    out.push_back(std::move(s));
  }
  return out;
}

OracleScorer::OracleScorer(const std::vector<LabeledSentence>& sentences, double hot,
                           double cold)
    : sentences_(sentences), hot_(hot), cold_(cold) {
  for (const auto& s : sentences_)
    by_text_[s.tokens.join({0, s.tokens.size()})] = &s;
}

ScoreResult OracleScorer::score(const ScoreRequest& request) {
  const std::string key = request.context.join({0, request.context.size()});
  const auto found = by_text_.find(key);
  if (found == by_text_.end())
    throw std::runtime_error("oracle scorer knows no sentence '" + key + "'");
  const LabeledSentence& s = *found->second;

  const int n = request.context.size();
  ScoreResult result;
  result.start_logits = Eigen::VectorXd::Constant(n, cold_);
  result.end_logits = Eigen::VectorXd::Constant(n, cold_);

  auto mark = [&](const TokenSpan& span) {
    result.start_logits(span.start) = hot_;
    result.end_logits(span.end - 1) = hot_;
  };

  switch (request.side) {
    case Side::Left: {
      ++left_calls_;
      for (const auto& t : s.triples) mark(t.aspect);
      break;
    }
    case Side::OpinionOnly: {
      for (const auto& t : s.triples) mark(t.opinion);
      break;
    }
    case Side::Right: {
      ++right_calls_;
      if (!request.given_aspect)
        throw std::runtime_error("right-side oracle request without an aspect");
      Eigen::Vector3d probs = Eigen::Vector3d::Constant(0.05);
      bool known = false;
      for (const auto& t : s.triples) {
        if (t.aspect == *request.given_aspect) {
          mark(t.opinion);
          probs(static_cast<int>(t.polarity)) = 0.9;
          known = true;
        }
      }
      if (!known) probs(0) = 0.9;  // made-up aspect: arbitrary fixed answer
      result.class_probs = probs;
      break;
    }
  }
  return result;
}

}  // namespace absa::testsupport
