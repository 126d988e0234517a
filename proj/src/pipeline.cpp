#include "absa/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace absa {

namespace {

/// Distinct aspect spans in first-occurrence order.
std::vector<TokenSpan> gold_aspects(const LabeledSentence& sentence) {
  std::vector<TokenSpan> aspects;
  for (const auto& t : sentence.triples)
    if (std::find(aspects.begin(), aspects.end(), t.aspect) == aspects.end())
      aspects.push_back(t.aspect);
  return aspects;
}

ScoreResult right_pass(MrcScorer& scorer, const TokenSeq& sentence,
                       const QueryTemplates& templates, const TokenSpan& aspect) {
  ScoreRequest request;
  request.side = Side::Right;
  request.query = tokenize(templates.make_right_query(sentence.join(aspect)));
  request.context = sentence;
  request.given_aspect = aspect;
  return scorer.score(request);
}

Polarity right_polarity(const ScoreResult& scored) {
  if (!scored.class_probs)
    throw std::runtime_error("right-side scorer returned no class probabilities");
  return classify_polarity(*scored.class_probs);
}

}  // namespace

Subtask parse_subtask(std::string_view name) {
  std::string lower;
  for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "ae") return Subtask::AE;
  if (lower == "oe") return Subtask::OE;
  if (lower == "sc") return Subtask::SC;
  if (lower == "aoe") return Subtask::AOE;
  if (lower == "aesc") return Subtask::AESC;
  if (lower == "pair") return Subtask::Pair;
  if (lower == "triple") return Subtask::Triple;
  throw std::invalid_argument("unknown subtask '" + std::string(name) +
                              "' (expected ae, oe, sc, aoe, aesc, pair or triple)");
}

const char* to_string(Subtask task) {
  switch (task) {
    case Subtask::AE: return "ae";
    case Subtask::OE: return "oe";
    case Subtask::SC: return "sc";
    case Subtask::AOE: return "aoe";
    case Subtask::AESC: return "aesc";
    case Subtask::Pair: return "pair";
    case Subtask::Triple: return "triple";
  }
  return "?";
}

PipelineResult infer_triples(MrcScorer& scorer, const TokenSeq& sentence,
                             const QueryTemplates& templates,
                             const PipelineConfig& config) {
  templates.validate();
  ScoreRequest left;
  left.side = Side::Left;
  left.query = tokenize(templates.left);
  left.context = sentence;
  const ScoreResult left_scored = scorer.score(left);
  const std::vector<TokenSpan> aspects =
      decode_spans(left_scored.start_logits, left_scored.end_logits, config.left);

  PipelineResult result;
  for (const TokenSpan& aspect : aspects) {
    const ScoreResult scored = right_pass(scorer, sentence, templates, aspect);
    AspectResult ar;
    ar.aspect = aspect;
    ar.opinions = decode_spans(scored.start_logits, scored.end_logits, config.right);
    ar.polarity = right_polarity(scored);
    result.aspects.push_back(std::move(ar));
  }
  return result;
}

TripleSet triples_of(const PipelineResult& result) {
  TripleSet triples;
  for (const auto& ar : result.aspects)
    for (const auto& opinion : ar.opinions)
      triples.insert({ar.aspect, opinion, ar.polarity});
  return triples;
}

std::vector<TaskItem> run_task(Subtask task, MrcScorer& scorer,
                               const LabeledSentence& sentence,
                               const QueryTemplates& templates,
                               const PipelineConfig& config) {
  std::vector<TaskItem> items;
  switch (task) {
    case Subtask::AE: {
      ScoreRequest left;
      left.side = Side::Left;
      left.query = tokenize(templates.left);
      left.context = sentence.tokens;
      const ScoreResult scored = scorer.score(left);
      for (const auto& span :
           decode_spans(scored.start_logits, scored.end_logits, config.left))
        items.push_back({span, {}, {}});
      break;
    }
    case Subtask::OE: {
      ScoreRequest request;
      request.side = Side::OpinionOnly;
      request.query = tokenize(templates.opinion_only);
      request.context = sentence.tokens;
      const ScoreResult scored = scorer.score(request);
      for (const auto& span :
           decode_spans(scored.start_logits, scored.end_logits, config.right))
        items.push_back({{}, span, {}});
      break;
    }
    case Subtask::SC: {
      for (const TokenSpan& aspect : gold_aspects(sentence)) {
        const ScoreResult scored = right_pass(scorer, sentence.tokens, templates, aspect);
        items.push_back({aspect, {}, right_polarity(scored)});
      }
      break;
    }
    case Subtask::AOE: {
      for (const TokenSpan& aspect : gold_aspects(sentence)) {
        const ScoreResult scored = right_pass(scorer, sentence.tokens, templates, aspect);
        for (const auto& span :
             decode_spans(scored.start_logits, scored.end_logits, config.right))
          items.push_back({aspect, span, {}});
      }
      break;
    }
    case Subtask::AESC:
    case Subtask::Pair:
    case Subtask::Triple: {
      const PipelineResult result =
          infer_triples(scorer, sentence.tokens, templates, config);
      for (const auto& ar : result.aspects) {
        if (task == Subtask::AESC) {
          items.push_back({ar.aspect, {}, ar.polarity});
        } else {
          for (const auto& opinion : ar.opinions) {
            if (task == Subtask::Pair)
              items.push_back({ar.aspect, opinion, {}});
            else
              items.push_back({ar.aspect, opinion, ar.polarity});
          }
        }
      }
      break;
    }
  }
  return items;
}

std::vector<TaskItem> gold_items(Subtask task, const LabeledSentence& sentence) {
  std::set<TaskItem> items;
  for (const auto& t : sentence.triples) {
    switch (task) {
      case Subtask::AE: items.insert({t.aspect, {}, {}}); break;
      case Subtask::OE: items.insert({{}, t.opinion, {}}); break;
      case Subtask::SC: items.insert({t.aspect, {}, t.polarity}); break;
      case Subtask::AOE: items.insert({t.aspect, t.opinion, {}}); break;
      case Subtask::AESC: items.insert({t.aspect, {}, t.polarity}); break;
      case Subtask::Pair: items.insert({t.aspect, t.opinion, {}}); break;
      case Subtask::Triple: items.insert({t.aspect, t.opinion, t.polarity}); break;
    }
  }
  return {items.begin(), items.end()};
}

LossWeights TrainConfig::effective_weights() const {
  LossWeights w = weights;
  if (disable_right_extraction) w.gamma = 0.0;
  if (disable_right_classification) w.beta = 0.0;
  return w;
}

void TrainConfig::validate() const {
  if (learning_rate <= 0.0 || !std::isfinite(learning_rate))
    throw std::invalid_argument("learning_rate must be positive");
  if (warmup_fraction < 0.0 || warmup_fraction >= 1.0)
    throw std::invalid_argument("warmup_fraction must lie in [0, 1)");
  if (epochs <= 0) throw std::invalid_argument("epochs must be positive");
  if (batch_size <= 0) throw std::invalid_argument("batch_size must be positive");
  if (max_steps < 0) throw std::invalid_argument("max_steps must be >= 0");
  weights.validate();
}

TrainStats train(Model& model, const MrcDataset& data, const Vocab& vocab,
                 const TrainConfig& config) {
  config.validate();
  if (data.instances.empty()) throw std::invalid_argument("training set is empty");

  const int n = data.size();
  const int batches_per_epoch = (n + config.batch_size - 1) / config.batch_size;
  int total_steps = config.epochs * batches_per_epoch;
  if (config.max_steps > 0) total_steps = std::min(total_steps, config.max_steps);
  const int warmup_steps =
      static_cast<int>(std::ceil(config.warmup_fraction * total_steps));

  Model m_state = Model::zeros_like(model);
  Model v_state = Model::zeros_like(model);
  Model grads = Model::zeros_like(model);
  auto params = tensor_refs(model);
  auto g_refs = tensor_refs(grads);
  auto m_refs = tensor_refs(m_state);
  auto v_refs = tensor_refs(v_state);

  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  Rng rng(config.seed);
  TrainStats stats;
  int step = 0;

  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;

  for (int epoch = 0; epoch < config.epochs && step < total_steps; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    int epoch_batches = 0;
    for (int b = 0; b < batches_per_epoch && step < total_steps; ++b) {
      std::vector<const MrcInstance*> batch;
      for (int i = b * config.batch_size; i < std::min(n, (b + 1) * config.batch_size); ++i)
        batch.push_back(&data.instances[order[i]]);

      grads.set_zero();
      const BatchLoss loss =
          batch_loss(model, batch, vocab, model.encoder.config.max_len,
                     config.effective_weights(), /*train_mode=*/true, &rng, &grads);
      if (!std::isfinite(loss.total))
        throw std::runtime_error("training loss became non-finite at step " +
                                 std::to_string(step + 1));
      ++step;
      epoch_loss += loss.total;
      ++epoch_batches;

      const double warm =
          warmup_steps > 0 ? std::min(1.0, static_cast<double>(step) / warmup_steps) : 1.0;
      const double lr = config.learning_rate * warm;
      const double bc1 = 1.0 - std::pow(kBeta1, step);
      const double bc2 = 1.0 - std::pow(kBeta2, step);
      for (size_t t = 0; t < params.size(); ++t) {
        auto& theta = *params[t].mat;
        auto& g = *g_refs[t].mat;
        auto& m = *m_refs[t].mat;
        auto& v = *v_refs[t].mat;
        m.array() = kBeta1 * m.array() + (1.0 - kBeta1) * g.array();
        v.array() = kBeta2 * v.array() + (1.0 - kBeta2) * g.array().square();
        theta.array() -=
            lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + kEps);
      }
    }
    if (epoch_batches > 0) stats.epoch_mean_loss.push_back(epoch_loss / epoch_batches);
  }
  stats.steps = step;
  return stats;
}

}  // namespace absa
