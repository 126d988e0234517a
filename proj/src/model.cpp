#include "absa/model.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace absa {

namespace {

constexpr char kMagic[4] = {'A', 'M', 'R', 'C'};
constexpr uint32_t kCheckpointVersion = 1;

void write_u32(std::ostream& out, uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_u64(std::ostream& out, uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
uint32_t read_u32(std::istream& in) {
  uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}
uint64_t read_u64(std::istream& in) {
  uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

nlohmann::json config_to_json(const EncoderConfig& c) {
  return {{"d_model", c.d_model},       {"n_layers", c.n_layers},
          {"n_heads", c.n_heads},       {"d_ff", c.d_ff},
          {"max_len", c.max_len},       {"vocab_size", c.vocab_size},
          {"dropout_rate", c.dropout_rate}, {"seed", c.seed}};
}

EncoderConfig config_from_json(const nlohmann::json& j) {
  EncoderConfig c;
  c.d_model = j.at("d_model").get<int>();
  c.n_layers = j.at("n_layers").get<int>();
  c.n_heads = j.at("n_heads").get<int>();
  c.d_ff = j.at("d_ff").get<int>();
  c.max_len = j.at("max_len").get<int>();
  c.vocab_size = j.at("vocab_size").get<int>();
  c.dropout_rate = j.at("dropout_rate").get<double>();
  c.seed = j.at("seed").get<uint64_t>();
  return c;
}

const SpanHeadParams& span_head_for(const Model& model, Side side) {
  return side == Side::Left ? model.left_head : model.right_head;
}

}  // namespace

Model Model::init(const EncoderConfig& config, uint64_t seed) {
  Rng rng(seed);
  Model m;
  m.encoder = EncoderParams::init(config, rng);
  m.left_head = SpanHeadParams::init(config.d_model, rng);
  m.right_head = SpanHeadParams::init(config.d_model, rng);
  m.class_head = ClassHeadParams::init(config.d_model, rng);
  return m;
}

Model Model::zeros_like(const Model& other) {
  Model m = other;
  m.set_zero();
  return m;
}

void Model::set_zero() {
  for (auto& t : tensor_refs(*this)) t.mat->setZero();
}

std::vector<NamedTensor> tensor_refs(Model& model) {
  std::vector<NamedTensor> refs;
  for (auto& t : tensor_refs(model.encoder))
    refs.push_back({"encoder." + t.name, t.mat});
  refs.push_back({"left_head.start_weight", &model.left_head.start_weight});
  refs.push_back({"left_head.end_weight", &model.left_head.end_weight});
  refs.push_back({"right_head.start_weight", &model.right_head.start_weight});
  refs.push_back({"right_head.end_weight", &model.right_head.end_weight});
  refs.push_back({"class_head.weight", &model.class_head.weight});
  refs.push_back({"class_head.bias", &model.class_head.bias});
  return refs;
}

void save_checkpoint(const std::string& path, const Model& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint to " + path);
  out.write(kMagic, sizeof(kMagic));
  write_u32(out, kCheckpointVersion);
  const std::string config = config_to_json(model.encoder.config).dump();
  write_u64(out, config.size());
  out.write(config.data(), static_cast<std::streamsize>(config.size()));

  auto refs = tensor_refs(const_cast<Model&>(model));
  write_u64(out, refs.size());
  for (const auto& t : refs) {
    write_u32(out, static_cast<uint32_t>(t.name.size()));
    out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    write_u64(out, static_cast<uint64_t>(t.mat->rows()));
    write_u64(out, static_cast<uint64_t>(t.mat->cols()));
    out.write(reinterpret_cast<const char*>(t.mat->data()),
              static_cast<std::streamsize>(sizeof(double) * t.mat->size()));
  }
  if (!out) throw std::runtime_error("checkpoint write to " + path + " failed");
}

Model load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path);
  char magic[4];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error(path + " is not a model checkpoint");
  const uint32_t version = read_u32(in);
  if (version != kCheckpointVersion)
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  const uint64_t config_len = read_u64(in);
  std::string config_text(config_len, '\0');
  in.read(config_text.data(), static_cast<std::streamsize>(config_len));
  const EncoderConfig config = config_from_json(nlohmann::json::parse(config_text));

  Model model = Model::init(config, config.seed);
  model.set_zero();
  auto refs = tensor_refs(model);
  std::vector<bool> seen(refs.size(), false);

  const uint64_t count = read_u64(in);
  if (count != refs.size())
    throw std::runtime_error("checkpoint holds " + std::to_string(count) +
                             " tensors, expected " + std::to_string(refs.size()));
  for (uint64_t i = 0; i < count; ++i) {
    const uint32_t name_len = read_u32(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const auto rows = static_cast<Eigen::Index>(read_u64(in));
    const auto cols = static_cast<Eigen::Index>(read_u64(in));
    if (!in) throw std::runtime_error("truncated checkpoint " + path);
    size_t slot = refs.size();
    for (size_t r = 0; r < refs.size(); ++r)
      if (refs[r].name == name) { slot = r; break; }
    if (slot == refs.size())
      throw std::runtime_error("checkpoint tensor " + name + " is not part of the model");
    if (seen[slot]) throw std::runtime_error("checkpoint repeats tensor " + name);
    seen[slot] = true;
    Eigen::MatrixXd& mat = *refs[slot].mat;
    if (mat.rows() != rows || mat.cols() != cols)
      throw std::runtime_error("checkpoint tensor " + name + " has shape " +
                               std::to_string(rows) + "x" + std::to_string(cols) +
                               ", expected " + std::to_string(mat.rows()) + "x" +
                               std::to_string(mat.cols()));
    in.read(reinterpret_cast<char*>(mat.data()),
            static_cast<std::streamsize>(sizeof(double) * mat.size()));
    if (!in) throw std::runtime_error("truncated checkpoint " + path);
  }
  return model;
}

BatchLoss batch_loss(const Model& model, const std::vector<const MrcInstance*>& batch,
                     const Vocab& vocab, int max_len, const LossWeights& weights,
                     bool train_mode, Rng* rng, Model* grads) {
  weights.validate();
  if (batch.empty()) throw std::invalid_argument("batch_loss over an empty batch");

  int n_ae = 0, n_aoe = 0, n_sc = 0;
  for (const auto* inst : batch) {
    if (inst->side == Side::Left) {
      ++n_ae;
    } else {
      ++n_aoe;
      if (inst->polarity_label) ++n_sc;
    }
  }

  BatchLoss result;
  for (const auto* inst : batch) {
    const EncodedInput encoded =
        encode_pair(inst->query, inst->context, vocab, max_len);
    EncoderActivations cache;
    const HiddenStates states =
        forward(encoded, model.encoder, train_mode, rng, grads ? &cache : nullptr);

    const SpanHeadParams& head = span_head_for(model, inst->side);
    const ModelOutput out = span_logits(states.per_token, head, encoded.attention_mask);
    const SpanTargets targets = SpanTargets::from_spans(
        inst->answer_spans, encoded.seq_len(), encoded.context_offset, encoded.context_len);

    const bool is_left = inst->side == Side::Left;
    const double span_weight =
        is_left ? weights.alpha / n_ae : weights.gamma / n_aoe;

    HiddenGrads hidden;
    hidden.d_per_token = Eigen::MatrixXd::Zero(states.per_token.rows(), states.per_token.cols());
    hidden.d_pooled = Eigen::VectorXd::Zero(states.pooled.size());

    if (grads) {
      const SpanLossGrad sg = span_loss_grad(out, targets);
      (is_left ? result.ae : result.aoe) += sg.loss;
      SpanHeadParams& hg = inst->side == Side::Left
                               ? grads->left_head
                               : grads->right_head;
      hg.start_weight.col(0).noalias() +=
          span_weight * (states.per_token.transpose() * sg.d_start_logits);
      hg.end_weight.col(0).noalias() +=
          span_weight * (states.per_token.transpose() * sg.d_end_logits);
      hidden.d_per_token.noalias() +=
          span_weight * (sg.d_start_logits * head.start_weight.col(0).transpose());
      hidden.d_per_token.noalias() +=
          span_weight * (sg.d_end_logits * head.end_weight.col(0).transpose());
    } else {
      (is_left ? result.ae : result.aoe) += span_loss(out, targets);
    }

    if (inst->polarity_label) {
      const auto [logits, probs] = class_logits(states.pooled, model.class_head);
      const double class_weight = weights.beta / n_sc;
      if (grads) {
        const ClassLossGrad cg = class_loss_grad(probs, *inst->polarity_label);
        result.sc += cg.loss;
        grads->class_head.weight.noalias() +=
            class_weight * (cg.d_logits * states.pooled.transpose());
        grads->class_head.bias.col(0) += class_weight * cg.d_logits;
        hidden.d_pooled.noalias() +=
            class_weight * (model.class_head.weight.transpose() * cg.d_logits);
      } else {
        result.sc += class_loss(probs, *inst->polarity_label);
      }
    }

    if (grads) backward(model.encoder, cache, hidden, grads->encoder);
  }

  if (n_ae > 0) result.ae /= n_ae;
  if (n_sc > 0) result.sc /= n_sc;
  if (n_aoe > 0) result.aoe /= n_aoe;
  result.total = joint_loss(n_ae ? result.ae : 0.0, n_sc ? result.sc : 0.0,
                            n_aoe ? result.aoe : 0.0, weights);
  return result;
}

double model_grad_check(const EncoderConfig& config,
                        const std::vector<const MrcInstance*>& batch,
                        const Vocab& vocab, const LossWeights& weights,
                        double epsilon, int coords_per_tensor) {
  if (epsilon <= 0.0) throw std::invalid_argument("grad check needs epsilon > 0");
  Model model = Model::init(config, config.seed);
  Model grads = Model::zeros_like(model);
  batch_loss(model, batch, vocab, config.max_len, weights, false, nullptr, &grads);

  auto loss_of = [&]() {
    return batch_loss(model, batch, vocab, config.max_len, weights, false, nullptr, nullptr)
        .total;
  };

  double worst = 0.0;
  Rng pick_rng(config.seed + 29);
  auto param_refs = tensor_refs(model);
  auto grad_refs = tensor_refs(grads);
  for (size_t t = 0; t < param_refs.size(); ++t) {
    Eigen::MatrixXd& mat = *param_refs[t].mat;
    const Eigen::MatrixXd& gmat = *grad_refs[t].mat;
    const int total = static_cast<int>(mat.size());
    std::vector<int> coords;
    if (coords_per_tensor <= 0 || coords_per_tensor >= total) {
      coords.resize(total);
      for (int i = 0; i < total; ++i) coords[i] = i;
    } else {
      for (int i = 0; i < coords_per_tensor; ++i)
        coords.push_back(pick_rng.uniform_int(total));
    }
    for (int idx : coords) {
      double* slot = mat.data() + idx;
      const double saved = *slot;
      *slot = saved + epsilon;
      const double up = loss_of();
      *slot = saved - epsilon;
      const double down = loss_of();
      *slot = saved;
      const double numeric = (up - down) / (2.0 * epsilon);
      const double analytic = gmat.data()[idx];
      const double denom = std::max({1.0, std::abs(analytic), std::abs(numeric)});
      worst = std::max(worst, std::abs(analytic - numeric) / denom);
    }
  }
  return worst;
}

ScoreResult ModelScorer::score(const ScoreRequest& request) {
  const EncodedInput encoded =
      encode_pair(request.query.surfaces(), request.context, vocab_, max_len_);
  const HiddenStates states = forward(encoded, model_.encoder, /*train_mode=*/false);
  const SpanHeadParams& head = span_head_for(model_, request.side);
  const ModelOutput out = span_logits(states.per_token, head, encoded.attention_mask);

  ScoreResult result;
  result.start_logits = out.start_logits.segment(encoded.context_offset, encoded.context_len);
  result.end_logits = out.end_logits.segment(encoded.context_offset, encoded.context_len);
  if (request.side == Side::Right) {
    const auto [logits, probs] = class_logits(states.pooled, model_.class_head);
    result.class_probs = probs;
  }
  return result;
}

}  // namespace absa
