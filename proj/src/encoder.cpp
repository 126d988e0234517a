#include "absa/encoder.hpp"

#include <cmath>
#include <stdexcept>

namespace absa {

namespace {

constexpr double kLnEps = 1e-12;

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

double gelu_grad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x / std::sqrt(2.0)));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
  return cdf + x * pdf;
}

Eigen::MatrixXd normal_matrix(int rows, int cols, double stddev, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.normal(0.0, stddev);
  return m;
}

/// Row-wise layer norm over the feature axis; scale/offset are (d,1).
Eigen::MatrixXd layer_norm(const Eigen::MatrixXd& x, const Eigen::MatrixXd& scale,
                           const Eigen::MatrixXd& offset, detail::LnCache& cache) {
  const int rows = static_cast<int>(x.rows());
  const int d = static_cast<int>(x.cols());
  cache.xhat.resize(rows, d);
  cache.inv_std.resize(rows);
  Eigen::MatrixXd out(rows, d);
  for (int i = 0; i < rows; ++i) {
    const double mean = x.row(i).mean();
    const double var = (x.row(i).array() - mean).square().mean();
    const double inv_std = 1.0 / std::sqrt(var + kLnEps);
    cache.inv_std(i) = inv_std;
    for (int j = 0; j < d; ++j) {
      const double xhat = (x(i, j) - mean) * inv_std;
      cache.xhat(i, j) = xhat;
      out(i, j) = scale(j, 0) * xhat + offset(j, 0);
    }
  }
  return out;
}

Eigen::MatrixXd layer_norm_backward(const Eigen::MatrixXd& dy,
                                    const detail::LnCache& cache,
                                    const Eigen::MatrixXd& scale,
                                    Eigen::MatrixXd& dscale,
                                    Eigen::MatrixXd& doffset) {
  const int rows = static_cast<int>(dy.rows());
  const int d = static_cast<int>(dy.cols());
  Eigen::MatrixXd dx(rows, d);
  for (int i = 0; i < rows; ++i) {
    Eigen::RowVectorXd dxhat(d);
    for (int j = 0; j < d; ++j) {
      dscale(j, 0) += dy(i, j) * cache.xhat(i, j);
      doffset(j, 0) += dy(i, j);
      dxhat(j) = dy(i, j) * scale(j, 0);
    }
    const double m1 = dxhat.mean();
    const double m2 = (dxhat.array() * cache.xhat.row(i).array()).mean();
    dx.row(i) = cache.inv_std(i) * (dxhat.array() - m1 - cache.xhat.row(i).array() * m2);
  }
  return dx;
}

/// Inverted-scale dropout mask: entries are 0 or 1/(1-rate).
Eigen::MatrixXd dropout_mask(int rows, int cols, double rate, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform() < rate ? 0.0 : keep_scale;
  return m;
}

void check_finite(const Eigen::MatrixXd& m, const std::string& where) {
  if (!m.allFinite())
    throw std::runtime_error("encoder produced a non-finite value at " + where);
}

}  // namespace

void EncoderConfig::validate() const {
  if (d_model <= 0 || n_layers <= 0 || n_heads <= 0 || d_ff <= 0 || max_len <= 0)
    throw std::invalid_argument("encoder config dimensions must be positive");
  if (d_model % n_heads != 0)
    throw std::invalid_argument("d_model must be divisible by n_heads");
  if (vocab_size <= 0) throw std::invalid_argument("encoder config needs vocab_size");
  if (dropout_rate < 0.0 || dropout_rate >= 1.0)
    throw std::invalid_argument("dropout_rate must be in [0, 1)");
}

EncoderParams EncoderParams::init(const EncoderConfig& config, Rng& rng) {
  config.validate();
  constexpr double kStd = 0.02;
  EncoderParams p;
  p.config = config;
  const int d = config.d_model;
  p.tok_emb = normal_matrix(config.vocab_size, d, kStd, rng);
  p.pos_emb = normal_matrix(config.max_len, d, kStd, rng);
  p.seg_emb = normal_matrix(2, d, kStd, rng);
  p.emb_ln_scale = Eigen::MatrixXd::Ones(d, 1);
  p.emb_ln_offset = Eigen::MatrixXd::Zero(d, 1);
  p.layers.resize(config.n_layers);
  for (auto& l : p.layers) {
    l.wq = normal_matrix(d, d, kStd, rng);
    l.wk = normal_matrix(d, d, kStd, rng);
    l.wv = normal_matrix(d, d, kStd, rng);
    l.wo = normal_matrix(d, d, kStd, rng);
    l.bq = Eigen::MatrixXd::Zero(d, 1);
    l.bk = Eigen::MatrixXd::Zero(d, 1);
    l.bv = Eigen::MatrixXd::Zero(d, 1);
    l.bo = Eigen::MatrixXd::Zero(d, 1);
    l.w1 = normal_matrix(d, config.d_ff, kStd, rng);
    l.b1 = Eigen::MatrixXd::Zero(config.d_ff, 1);
    l.w2 = normal_matrix(config.d_ff, d, kStd, rng);
    l.b2 = Eigen::MatrixXd::Zero(d, 1);
    l.ln1_scale = Eigen::MatrixXd::Ones(d, 1);
    l.ln1_offset = Eigen::MatrixXd::Zero(d, 1);
    l.ln2_scale = Eigen::MatrixXd::Ones(d, 1);
    l.ln2_offset = Eigen::MatrixXd::Zero(d, 1);
  }
  p.pool_w = normal_matrix(d, d, kStd, rng);
  p.pool_b = Eigen::MatrixXd::Zero(d, 1);
  return p;
}

EncoderParams EncoderParams::zeros_like(const EncoderParams& other) {
  EncoderParams p = other;
  p.set_zero();
  return p;
}

void EncoderParams::set_zero() {
  for (auto& t : tensor_refs(*this)) t.mat->setZero();
}

std::vector<NamedTensor> tensor_refs(EncoderParams& p) {
  std::vector<NamedTensor> refs = {
      {"tok_emb", &p.tok_emb},
      {"pos_emb", &p.pos_emb},
      {"seg_emb", &p.seg_emb},
      {"emb_ln_scale", &p.emb_ln_scale},
      {"emb_ln_offset", &p.emb_ln_offset},
  };
  for (size_t i = 0; i < p.layers.size(); ++i) {
    auto& l = p.layers[i];
    const std::string base = "layer" + std::to_string(i) + ".";
    refs.push_back({base + "wq", &l.wq});
    refs.push_back({base + "bq", &l.bq});
    refs.push_back({base + "wk", &l.wk});
    refs.push_back({base + "bk", &l.bk});
    refs.push_back({base + "wv", &l.wv});
    refs.push_back({base + "bv", &l.bv});
    refs.push_back({base + "wo", &l.wo});
    refs.push_back({base + "bo", &l.bo});
    refs.push_back({base + "w1", &l.w1});
    refs.push_back({base + "b1", &l.b1});
    refs.push_back({base + "w2", &l.w2});
    refs.push_back({base + "b2", &l.b2});
    refs.push_back({base + "ln1_scale", &l.ln1_scale});
    refs.push_back({base + "ln1_offset", &l.ln1_offset});
    refs.push_back({base + "ln2_scale", &l.ln2_scale});
    refs.push_back({base + "ln2_offset", &l.ln2_offset});
  }
  refs.push_back({"pool_w", &p.pool_w});
  refs.push_back({"pool_b", &p.pool_b});
  return refs;
}

HiddenStates forward(const EncodedInput& input, const EncoderParams& params,
                     bool train_mode, Rng* rng, EncoderActivations* cache,
                     bool retain_attentions) {
  const EncoderConfig& cfg = params.config;
  const int L = input.seq_len();
  const int d = cfg.d_model;
  const int dh = cfg.d_head();
  if (L == 0) throw std::invalid_argument("encoder input is empty");
  if (L > cfg.max_len)
    throw std::invalid_argument("input length " + std::to_string(L) +
                                " exceeds max_len " + std::to_string(cfg.max_len));
  const bool use_dropout = train_mode && cfg.dropout_rate > 0.0;
  if (use_dropout && rng == nullptr)
    throw std::invalid_argument("training forward with dropout needs an rng");

  Eigen::MatrixXd emb(L, d);
  for (int i = 0; i < L; ++i) {
    const int id = input.ids[i];
    if (id < 0 || id >= cfg.vocab_size)
      throw std::out_of_range("token id " + std::to_string(id) +
                              " outside vocab of size " + std::to_string(cfg.vocab_size));
    const int seg = input.segment_marks[i];
    emb.row(i) = params.tok_emb.row(id) + params.pos_emb.row(i) + params.seg_emb.row(seg);
  }

  EncoderActivations local;
  EncoderActivations& act = cache ? *cache : local;
  act.ids = input.ids;
  act.segs = input.segment_marks;
  act.mask = input.attention_mask;
  act.emb_sum = emb;

  Eigen::MatrixXd h = layer_norm(emb, params.emb_ln_scale, params.emb_ln_offset, act.emb_ln);
  if (use_dropout) {
    act.emb_drop = dropout_mask(L, d, cfg.dropout_rate, *rng);
    h = h.cwiseProduct(act.emb_drop);
  } else {
    act.emb_drop.resize(0, 0);
  }
  act.h0 = h;
  check_finite(h, "embeddings");

  HiddenStates states;
  if (retain_attentions) states.attentions.resize(cfg.n_layers);
  act.layers.assign(cfg.n_layers, {});
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  for (int layer = 0; layer < cfg.n_layers; ++layer) {
    const auto& lp = params.layers[layer];
    auto& lc = act.layers[layer];
    lc.input = h;
    lc.q = h * lp.wq + Eigen::MatrixXd::Ones(L, 1) * lp.bq.transpose();
    lc.k = h * lp.wk + Eigen::MatrixXd::Ones(L, 1) * lp.bk.transpose();
    lc.v = h * lp.wv + Eigen::MatrixXd::Ones(L, 1) * lp.bv.transpose();

    lc.attn_probs.resize(cfg.n_heads);
    lc.attn_drop.resize(cfg.n_heads);
    lc.ctx.resize(L, d);
    if (retain_attentions) states.attentions[layer].resize(cfg.n_heads);
    for (int head = 0; head < cfg.n_heads; ++head) {
      const auto qh = lc.q.middleCols(head * dh, dh);
      const auto kh = lc.k.middleCols(head * dh, dh);
      const auto vh = lc.v.middleCols(head * dh, dh);
      Eigen::MatrixXd scores = scale * (qh * kh.transpose());
      // Softmax over the unmasked columns only; masked columns get an exact 0.
      Eigen::MatrixXd probs(L, L);
      for (int i = 0; i < L; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < L; ++j)
          if (act.mask[j]) mx = std::max(mx, scores(i, j));
        double z = 0.0;
        for (int j = 0; j < L; ++j) {
          if (act.mask[j]) {
            const double e = std::exp(scores(i, j) - mx);
            probs(i, j) = e;
            z += e;
          } else {
            probs(i, j) = 0.0;
          }
        }
        probs.row(i) /= z;
      }
      lc.attn_probs[head] = probs;
      if (retain_attentions) states.attentions[layer][head] = probs;
      Eigen::MatrixXd attended = probs;
      if (use_dropout) {
        lc.attn_drop[head] = dropout_mask(L, L, cfg.dropout_rate, *rng);
        attended = attended.cwiseProduct(lc.attn_drop[head]);
      }
      lc.ctx.middleCols(head * dh, dh).noalias() = attended * vh;
    }

    Eigen::MatrixXd attn_out =
        lc.ctx * lp.wo + Eigen::MatrixXd::Ones(L, 1) * lp.bo.transpose();
    Eigen::MatrixXd res1 = h + attn_out;
    lc.h1 = layer_norm(res1, lp.ln1_scale, lp.ln1_offset, lc.ln1);

    lc.ffn_pre = lc.h1 * lp.w1 + Eigen::MatrixXd::Ones(L, 1) * lp.b1.transpose();
    lc.ffn_act = lc.ffn_pre.unaryExpr([](double x) { return gelu(x); });
    Eigen::MatrixXd ffn_out =
        lc.ffn_act * lp.w2 + Eigen::MatrixXd::Ones(L, 1) * lp.b2.transpose();
    if (use_dropout) {
      lc.ffn_drop = dropout_mask(L, d, cfg.dropout_rate, *rng);
      ffn_out = ffn_out.cwiseProduct(lc.ffn_drop);
    } else {
      lc.ffn_drop.resize(0, 0);
    }
    Eigen::MatrixXd res2 = lc.h1 + ffn_out;
    h = layer_norm(res2, lp.ln2_scale, lp.ln2_offset, lc.ln2);
    check_finite(h, "layer " + std::to_string(layer));
  }

  act.final_states = h;
  Eigen::VectorXd pool_pre =
      params.pool_w * h.row(0).transpose() + params.pool_b.col(0);
  act.pool_tanh = pool_pre.array().tanh();

  states.per_token = h;
  states.pooled = act.pool_tanh;
  return states;
}

void backward(const EncoderParams& params, const EncoderActivations& cache,
              const HiddenGrads& upstream, EncoderParams& grads) {
  const EncoderConfig& cfg = params.config;
  const int L = static_cast<int>(cache.final_states.rows());
  const int d = cfg.d_model;
  const int dh = cfg.d_head();
  if (upstream.d_per_token.rows() != L || upstream.d_per_token.cols() != d)
    throw std::invalid_argument("per-token gradient shape mismatch");
  if (upstream.d_pooled.size() != d)
    throw std::invalid_argument("pooled gradient shape mismatch");

  Eigen::MatrixXd dh_states = upstream.d_per_token;

  // Pooler: pooled = tanh(W x0 + b) with x0 the final [CLS] state.
  Eigen::VectorXd dpre =
      upstream.d_pooled.array() * (1.0 - cache.pool_tanh.array().square());
  grads.pool_w.noalias() += dpre * cache.final_states.row(0);
  grads.pool_b.col(0) += dpre;
  dh_states.row(0) += (params.pool_w.transpose() * dpre).transpose();

  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  for (int layer = cfg.n_layers - 1; layer >= 0; --layer) {
    const auto& lp = params.layers[layer];
    const auto& lc = cache.layers[layer];
    auto& lg = grads.layers[layer];
    const bool dropped = lc.ffn_drop.size() > 0;

    Eigen::MatrixXd dres2 =
        layer_norm_backward(dh_states, lc.ln2, lp.ln2_scale, lg.ln2_scale, lg.ln2_offset);
    Eigen::MatrixXd dh1 = dres2;
    Eigen::MatrixXd dffn_out = dropped ? dres2.cwiseProduct(lc.ffn_drop).eval() : dres2;
    lg.w2.noalias() += lc.ffn_act.transpose() * dffn_out;
    lg.b2.col(0) += dffn_out.colwise().sum().transpose();
    Eigen::MatrixXd dact = dffn_out * lp.w2.transpose();
    Eigen::MatrixXd dpre_ffn =
        dact.cwiseProduct(lc.ffn_pre.unaryExpr([](double x) { return gelu_grad(x); }));
    lg.w1.noalias() += lc.h1.transpose() * dpre_ffn;
    lg.b1.col(0) += dpre_ffn.colwise().sum().transpose();
    dh1.noalias() += dpre_ffn * lp.w1.transpose();

    Eigen::MatrixXd dres1 =
        layer_norm_backward(dh1, lc.ln1, lp.ln1_scale, lg.ln1_scale, lg.ln1_offset);
    Eigen::MatrixXd dinput = dres1;
    Eigen::MatrixXd& dattn_out = dres1;
    lg.wo.noalias() += lc.ctx.transpose() * dattn_out;
    lg.bo.col(0) += dattn_out.colwise().sum().transpose();
    Eigen::MatrixXd dctx = dattn_out * lp.wo.transpose();

    Eigen::MatrixXd dq(L, d), dk(L, d), dv(L, d);
    for (int head = 0; head < cfg.n_heads; ++head) {
      const auto vh = lc.v.middleCols(head * dh, dh);
      const auto qh = lc.q.middleCols(head * dh, dh);
      const auto kh = lc.k.middleCols(head * dh, dh);
      const auto& probs = lc.attn_probs[head];
      const Eigen::MatrixXd dctx_h = dctx.middleCols(head * dh, dh);
      const bool attn_dropped = lc.attn_drop[head].size() > 0;
      Eigen::MatrixXd attended = probs;
      if (attn_dropped) attended = attended.cwiseProduct(lc.attn_drop[head]);
      dv.middleCols(head * dh, dh).noalias() = attended.transpose() * dctx_h;
      Eigen::MatrixXd dattended = dctx_h * vh.transpose();
      if (attn_dropped) dattended = dattended.cwiseProduct(lc.attn_drop[head]);
      // Softmax rows: dS = P .* (dP - rowsum(dP .* P)); masked columns stay 0
      // because the probabilities there are exactly 0.
      Eigen::VectorXd rowdot = (dattended.cwiseProduct(probs)).rowwise().sum();
      Eigen::MatrixXd dscores =
          probs.cwiseProduct(dattended - rowdot * Eigen::RowVectorXd::Ones(L));
      dscores *= scale;
      dq.middleCols(head * dh, dh).noalias() = dscores * kh;
      dk.middleCols(head * dh, dh).noalias() = dscores.transpose() * qh;
    }

    lg.wq.noalias() += lc.input.transpose() * dq;
    lg.bq.col(0) += dq.colwise().sum().transpose();
    lg.wk.noalias() += lc.input.transpose() * dk;
    lg.bk.col(0) += dk.colwise().sum().transpose();
    lg.wv.noalias() += lc.input.transpose() * dv;
    lg.bv.col(0) += dv.colwise().sum().transpose();
    dinput.noalias() += dq * lp.wq.transpose();
    dinput.noalias() += dk * lp.wk.transpose();
    dinput.noalias() += dv * lp.wv.transpose();
    dh_states = dinput;
  }

  if (cache.emb_drop.size() > 0) dh_states = dh_states.cwiseProduct(cache.emb_drop);
  Eigen::MatrixXd demb = layer_norm_backward(dh_states, cache.emb_ln, params.emb_ln_scale,
                                             grads.emb_ln_scale, grads.emb_ln_offset);
  for (int i = 0; i < L; ++i) {
    grads.tok_emb.row(cache.ids[i]) += demb.row(i);
    grads.pos_emb.row(i) += demb.row(i);
    grads.seg_emb.row(cache.segs[i]) += demb.row(i);
  }
}

double grad_check(const EncoderConfig& config, const EncodedInput& sample,
                  double epsilon, int coords_per_tensor) {
  if (epsilon <= 0.0) throw std::invalid_argument("grad_check needs epsilon > 0");
  config.validate();
  Rng init_rng(config.seed);
  EncoderParams params = EncoderParams::init(config, init_rng);

  const int L = sample.seq_len();
  const int d = config.d_model;
  // Fixed pseudo-random linear probe of the outputs; masked rows carry zero
  // weight, mirroring how downstream losses ignore padding.
  Rng probe_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  Eigen::MatrixXd probe_tok(L, d);
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < d; ++j)
      probe_tok(i, j) = sample.attention_mask[i] ? probe_rng.normal() : 0.0;
  Eigen::VectorXd probe_pool(d);
  for (int j = 0; j < d; ++j) probe_pool(j) = probe_rng.normal();

  auto probe_loss = [&](const EncoderParams& p) {
    HiddenStates states = forward(sample, p, /*train_mode=*/false);
    return (states.per_token.cwiseProduct(probe_tok)).sum() +
           probe_pool.dot(states.pooled);
  };

  EncoderActivations cache;
  HiddenStates states = forward(sample, params, false, nullptr, &cache);
  EncoderParams grads = EncoderParams::zeros_like(params);
  backward(params, cache, {probe_tok, probe_pool}, grads);

  double worst = 0.0;
  Rng pick_rng(config.seed + 17);
  auto param_refs = tensor_refs(params);
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
      for (int i = 0; i < coords_per_tensor; ++i) coords.push_back(pick_rng.uniform_int(total));
    }
    for (int idx : coords) {
      double* slot = mat.data() + idx;
      const double saved = *slot;
      *slot = saved + epsilon;
      const double up = probe_loss(params);
      *slot = saved - epsilon;
      const double down = probe_loss(params);
      *slot = saved;
      const double numeric = (up - down) / (2.0 * epsilon);
      const double analytic = gmat.data()[idx];
      const double denom = std::max({1.0, std::abs(analytic), std::abs(numeric)});
      worst = std::max(worst, std::abs(analytic - numeric) / denom);
    }
  }
  return worst;
}

Eigen::MatrixXd export_attention(const HiddenStates& states, int layer, int head) {
  if (states.attentions.empty())
    throw std::invalid_argument("attention maps were not retained by this forward pass");
  if (layer < 0 || layer >= static_cast<int>(states.attentions.size()))
    throw std::out_of_range("attention layer index out of range");
  if (head < 0 || head >= static_cast<int>(states.attentions[layer].size()))
    throw std::out_of_range("attention head index out of range");
  return states.attentions[layer][head];
}

}  // namespace absa
