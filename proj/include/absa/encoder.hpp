#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "absa/rng.hpp"
#include "absa/tokenizer.hpp"

namespace absa {

struct EncoderConfig {
  int d_model = 64;
  int n_layers = 2;
  int n_heads = 2;
  int d_ff = 128;
  int max_len = 64;
  int vocab_size = 0;
  double dropout_rate = 0.1;
  uint64_t seed = 1;

  int d_head() const { return d_model / n_heads; }
  void validate() const;
};

/// Per-layer trainable tensors. Vectors are stored as (n,1) matrices so the
/// whole parameter set enumerates uniformly for the optimizer, checkpoints
/// and finite-difference sweeps.
struct EncoderLayerParams {
  Eigen::MatrixXd wq, wk, wv, wo;              // d_model x d_model
  Eigen::MatrixXd bq, bk, bv, bo;              // d_model x 1
  Eigen::MatrixXd w1, b1;                      // d_model x d_ff, d_ff x 1
  Eigen::MatrixXd w2, b2;                      // d_ff x d_model, d_model x 1
  Eigen::MatrixXd ln1_scale, ln1_offset;       // d_model x 1
  Eigen::MatrixXd ln2_scale, ln2_offset;       // d_model x 1
};

struct EncoderParams {
  EncoderConfig config;
  Eigen::MatrixXd tok_emb;                     // vocab_size x d_model
  Eigen::MatrixXd pos_emb;                     // max_len x d_model
  Eigen::MatrixXd seg_emb;                     // 2 x d_model
  Eigen::MatrixXd emb_ln_scale, emb_ln_offset; // d_model x 1
  std::vector<EncoderLayerParams> layers;
  Eigen::MatrixXd pool_w, pool_b;              // d_model x d_model, d_model x 1

  /// Scaled-normal init (std 0.02), layer-norm scale 1 / offset 0, zero biases.
  static EncoderParams init(const EncoderConfig& config, Rng& rng);
  static EncoderParams zeros_like(const EncoderParams& other);
  void set_zero();
};

struct NamedTensor {
  std::string name;
  Eigen::MatrixXd* mat;
};

/// Stable enumeration of every trainable tensor; the names key checkpoints.
std::vector<NamedTensor> tensor_refs(EncoderParams& params);

struct HiddenStates {
  Eigen::MatrixXd per_token;  // L x d_model
  Eigen::VectorXd pooled;     // d_model ([CLS] state through the pooler)
  // [layer][head] L x L attention probabilities; filled only on request.
  std::vector<std::vector<Eigen::MatrixXd>> attentions;
};

struct HiddenGrads {
  Eigen::MatrixXd d_per_token;
  Eigen::VectorXd d_pooled;
};

namespace detail {
struct LnCache {
  Eigen::MatrixXd xhat;
  Eigen::VectorXd inv_std;
};
struct LayerCache {
  Eigen::MatrixXd input, q, k, v;
  std::vector<Eigen::MatrixXd> attn_probs;  // per head, pre-dropout
  std::vector<Eigen::MatrixXd> attn_drop;   // per head, dropout scales
  Eigen::MatrixXd ctx;                      // concatenated head outputs
  LnCache ln1;
  Eigen::MatrixXd h1, ffn_pre, ffn_act;
  Eigen::MatrixXd ffn_drop;
  LnCache ln2;
};
}  // namespace detail

/// Activation cache captured by forward() for the matching backward().
struct EncoderActivations {
  std::vector<int> ids, segs;
  std::vector<uint8_t> mask;
  Eigen::MatrixXd emb_sum;
  detail::LnCache emb_ln;
  Eigen::MatrixXd emb_drop;
  Eigen::MatrixXd h0;
  std::vector<detail::LayerCache> layers;
  Eigen::MatrixXd final_states;
  Eigen::VectorXd pool_tanh;
};

/// Runs the encoder. Deterministic whenever train_mode is off or the
/// dropout rate is zero; `rng` is required only when dropout actually fires.
/// Throws on out-of-range ids, over-length input, or a non-finite
/// intermediate (reported with its layer index).
HiddenStates forward(const EncodedInput& input, const EncoderParams& params,
                     bool train_mode, Rng* rng = nullptr,
                     EncoderActivations* cache = nullptr,
                     bool retain_attentions = false);

/// Accumulates parameter gradients into `grads` (same shapes as `params`)
/// given gradients w.r.t. the forward outputs.
void backward(const EncoderParams& params, const EncoderActivations& cache,
              const HiddenGrads& upstream, EncoderParams& grads);

/// Central-finite-difference verification of backward() against a fixed
/// pseudo-random linear probe of the outputs. Checks every tensor;
/// coords_per_tensor limits the sweep per tensor (0 = every coordinate).
/// Returns the worst relative error, scale floor 1.0.
double grad_check(const EncoderConfig& config, const EncodedInput& sample,
                  double epsilon, int coords_per_tensor = 0);

/// One retained attention matrix; rows sum to 1 over unmasked positions.
Eigen::MatrixXd export_attention(const HiddenStates& states, int layer, int head);

}  // namespace absa
