//
// Copyright 2026 The dstlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef DSTLAB_ENCODER_H_
#define DSTLAB_ENCODER_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dstlab/corpus.h"
#include "dstlab/nn.h"
#include "dstlab/rng.h"
#include "dstlab/tokenizer.h"
#include "json.hpp"

namespace dstlab {

struct EncoderConfig {
  int hidden_dim = 128;
  int num_layers = 2;
  int num_heads = 4;
  int vocab_size = 0;
  int max_sequence_length = 256;
  // Older utterances beyond this count are dropped before encoding.
  int max_context_utterances = 25;
  double dropout = 0.1;
  // Feed-forward width; 0 means 4 * hidden_dim.
  int ffn_dim = 0;

  int ffn() const { return ffn_dim > 0 ? ffn_dim : 4 * hidden_dim; }
  void Validate() const;
};

nlohmann::ordered_json EncoderConfigToJson(const EncoderConfig& c);
EncoderConfig EncoderConfigFromJson(const nlohmann::json& j);

struct LayerWeights {
  Matrix ln1_gain, ln1_bias;
  Matrix wq, bq, wk, bk, wv, bv, wo, bo;
  Matrix ln2_gain, ln2_bias;
  Matrix w1, b1, w2, b2;
};

// Pre-LN transformer encoder with learned positions, a tanh pooler over the
// [CLS] row, and an MLM head tied to the token embedding.
struct EncoderWeights {
  Matrix token_embedding;     // vocab x d
  Matrix position_embedding;  // max_len x d
  std::vector<LayerWeights> layers;
  Matrix final_gain, final_bias;
  Matrix pooler_w, pooler_b;
  Matrix mlm_w, mlm_b;  // transform before the tied projection
  Matrix mlm_vocab_bias;
};

template <typename Weights, typename Fn>
void ForEachTensor(Weights& w, Fn&& fn) {
  fn("token_embedding", w.token_embedding);
  fn("position_embedding", w.position_embedding);
  for (std::size_t i = 0; i < w.layers.size(); ++i) {
    auto& l = w.layers[i];
    const std::string p = "layer" + std::to_string(i) + ".";
    fn(p + "ln1_gain", l.ln1_gain);
    fn(p + "ln1_bias", l.ln1_bias);
    fn(p + "wq", l.wq);
    fn(p + "bq", l.bq);
    fn(p + "wk", l.wk);
    fn(p + "bk", l.bk);
    fn(p + "wv", l.wv);
    fn(p + "bv", l.bv);
    fn(p + "wo", l.wo);
    fn(p + "bo", l.bo);
    fn(p + "ln2_gain", l.ln2_gain);
    fn(p + "ln2_bias", l.ln2_bias);
    fn(p + "w1", l.w1);
    fn(p + "b1", l.b1);
    fn(p + "w2", l.w2);
    fn(p + "b2", l.b2);
  }
  fn("final_gain", w.final_gain);
  fn("final_bias", w.final_bias);
  fn("pooler_w", w.pooler_w);
  fn("pooler_b", w.pooler_b);
  fn("mlm_w", w.mlm_w);
  fn("mlm_b", w.mlm_b);
  fn("mlm_vocab_bias", w.mlm_vocab_bias);
}

EncoderWeights InitEncoder(const EncoderConfig& config, Rng& rng);

struct LayerCache {
  Matrix input;
  LayerNormCache ln1;
  Matrix ln1_out;
  Matrix q, k, v;
  std::vector<Matrix> probs;  // per head, L x L
  Matrix context;
  Matrix attn_mask;  // dropout scale per element; empty when off
  Matrix resid;
  LayerNormCache ln2;
  Matrix ln2_out;
  Matrix ffn_pre;
  Matrix ffn_act;
  Matrix ffn_mask;
};

struct EncoderCache {
  std::vector<int> ids;
  Matrix embed_mask;
  std::vector<LayerCache> layers;
  Matrix final_input;
  LayerNormCache final_ln;
  Matrix sequence;
  RowVector pooled;
};

struct EncoderOutput {
  Matrix sequence;  // L x d
  RowVector pooled;
};

// `dropout_rng` == nullptr disables dropout.
EncoderOutput EncodeIds(const EncoderWeights& w, const EncoderConfig& config,
                        std::span<const int> ids, EncoderCache* cache = nullptr,
                        Rng* dropout_rng = nullptr);

// Accumulates parameter gradients for upstream gradients on the sequence and
// pooled outputs.
void EncodeBackward(const EncoderWeights& w, const EncoderConfig& config,
                    const EncoderCache& cache, const Matrix& d_sequence,
                    const RowVector& d_pooled, EncoderWeights& grads);

// Token layout of an encoded dialogue context:
// [CLS] ([USR]|[SYS]) tokens... [SEP] ([USR]|[SYS]) tokens... [SEP] ...
struct ContextTokens {
  std::vector<int> ids;
  // Originating turn index (into the input turn list) per token; -1 for [CLS].
  std::vector<int> turn_map;
  // Byte range of each token in its turn's text; empty for specials.
  std::vector<Token> tokens;
  // Index of the oldest turn kept after left truncation.
  int first_turn = 0;

  int length() const { return static_cast<int>(ids.size()); }
};

// Left-truncates at turn boundaries so the result fits max_sequence_length
// and max_context_utterances; the most recent turn is always kept whole.
// Throws if that turn alone cannot fit.
ContextTokens BuildContext(const Tokenizer& tokenizer,
                           std::span<const Turn> turns,
                           const EncoderConfig& config);

// [CLS] tokens [SEP]
std::vector<int> TextIds(const Tokenizer& tokenizer, std::string_view text);

struct ContextEncoding {
  RowVector pooled;  // d
  Matrix sequence;   // L x d
  ContextTokens tokens;

  int length() const { return static_cast<int>(sequence.rows()); }
};

ContextEncoding EncodeContext(const EncoderWeights& w, const EncoderConfig& config,
                              const Tokenizer& tokenizer,
                              std::span<const Turn> turns);

// Mean of the rows strictly between [CLS] and [SEP] of a TextIds encoding;
// the [CLS] row when the text has no tokens.
RowVector MeanTokenPool(const Matrix& sequence);
Matrix MeanTokenPoolBackward(Eigen::Index rows, const RowVector& d_out);

// Encoding of a short string such as a slot name or candidate value.
RowVector EncodeText(const EncoderWeights& w, const EncoderConfig& config,
                     const Tokenizer& tokenizer, std::string_view text);

struct MlmMask {
  std::vector<int> masked_ids;
  std::vector<int> positions;
  std::vector<int> targets;
};

// Each non-special token is selected with `mask_prob`; selected tokens become
// [MASK] 80%, a random non-special token 10%, unchanged 10% of the time.
MlmMask MaskForMlm(std::span<const int> ids, double mask_prob, int vocab_size,
                   Rng& rng);

// Mean cross-entropy of the MLM head over the target positions of an encoded
// (masked) sequence; 0 when there are no targets.
double MlmLoss(const EncoderWeights& w, const Matrix& sequence,
               std::span<const int> positions, std::span<const int> targets);

// Summed cross-entropy over targets. Accumulates `scale` times its gradient
// into `grads` and `d_sequence`.
double MlmLossBackward(const EncoderWeights& w, const Matrix& sequence,
                       std::span<const int> positions,
                       std::span<const int> targets, double scale,
                       EncoderWeights& grads, Matrix& d_sequence);

}  // namespace dstlab

#endif  // DSTLAB_ENCODER_H_
