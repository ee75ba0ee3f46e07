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

#include "dstlab/encoder.h"

#include <cmath>

namespace dstlab {
namespace {

Matrix Zeros(Eigen::Index r, Eigen::Index c) { return Matrix::Zero(r, c); }
Matrix Ones(Eigen::Index r, Eigen::Index c) { return Matrix::Ones(r, c); }

Matrix DropoutMask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng) {
  Matrix mask(rows, cols);
  const double keep = 1.0 - rate;
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    mask.data()[i] = Bernoulli(rng, keep) ? 1.0 / keep : 0.0;
  }
  return mask;
}

}  // namespace

void EncoderConfig::Validate() const {
  if (hidden_dim <= 0 || num_layers < 0 || num_heads <= 0) {
    throw Error("encoder dimensions must be positive");
  }
  if (hidden_dim % num_heads != 0) {
    throw Error("hidden_dim must be divisible by num_heads");
  }
  if (max_sequence_length < 16) throw Error("max_sequence_length must be >= 16");
  if (max_context_utterances < 1) throw Error("max_context_utterances must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw Error("dropout must lie in [0, 1)");
}

nlohmann::ordered_json EncoderConfigToJson(const EncoderConfig& c) {
  nlohmann::ordered_json j;
  j["hidden_dim"] = c.hidden_dim;
  j["num_layers"] = c.num_layers;
  j["num_heads"] = c.num_heads;
  j["vocab_size"] = c.vocab_size;
  j["max_sequence_length"] = c.max_sequence_length;
  j["max_context_utterances"] = c.max_context_utterances;
  j["dropout"] = c.dropout;
  j["ffn_dim"] = c.ffn_dim;
  return j;
}

EncoderConfig EncoderConfigFromJson(const nlohmann::json& j) {
  EncoderConfig c;
  c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
  c.num_layers = j.value("num_layers", c.num_layers);
  c.num_heads = j.value("num_heads", c.num_heads);
  c.vocab_size = j.value("vocab_size", c.vocab_size);
  c.max_sequence_length = j.value("max_sequence_length", c.max_sequence_length);
  c.max_context_utterances =
      j.value("max_context_utterances", c.max_context_utterances);
  c.dropout = j.value("dropout", c.dropout);
  c.ffn_dim = j.value("ffn_dim", c.ffn_dim);
  c.Validate();
  return c;
}

EncoderWeights InitEncoder(const EncoderConfig& config, Rng& rng) {
  config.Validate();
  if (config.vocab_size <= kNumSpecialTokens) {
    throw Error("encoder vocab_size must exceed the special tokens");
  }
  const int d = config.hidden_dim;
  const int f = config.ffn();
  const double in_std = 1.0 / std::sqrt(static_cast<double>(d));
  const double out_std = in_std / std::sqrt(2.0 * std::max(1, config.num_layers));
  EncoderWeights w;
  w.token_embedding = RandomNormal(config.vocab_size, d, 0.05, rng);
  w.position_embedding = RandomNormal(config.max_sequence_length, d, 0.05, rng);
  for (int i = 0; i < config.num_layers; ++i) {
    LayerWeights l;
    l.ln1_gain = Ones(1, d);
    l.ln1_bias = Zeros(1, d);
    l.wq = RandomNormal(d, d, in_std, rng);
    l.bq = Zeros(1, d);
    l.wk = RandomNormal(d, d, in_std, rng);
    l.bk = Zeros(1, d);
    l.wv = RandomNormal(d, d, in_std, rng);
    l.bv = Zeros(1, d);
    l.wo = RandomNormal(d, d, out_std, rng);
    l.bo = Zeros(1, d);
    l.ln2_gain = Ones(1, d);
    l.ln2_bias = Zeros(1, d);
    l.w1 = RandomNormal(d, f, in_std, rng);
    l.b1 = Zeros(1, f);
    l.w2 = RandomNormal(f, d, out_std * std::sqrt(static_cast<double>(d) / f), rng);
    l.b2 = Zeros(1, d);
    w.layers.push_back(std::move(l));
  }
  w.final_gain = Ones(1, d);
  w.final_bias = Zeros(1, d);
  w.pooler_w = RandomNormal(d, d, in_std, rng);
  w.pooler_b = Zeros(1, d);
  w.mlm_w = RandomNormal(d, d, in_std, rng);
  w.mlm_b = Zeros(1, d);
  w.mlm_vocab_bias = Zeros(1, config.vocab_size);
  return w;
}

EncoderOutput EncodeIds(const EncoderWeights& w, const EncoderConfig& config,
                        std::span<const int> ids, EncoderCache* cache,
                        Rng* dropout_rng) {
  const auto len = static_cast<Eigen::Index>(ids.size());
  if (len == 0) throw Error("cannot encode an empty sequence");
  if (len > w.position_embedding.rows()) {
    throw Error("sequence of " + std::to_string(len) +
                " tokens exceeds max_sequence_length");
  }
  const int d = config.hidden_dim;
  const int heads = config.num_heads;
  const int hd = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
  const bool dropout = dropout_rng != nullptr && config.dropout > 0.0;

  Matrix x(len, d);
  for (Eigen::Index i = 0; i < len; ++i) {
    x.row(i) = w.token_embedding.row(ids[static_cast<std::size_t>(i)]) +
               w.position_embedding.row(i);
  }
  if (cache != nullptr) {
    cache->ids.assign(ids.begin(), ids.end());
    cache->layers.clear();
    cache->embed_mask.resize(0, 0);
  }
  if (dropout) {
    Matrix mask = DropoutMask(len, d, config.dropout, *dropout_rng);
    x.array() *= mask.array();
    if (cache != nullptr) cache->embed_mask = std::move(mask);
  }

  for (const LayerWeights& l : w.layers) {
    LayerCache lc;
    LayerCache* c = cache != nullptr ? &lc : nullptr;
    LayerNormCache ln1;
    Matrix a = LayerNorm(x, l.ln1_gain, l.ln1_bias, &ln1);
    Matrix q = Linear(a, l.wq, l.bq);
    Matrix k = Linear(a, l.wk, l.bk);
    Matrix v = Linear(a, l.wv, l.bv);
    Matrix context(len, d);
    std::vector<Matrix> probs;
    for (int h = 0; h < heads; ++h) {
      Matrix p = (q.middleCols(h * hd, hd) * k.middleCols(h * hd, hd).transpose()) * scale;
      SoftmaxRowsInPlace(p);
      context.middleCols(h * hd, hd).noalias() = p * v.middleCols(h * hd, hd);
      if (c != nullptr) probs.push_back(std::move(p));
    }
    Matrix attn = Linear(context, l.wo, l.bo);
    Matrix attn_mask;
    if (dropout) {
      attn_mask = DropoutMask(len, d, config.dropout, *dropout_rng);
      attn.array() *= attn_mask.array();
    }
    Matrix resid = x + attn;
    LayerNormCache ln2;
    Matrix b = LayerNorm(resid, l.ln2_gain, l.ln2_bias, &ln2);
    Matrix pre = Linear(b, l.w1, l.b1);
    Matrix act = Gelu(pre);
    Matrix ffn = Linear(act, l.w2, l.b2);
    Matrix ffn_mask;
    if (dropout) {
      ffn_mask = DropoutMask(len, d, config.dropout, *dropout_rng);
      ffn.array() *= ffn_mask.array();
    }
    Matrix out = resid + ffn;
    if (c != nullptr) {
      c->input = std::move(x);
      c->ln1 = std::move(ln1);
      c->ln1_out = std::move(a);
      c->q = std::move(q);
      c->k = std::move(k);
      c->v = std::move(v);
      c->probs = std::move(probs);
      c->context = std::move(context);
      c->attn_mask = std::move(attn_mask);
      c->resid = std::move(resid);
      c->ln2 = std::move(ln2);
      c->ln2_out = std::move(b);
      c->ffn_pre = std::move(pre);
      c->ffn_act = std::move(act);
      c->ffn_mask = std::move(ffn_mask);
      cache->layers.push_back(std::move(lc));
    }
    x = std::move(out);
  }

  EncoderOutput result;
  LayerNormCache final_ln;
  result.sequence = LayerNorm(x, w.final_gain, w.final_bias, &final_ln);
  result.pooled = (result.sequence.row(0) * w.pooler_w + w.pooler_b.row(0))
                      .array()
                      .tanh()
                      .matrix();
  if (cache != nullptr) {
    cache->final_input = std::move(x);
    cache->final_ln = std::move(final_ln);
    cache->sequence = result.sequence;
    cache->pooled = result.pooled;
  }
  return result;
}

void EncodeBackward(const EncoderWeights& w, const EncoderConfig& config,
                    const EncoderCache& cache, const Matrix& d_sequence,
                    const RowVector& d_pooled, EncoderWeights& grads) {
  const int d = config.hidden_dim;
  const int heads = config.num_heads;
  const int hd = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));

  Matrix d_seq = d_sequence;
  {
    const RowVector d_pre =
        (d_pooled.array() * (1.0 - cache.pooled.array().square())).matrix();
    grads.pooler_w.noalias() += cache.sequence.row(0).transpose() * d_pre;
    grads.pooler_b.row(0) += d_pre;
    d_seq.row(0) += d_pre * w.pooler_w.transpose();
  }
  Matrix dx = LayerNormBackward(d_seq, w.final_gain, cache.final_ln,
                                grads.final_gain, grads.final_bias);

  for (std::size_t li = w.layers.size(); li-- > 0;) {
    const LayerWeights& l = w.layers[li];
    LayerWeights& g = grads.layers[li];
    const LayerCache& c = cache.layers[li];

    Matrix d_ffn = dx;
    if (c.ffn_mask.size() > 0) d_ffn.array() *= c.ffn_mask.array();
    Matrix d_act = LinearBackward(d_ffn, c.ffn_act, l.w2, g.w2, g.b2);
    Matrix d_pre = d_act.array() * GeluDerivative(c.ffn_pre).array();
    Matrix d_b = LinearBackward(d_pre, c.ln2_out, l.w1, g.w1, g.b1);
    Matrix d_resid =
        dx + LayerNormBackward(d_b, l.ln2_gain, c.ln2, g.ln2_gain, g.ln2_bias);

    Matrix d_attn = d_resid;
    if (c.attn_mask.size() > 0) d_attn.array() *= c.attn_mask.array();
    Matrix d_context = LinearBackward(d_attn, c.context, l.wo, g.wo, g.bo);
    Matrix dq(c.q.rows(), d), dk(c.k.rows(), d), dv(c.v.rows(), d);
    for (int h = 0; h < heads; ++h) {
      const Matrix& p = c.probs[static_cast<std::size_t>(h)];
      const auto dctx_h = d_context.middleCols(h * hd, hd);
      Matrix dp = dctx_h * c.v.middleCols(h * hd, hd).transpose();
      dv.middleCols(h * hd, hd).noalias() = p.transpose() * dctx_h;
      Matrix ds = SoftmaxRowsBackward(p, dp) * scale;
      dq.middleCols(h * hd, hd).noalias() = ds * c.k.middleCols(h * hd, hd);
      dk.middleCols(h * hd, hd).noalias() = ds.transpose() * c.q.middleCols(h * hd, hd);
    }
    Matrix d_a = LinearBackward(dq, c.ln1_out, l.wq, g.wq, g.bq);
    d_a += LinearBackward(dk, c.ln1_out, l.wk, g.wk, g.bk);
    d_a += LinearBackward(dv, c.ln1_out, l.wv, g.wv, g.bv);
    dx = d_resid + LayerNormBackward(d_a, l.ln1_gain, c.ln1, g.ln1_gain, g.ln1_bias);
  }

  if (cache.embed_mask.size() > 0) dx.array() *= cache.embed_mask.array();
  for (Eigen::Index i = 0; i < dx.rows(); ++i) {
    grads.token_embedding.row(cache.ids[static_cast<std::size_t>(i)]) += dx.row(i);
    grads.position_embedding.row(i) += dx.row(i);
  }
}

ContextTokens BuildContext(const Tokenizer& tokenizer,
                           std::span<const Turn> turns,
                           const EncoderConfig& config) {
  if (turns.empty()) throw Error("context needs at least one turn");
  const int n = static_cast<int>(turns.size());
  std::vector<std::vector<Token>> per_turn(turns.size());
  int total = 1;  // [CLS]
  int first = n;
  for (int i = n - 1; i >= 0; --i) {
    std::vector<Token> toks = tokenizer.EncodeWithOffsets(turns[static_cast<std::size_t>(i)].text);
    const int block = static_cast<int>(toks.size()) + 2;
    if (total + block > config.max_sequence_length ||
        n - i > config.max_context_utterances) {
      if (i == n - 1) {
        throw Error("most recent turn (" + std::to_string(toks.size()) +
                    " tokens) does not fit max_sequence_length " +
                    std::to_string(config.max_sequence_length));
      }
      break;
    }
    total += block;
    per_turn[static_cast<std::size_t>(i)] = std::move(toks);
    first = i;
  }
  ContextTokens ctx;
  ctx.first_turn = first;
  ctx.ids.reserve(static_cast<std::size_t>(total));
  ctx.ids.push_back(kClsId);
  ctx.turn_map.push_back(-1);
  ctx.tokens.push_back({kClsId, 0, 0});
  for (int i = first; i < n; ++i) {
    const Turn& t = turns[static_cast<std::size_t>(i)];
    const int marker = t.speaker == Speaker::kUser ? kUserMarkerId : kAgentMarkerId;
    ctx.ids.push_back(marker);
    ctx.turn_map.push_back(i);
    ctx.tokens.push_back({marker, 0, 0});
    for (const Token& tok : per_turn[static_cast<std::size_t>(i)]) {
      ctx.ids.push_back(tok.id);
      ctx.turn_map.push_back(i);
      ctx.tokens.push_back(tok);
    }
    ctx.ids.push_back(kSepId);
    ctx.turn_map.push_back(i);
    ctx.tokens.push_back({kSepId, 0, 0});
  }
  return ctx;
}

std::vector<int> TextIds(const Tokenizer& tokenizer, std::string_view text) {
  std::vector<int> ids{kClsId};
  for (int id : tokenizer.Encode(text)) ids.push_back(id);
  ids.push_back(kSepId);
  return ids;
}

ContextEncoding EncodeContext(const EncoderWeights& w, const EncoderConfig& config,
                              const Tokenizer& tokenizer,
                              std::span<const Turn> turns) {
  ContextEncoding enc;
  enc.tokens = BuildContext(tokenizer, turns, config);
  EncoderOutput out = EncodeIds(w, config, enc.tokens.ids);
  enc.sequence = std::move(out.sequence);
  enc.pooled = std::move(out.pooled);
  return enc;
}

RowVector MeanTokenPool(const Matrix& sequence) {
  if (sequence.rows() <= 2) return sequence.row(0);
  return sequence.middleRows(1, sequence.rows() - 2).colwise().mean();
}

Matrix MeanTokenPoolBackward(Eigen::Index rows, const RowVector& d_out) {
  Matrix d = Matrix::Zero(rows, d_out.size());
  if (rows <= 2) {
    d.row(0) = d_out;
    return d;
  }
  const RowVector share = d_out / static_cast<double>(rows - 2);
  for (Eigen::Index r = 1; r + 1 < rows; ++r) d.row(r) = share;
  return d;
}

RowVector EncodeText(const EncoderWeights& w, const EncoderConfig& config,
                     const Tokenizer& tokenizer, std::string_view text) {
  return MeanTokenPool(EncodeIds(w, config, TextIds(tokenizer, text)).sequence);
}

MlmMask MaskForMlm(std::span<const int> ids, double mask_prob, int vocab_size,
                   Rng& rng) {
  if (!(mask_prob >= 0.0 && mask_prob < 1.0)) {
    throw Error("mask_prob must lie in [0, 1)");
  }
  MlmMask m;
  m.masked_ids.assign(ids.begin(), ids.end());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (Tokenizer::IsSpecial(ids[i])) continue;
    if (!Bernoulli(rng, mask_prob)) continue;
    m.positions.push_back(static_cast<int>(i));
    m.targets.push_back(ids[i]);
    const double r = Uniform01(rng);
    if (r < 0.8) {
      m.masked_ids[i] = kMaskId;
    } else if (r < 0.9 && vocab_size > kNumSpecialTokens) {
      m.masked_ids[i] = static_cast<int>(UniformInt(rng, kNumSpecialTokens, vocab_size - 1));
    }
  }
  return m;
}

namespace {

struct MlmForward {
  Matrix rows, pre, act, logits;
};

MlmForward MlmHead(const EncoderWeights& w, const Matrix& sequence,
                   std::span<const int> positions) {
  MlmForward f;
  f.rows.resize(static_cast<Eigen::Index>(positions.size()), sequence.cols());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    f.rows.row(static_cast<Eigen::Index>(i)) = sequence.row(positions[i]);
  }
  f.pre = Linear(f.rows, w.mlm_w, w.mlm_b);
  f.act = Gelu(f.pre);
  f.logits = f.act * w.token_embedding.transpose();
  f.logits.rowwise() += w.mlm_vocab_bias.row(0);
  return f;
}

}  // namespace

double MlmLoss(const EncoderWeights& w, const Matrix& sequence,
               std::span<const int> positions, std::span<const int> targets) {
  if (positions.empty()) return 0.0;
  MlmForward f = MlmHead(w, sequence, positions);
  double sum = 0.0;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    sum += CrossEntropy(f.logits.row(static_cast<Eigen::Index>(i)), targets[i], 0.0, nullptr);
  }
  return sum / static_cast<double>(positions.size());
}

double MlmLossBackward(const EncoderWeights& w, const Matrix& sequence,
                       std::span<const int> positions,
                       std::span<const int> targets, double scale,
                       EncoderWeights& grads, Matrix& d_sequence) {
  if (positions.empty()) return 0.0;
  MlmForward f = MlmHead(w, sequence, positions);
  Matrix d_logits(f.logits.rows(), f.logits.cols());
  double sum = 0.0;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    RowVector dl;
    const auto r = static_cast<Eigen::Index>(i);
    sum += CrossEntropy(f.logits.row(r), targets[i], scale, &dl);
    d_logits.row(r) = dl;
  }
  grads.mlm_vocab_bias.row(0) += d_logits.colwise().sum();
  grads.token_embedding.noalias() += d_logits.transpose() * f.act;
  Matrix d_act = d_logits * w.token_embedding;
  Matrix d_pre = d_act.array() * GeluDerivative(f.pre).array();
  Matrix d_rows = LinearBackward(d_pre, f.rows, w.mlm_w, grads.mlm_w, grads.mlm_b);
  for (std::size_t i = 0; i < positions.size(); ++i) {
    d_sequence.row(positions[i]) += d_rows.row(static_cast<Eigen::Index>(i));
  }
  return sum;
}

}  // namespace dstlab
