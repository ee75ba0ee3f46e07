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

#ifndef DSTLAB_DST_MODEL_H_
#define DSTLAB_DST_MODEL_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dstlab/common.h"
#include "dstlab/corpus.h"
#include "dstlab/encoder.h"
#include "dstlab/nn.h"
#include "dstlab/schema.h"
#include "dstlab/tokenizer.h"
#include "json.hpp"

namespace dstlab {

// Single-head scaled dot-product attention pooling: softmax((x Wq)(H Wk)^T /
// sqrt(d)) (H Wv).
struct AttentionWeights {
  Matrix wq, wk, wv;
};

struct HeadWeights {
  Matrix domain_query;  // 1 x d
  AttentionWeights domain_attention;
  Matrix domain_proj, domain_bias;  // d x D, 1 x D
  AttentionWeights status_attention;
  Matrix status_hidden, status_hidden_bias;  // d x d, 1 x d
  Matrix status_out, status_out_bias;        // d x 3, 1 x 3
  AttentionWeights categorical_attention;
  Matrix categorical_proj;                 // d x d
  Matrix span_hidden, span_hidden_bias;    // 2d x d (context rows, slot rows), 1 x d
  Matrix span_start, span_start_bias;      // d x 1, 1 x 1
  Matrix span_end, span_end_bias;          // d x 1, 1 x 1
};

struct ModelWeights {
  EncoderWeights encoder;
  HeadWeights heads;
};

template <typename Fn>
void ForEachHeadTensor(HeadWeights& h, Fn&& fn) {
  fn("heads.domain_query", h.domain_query);
  fn("heads.domain_attention.wq", h.domain_attention.wq);
  fn("heads.domain_attention.wk", h.domain_attention.wk);
  fn("heads.domain_attention.wv", h.domain_attention.wv);
  fn("heads.domain_proj", h.domain_proj);
  fn("heads.domain_bias", h.domain_bias);
  fn("heads.status_attention.wq", h.status_attention.wq);
  fn("heads.status_attention.wk", h.status_attention.wk);
  fn("heads.status_attention.wv", h.status_attention.wv);
  fn("heads.status_hidden", h.status_hidden);
  fn("heads.status_hidden_bias", h.status_hidden_bias);
  fn("heads.status_out", h.status_out);
  fn("heads.status_out_bias", h.status_out_bias);
  fn("heads.categorical_attention.wq", h.categorical_attention.wq);
  fn("heads.categorical_attention.wk", h.categorical_attention.wk);
  fn("heads.categorical_attention.wv", h.categorical_attention.wv);
  fn("heads.categorical_proj", h.categorical_proj);
  fn("heads.span_hidden", h.span_hidden);
  fn("heads.span_hidden_bias", h.span_hidden_bias);
  fn("heads.span_start", h.span_start);
  fn("heads.span_start_bias", h.span_start_bias);
  fn("heads.span_end", h.span_end);
  fn("heads.span_end_bias", h.span_end_bias);
}

template <typename Fn>
void ForEachTensor(ModelWeights& w, Fn&& fn) {
  ForEachTensor(w.encoder, fn);
  ForEachHeadTensor(w.heads, fn);
}

// Same shapes as `w`, all zeros.
ModelWeights ZerosLike(const ModelWeights& w);
std::size_t ParameterCount(const ModelWeights& w);

struct ModelConfig {
  EncoderConfig encoder;
  StatusMode status_mode = StatusMode::kHierarchical;
};

nlohmann::ordered_json ModelConfigToJson(const ModelConfig& c);
ModelConfig ModelConfigFromJson(const nlohmann::json& j);

// Everything needed for inference: weights plus the vocabulary and ontology
// they were trained against.
struct DstModel {
  ModelConfig config;
  Schema schema;
  Tokenizer tokenizer;
  ModelWeights weights;
};

HeadWeights InitHeads(int hidden_dim, int num_domains, Rng& rng);
DstModel InitModel(const ModelConfig& config, const Schema& schema,
                   const Tokenizer& tokenizer, Rng& rng);

// Text fed to the encoder for a slot name.
std::string SlotText(const SlotSpec& slot);

// Pooled encodings of slot names (h_s) and categorical candidate values (one
// row per candidate; empty for non-categorical slots).
struct SchemaEncodings {
  std::vector<RowVector> slots;
  std::vector<Matrix> candidates;
};

SchemaEncodings EncodeSchema(const DstModel& model);

// Keys and values of the three attention heads plus the context half of the
// span trunk, computed once per context.
struct AttentionKeys {
  Matrix keys, values;  // L x d
};

struct PreparedContext {
  Matrix sequence;  // L x d
  RowVector pooled;
  AttentionKeys domain, status, categorical;
  Matrix span_base;  // L x d
};

PreparedContext PrepareContext(const HeadWeights& h, const Matrix& sequence,
                               const RowVector& pooled);

struct AttentionCache {
  RowVector input, query, probs;
};

RowVector Attend(const AttentionWeights& a, const AttentionKeys& kv,
                 const RowVector& x, AttentionCache* cache);

// Gradients flowing into a PreparedContext.
struct PreparedGrads {
  Matrix d_domain_keys, d_domain_values;
  Matrix d_status_keys, d_status_values;
  Matrix d_categorical_keys, d_categorical_values;
  Matrix d_span_base;
  RowVector d_pooled;

  explicit PreparedGrads(Eigen::Index length = 0, Eigen::Index dim = 0);
};

// Accumulates parameter gradients and returns the gradient for the query input.
RowVector AttendBackward(const AttentionWeights& a, const AttentionKeys& kv,
                         const AttentionCache& cache, const RowVector& d_out,
                         AttentionWeights& grads, Matrix& d_keys,
                         Matrix& d_values);

// Pushes PreparedGrads through the key/value/span projections; returns
// d_sequence (pooled gradient is left in `pg.d_pooled`).
Matrix PrepareContextBackward(const HeadWeights& h, const PreparedContext& ctx,
                              const PreparedGrads& pg, HeadWeights& grads);

struct DomainCache {
  AttentionCache attention;
  RowVector attended;
};
RowVector DomainLogits(const HeadWeights& h, const PreparedContext& ctx,
                       DomainCache* cache = nullptr);
void DomainBackward(const HeadWeights& h, const PreparedContext& ctx,
                    const DomainCache& cache, const RowVector& d_logits,
                    HeadWeights& grads, PreparedGrads& pg);

struct StatusCache {
  AttentionCache attention;
  RowVector z, pre, act;
};
RowVector StatusLogits(const HeadWeights& h, const PreparedContext& ctx,
                       const RowVector& slot, StatusCache* cache = nullptr);
// Returns the gradient for the slot encoding.
RowVector StatusBackward(const HeadWeights& h, const PreparedContext& ctx,
                         const StatusCache& cache, const RowVector& d_logits,
                         HeadWeights& grads, PreparedGrads& pg);

// Scores (z Wc / sqrt(d)) . candidate for z = pooled + attention(slot).
struct CategoricalCache {
  AttentionCache attention;
  RowVector z, projected;
};
RowVector CategoricalLogits(const HeadWeights& h, const PreparedContext& ctx,
                            const RowVector& slot, const Matrix& candidates,
                            CategoricalCache* cache = nullptr);
// Accumulates into `d_candidates`; returns the gradient for the slot encoding.
RowVector CategoricalBackward(const HeadWeights& h, const PreparedContext& ctx,
                              const Matrix& candidates,
                              const CategoricalCache& cache,
                              const RowVector& d_logits, HeadWeights& grads,
                              PreparedGrads& pg, Matrix& d_candidates);

struct SpanLogitsOut {
  RowVector start, end;  // length L
};
struct SpanCache {
  RowVector slot;
  Matrix pre, act;
};
SpanLogitsOut SpanLogits(const HeadWeights& h, const PreparedContext& ctx,
                         const RowVector& slot, SpanCache* cache = nullptr);
RowVector SpanBackward(const HeadWeights& h, const SpanCache& cache,
                       const RowVector& d_start, const RowVector& d_end,
                       HeadWeights& grads, PreparedGrads& pg);

struct DomainPrediction {
  std::vector<double> probabilities;
  std::vector<bool> active;
};

// Strictly greater than 0.5 activates a domain.
DomainPrediction DomainsFromLogits(const RowVector& logits);
DomainPrediction PredictDomains(const HeadWeights& h, const PreparedContext& ctx);

struct StatusCallCounter {
  std::int64_t calls = 0;
};

// Hierarchical mode leaves slots of inactive domains inactive without running
// the status head; flat mode scores every slot.
std::vector<SlotStatus> PredictStatuses(const HeadWeights& h,
                                        const PreparedContext& ctx,
                                        const Schema& schema,
                                        const SchemaEncodings& enc,
                                        const std::vector<bool>& domain_active,
                                        StatusMode mode,
                                        StatusCallCounter* counter = nullptr);

// Index into the slot's candidate values; ties go to the lowest index.
std::size_t PredictCategorical(const HeadWeights& h, const PreparedContext& ctx,
                               const Schema& schema, const SchemaEncodings& enc,
                               std::size_t slot);

struct SpanPrediction {
  int start = -1;
  int end = -1;
  std::string value;
  friend bool operator==(const SpanPrediction&, const SpanPrediction&) = default;
};

// Argmax start and end over all positions. An inverted span, a special token
// at either end, or a span crossing turns yields an empty value.
SpanPrediction SelectSpan(const RowVector& start_logits,
                          const RowVector& end_logits,
                          const ContextTokens& tokens,
                          std::span<const Turn> turns);

// Surface string of context tokens [start, end]; empty when not a valid span.
std::string SpanText(const ContextTokens& tokens, std::span<const Turn> turns,
                     int start, int end);

SpanPrediction PredictSpan(const HeadWeights& h, const PreparedContext& ctx,
                           const ContextTokens& tokens,
                           std::span<const Turn> turns,
                           const SchemaEncodings& enc, std::size_t slot);

struct TurnPrediction {
  std::string dialogue_id;
  int turn_index = 0;
  std::vector<double> domain_probabilities;
  std::vector<bool> domain_active;
  // Every schema slot has an entry; values are present only for active slots.
  BeliefState state;
  std::map<std::string, SpanPrediction> spans;
  friend bool operator==(const TurnPrediction&, const TurnPrediction&) = default;
};

// Encoded context ready for the heads.
struct TurnContext {
  ContextEncoding encoding;
  PreparedContext prepared;
};

TurnContext EncodeTurnContext(const DstModel& model, std::span<const Turn> turns);

// Value for one slot read from the value heads (candidate or span string).
std::string PredictValue(const DstModel& model, const SchemaEncodings& enc,
                         const TurnContext& ctx, std::span<const Turn> turns,
                         std::size_t slot,
                         std::map<std::string, SpanPrediction>* spans = nullptr);

// `turns` are the dialogue turns up to and including the target user turn.
TurnPrediction PredictTurn(const DstModel& model, const SchemaEncodings& enc,
                           std::span<const Turn> turns, StatusMode mode,
                           StatusCallCounter* counter = nullptr);

TurnPrediction PredictTurn(const DstModel& model, const SchemaEncodings& enc,
                           const TurnContext& ctx, std::span<const Turn> turns,
                           StatusMode mode, StatusCallCounter* counter = nullptr);

// One prediction per gold user turn, in corpus order.
std::vector<TurnPrediction> PredictCorpus(const DstModel& model,
                                          const Corpus& corpus);

nlohmann::ordered_json TurnPredictionToJson(const TurnPrediction& p,
                                            const Schema& schema);
TurnPrediction TurnPredictionFromJson(const nlohmann::json& j,
                                      const Schema& schema);
std::string PredictionsToJsonl(const std::vector<TurnPrediction>& predictions,
                               const Schema& schema);
std::vector<TurnPrediction> PredictionsFromJsonl(std::string_view text,
                                                 const Schema& schema);

}  // namespace dstlab

#endif  // DSTLAB_DST_MODEL_H_
