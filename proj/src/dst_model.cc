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

#include "dstlab/dst_model.h"

#include <cmath>
#include <sstream>

namespace dstlab {
namespace {

double AttentionScale(Eigen::Index d) { return 1.0 / std::sqrt(static_cast<double>(d)); }

AttentionWeights InitAttention(int d, Rng& rng) {
  const double s = 1.0 / std::sqrt(static_cast<double>(d));
  return {RandomNormal(d, d, s, rng), RandomNormal(d, d, s, rng),
          RandomNormal(d, d, s, rng)};
}

AttentionKeys PrepareKeys(const AttentionWeights& a, const Matrix& h) {
  return {h * a.wk, h * a.wv};
}

void AddRow(Matrix& m, const RowVector& v) { m.row(0) += v; }

}  // namespace

ModelWeights ZerosLike(const ModelWeights& w) {
  ModelWeights z = w;
  ForEachTensor(z, [](const std::string&, Matrix& m) { m.setZero(); });
  return z;
}

std::size_t ParameterCount(const ModelWeights& w) {
  std::size_t n = 0;
  ModelWeights& m = const_cast<ModelWeights&>(w);
  ForEachTensor(m, [&n](const std::string&, Matrix& t) {
    n += static_cast<std::size_t>(t.size());
  });
  return n;
}

nlohmann::ordered_json ModelConfigToJson(const ModelConfig& c) {
  nlohmann::ordered_json j;
  j["encoder"] = EncoderConfigToJson(c.encoder);
  j["status_mode"] = StatusModeName(c.status_mode);
  return j;
}

ModelConfig ModelConfigFromJson(const nlohmann::json& j) {
  ModelConfig c;
  if (j.contains("encoder")) c.encoder = EncoderConfigFromJson(j.at("encoder"));
  if (j.contains("status_mode")) {
    c.status_mode = ParseStatusMode(j.at("status_mode").get<std::string>());
  }
  return c;
}

HeadWeights InitHeads(int d, int num_domains, Rng& rng) {
  const double s = 1.0 / std::sqrt(static_cast<double>(d));
  HeadWeights h;
  h.domain_query = RandomNormal(1, d, 1.0, rng);
  h.domain_attention = InitAttention(d, rng);
  h.domain_proj = RandomNormal(d, num_domains, s, rng);
  h.domain_bias = Matrix::Zero(1, num_domains);
  h.status_attention = InitAttention(d, rng);
  h.status_hidden = RandomNormal(d, d, s, rng);
  h.status_hidden_bias = Matrix::Zero(1, d);
  h.status_out = RandomNormal(d, kNumStatuses, s, rng);
  h.status_out_bias = Matrix::Zero(1, kNumStatuses);
  h.categorical_attention = InitAttention(d, rng);
  h.categorical_attention.wv = 0.1 * h.categorical_attention.wv + Matrix::Identity(d, d);
  h.categorical_proj = 0.1 * RandomNormal(d, d, s, rng) + Matrix::Identity(d, d);
  h.span_hidden = RandomNormal(2 * d, d, s / std::sqrt(2.0), rng);
  h.span_hidden_bias = Matrix::Zero(1, d);
  h.span_start = RandomNormal(d, 1, s, rng);
  h.span_start_bias = Matrix::Zero(1, 1);
  h.span_end = RandomNormal(d, 1, s, rng);
  h.span_end_bias = Matrix::Zero(1, 1);
  return h;
}

DstModel InitModel(const ModelConfig& config, const Schema& schema,
                   const Tokenizer& tokenizer, Rng& rng) {
  DstModel m;
  m.config = config;
  m.config.encoder.vocab_size = tokenizer.size();
  m.schema = schema;
  m.tokenizer = tokenizer;
  m.weights.encoder = InitEncoder(m.config.encoder, rng);
  m.weights.heads = InitHeads(m.config.encoder.hidden_dim,
                              static_cast<int>(schema.num_domains()), rng);
  return m;
}

std::string SlotText(const SlotSpec& slot) {
  std::string text = slot.name;
  for (char& c : text) {
    if (c == '-' || c == '_') c = ' ';
  }
  return text;
}

SchemaEncodings EncodeSchema(const DstModel& model) {
  SchemaEncodings enc;
  const auto& cfg = model.config.encoder;
  for (const SlotSpec& s : model.schema.slots()) {
    enc.slots.push_back(EncodeText(model.weights.encoder, cfg, model.tokenizer,
                                   SlotText(s)));
    Matrix cands(static_cast<Eigen::Index>(s.candidate_values.size()), cfg.hidden_dim);
    for (std::size_t j = 0; j < s.candidate_values.size(); ++j) {
      cands.row(static_cast<Eigen::Index>(j)) = EncodeText(
          model.weights.encoder, cfg, model.tokenizer, s.candidate_values[j]);
    }
    enc.candidates.push_back(std::move(cands));
  }
  return enc;
}

PreparedContext PrepareContext(const HeadWeights& h, const Matrix& sequence,
                               const RowVector& pooled) {
  PreparedContext p;
  p.sequence = sequence;
  p.pooled = pooled;
  p.domain = PrepareKeys(h.domain_attention, sequence);
  p.status = PrepareKeys(h.status_attention, sequence);
  p.categorical = PrepareKeys(h.categorical_attention, sequence);
  const Eigen::Index d = sequence.cols();
  p.span_base = sequence * h.span_hidden.topRows(d);
  return p;
}

PreparedGrads::PreparedGrads(Eigen::Index length, Eigen::Index dim)
    : d_domain_keys(Matrix::Zero(length, dim)),
      d_domain_values(Matrix::Zero(length, dim)),
      d_status_keys(Matrix::Zero(length, dim)),
      d_status_values(Matrix::Zero(length, dim)),
      d_categorical_keys(Matrix::Zero(length, dim)),
      d_categorical_values(Matrix::Zero(length, dim)),
      d_span_base(Matrix::Zero(length, dim)),
      d_pooled(RowVector::Zero(dim)) {}

RowVector Attend(const AttentionWeights& a, const AttentionKeys& kv,
                 const RowVector& x, AttentionCache* cache) {
  const RowVector q = x * a.wq;
  RowVector scores = (kv.keys * q.transpose()).transpose() * AttentionScale(q.size());
  RowVector probs = Softmax(scores);
  RowVector out = probs * kv.values;
  if (cache != nullptr) {
    cache->input = x;
    cache->query = q;
    cache->probs = std::move(probs);
  }
  return out;
}

RowVector AttendBackward(const AttentionWeights& a, const AttentionKeys& kv,
                         const AttentionCache& c, const RowVector& d_out,
                         AttentionWeights& grads, Matrix& d_keys,
                         Matrix& d_values) {
  // out = p V; p = softmax(s); s = K q^T * scale.
  d_values.noalias() += c.probs.transpose() * d_out;
  const RowVector dp = (kv.values * d_out.transpose()).transpose();
  const double dot = c.probs.dot(dp);
  const RowVector ds =
      (c.probs.array() * (dp.array() - dot)).matrix() * AttentionScale(c.query.size());
  d_keys.noalias() += ds.transpose() * c.query;
  const RowVector dq = ds * kv.keys;
  grads.wq.noalias() += c.input.transpose() * dq;
  return dq * a.wq.transpose();
}

Matrix PrepareContextBackward(const HeadWeights& h, const PreparedContext& ctx,
                              const PreparedGrads& pg, HeadWeights& grads) {
  const Matrix& s = ctx.sequence;
  const Eigen::Index d = s.cols();
  Matrix d_seq = pg.d_span_base * h.span_hidden.topRows(d).transpose();
  grads.span_hidden.topRows(d).noalias() += s.transpose() * pg.d_span_base;
  auto push = [&](const AttentionWeights& a, AttentionWeights& g,
                  const Matrix& dk, const Matrix& dv) {
    g.wk.noalias() += s.transpose() * dk;
    g.wv.noalias() += s.transpose() * dv;
    d_seq.noalias() += dk * a.wk.transpose();
    d_seq.noalias() += dv * a.wv.transpose();
  };
  push(h.domain_attention, grads.domain_attention, pg.d_domain_keys, pg.d_domain_values);
  push(h.status_attention, grads.status_attention, pg.d_status_keys, pg.d_status_values);
  push(h.categorical_attention, grads.categorical_attention, pg.d_categorical_keys,
       pg.d_categorical_values);
  return d_seq;
}

RowVector DomainLogits(const HeadWeights& h, const PreparedContext& ctx,
                       DomainCache* cache) {
  AttentionCache ac;
  RowVector a = Attend(h.domain_attention, ctx.domain, h.domain_query.row(0),
                       cache != nullptr ? &ac : nullptr);
  RowVector logits = a * h.domain_proj + h.domain_bias.row(0);
  if (cache != nullptr) {
    cache->attention = std::move(ac);
    cache->attended = std::move(a);
  }
  return logits;
}

void DomainBackward(const HeadWeights& h, const PreparedContext& ctx,
                    const DomainCache& cache, const RowVector& d_logits,
                    HeadWeights& grads, PreparedGrads& pg) {
  grads.domain_proj.noalias() += cache.attended.transpose() * d_logits;
  AddRow(grads.domain_bias, d_logits);
  const RowVector d_a = d_logits * h.domain_proj.transpose();
  const RowVector d_q = AttendBackward(h.domain_attention, ctx.domain, cache.attention, d_a,
                                       grads.domain_attention, pg.d_domain_keys,
                                       pg.d_domain_values);
  AddRow(grads.domain_query, d_q);
}

RowVector StatusLogits(const HeadWeights& h, const PreparedContext& ctx,
                       const RowVector& slot, StatusCache* cache) {
  AttentionCache ac;
  RowVector z = slot + Attend(h.status_attention, ctx.status, slot,
                              cache != nullptr ? &ac : nullptr);
  RowVector pre = z * h.status_hidden + h.status_hidden_bias.row(0);
  RowVector act = Gelu(pre);
  RowVector logits = act * h.status_out + h.status_out_bias.row(0);
  if (cache != nullptr) {
    cache->attention = std::move(ac);
    cache->z = std::move(z);
    cache->pre = std::move(pre);
    cache->act = std::move(act);
  }
  return logits;
}

RowVector StatusBackward(const HeadWeights& h, const PreparedContext& ctx,
                         const StatusCache& cache, const RowVector& d_logits,
                         HeadWeights& grads, PreparedGrads& pg) {
  grads.status_out.noalias() += cache.act.transpose() * d_logits;
  AddRow(grads.status_out_bias, d_logits);
  const RowVector d_act = d_logits * h.status_out.transpose();
  const RowVector d_pre = d_act.array() * GeluDerivative(cache.pre).array();
  grads.status_hidden.noalias() += cache.z.transpose() * d_pre;
  AddRow(grads.status_hidden_bias, d_pre);
  const RowVector d_z = d_pre * h.status_hidden.transpose();
  RowVector d_slot = d_z;
  d_slot += AttendBackward(h.status_attention, ctx.status, cache.attention, d_z,
                           grads.status_attention, pg.d_status_keys,
                           pg.d_status_values);
  return d_slot;
}

RowVector CategoricalLogits(const HeadWeights& h, const PreparedContext& ctx,
                            const RowVector& slot, const Matrix& candidates,
                            CategoricalCache* cache) {
  AttentionCache ac;
  RowVector z = ctx.pooled + Attend(h.categorical_attention, ctx.categorical, slot,
                                    cache != nullptr ? &ac : nullptr);
  const double scale = 1.0 / std::sqrt(static_cast<double>(z.size()));
  RowVector projected = scale * (z * h.categorical_proj);
  RowVector logits = projected * candidates.transpose();
  if (cache != nullptr) {
    cache->attention = std::move(ac);
    cache->z = std::move(z);
    cache->projected = std::move(projected);
  }
  return logits;
}

RowVector CategoricalBackward(const HeadWeights& h, const PreparedContext& ctx,
                              const Matrix& candidates,
                              const CategoricalCache& cache,
                              const RowVector& d_logits, HeadWeights& grads,
                              PreparedGrads& pg, Matrix& d_candidates) {
  d_candidates.noalias() += d_logits.transpose() * cache.projected;
  const double scale = 1.0 / std::sqrt(static_cast<double>(cache.z.size()));
  const RowVector d_proj = scale * (d_logits * candidates);
  grads.categorical_proj.noalias() += cache.z.transpose() * d_proj;
  const RowVector d_z = d_proj * h.categorical_proj.transpose();
  pg.d_pooled += d_z;
  return AttendBackward(h.categorical_attention, ctx.categorical, cache.attention,
                        d_z, grads.categorical_attention, pg.d_categorical_keys,
                        pg.d_categorical_values);
}

SpanLogitsOut SpanLogits(const HeadWeights& h, const PreparedContext& ctx,
                         const RowVector& slot, SpanCache* cache) {
  const Eigen::Index d = slot.size();
  const RowVector slot_term =
      slot * h.span_hidden.bottomRows(d) + h.span_hidden_bias.row(0);
  Matrix pre = ctx.span_base;
  pre.rowwise() += slot_term;
  Matrix act = Gelu(pre);
  SpanLogitsOut out;
  out.start = (act * h.span_start).transpose();
  out.start.array() += h.span_start_bias(0, 0);
  out.end = (act * h.span_end).transpose();
  out.end.array() += h.span_end_bias(0, 0);
  if (cache != nullptr) {
    cache->slot = slot;
    cache->pre = std::move(pre);
    cache->act = std::move(act);
  }
  return out;
}

RowVector SpanBackward(const HeadWeights& h, const SpanCache& cache,
                       const RowVector& d_start, const RowVector& d_end,
                       HeadWeights& grads, PreparedGrads& pg) {
  const Eigen::Index d = cache.slot.size();
  grads.span_start.noalias() += cache.act.transpose() * d_start.transpose();
  grads.span_start_bias(0, 0) += d_start.sum();
  grads.span_end.noalias() += cache.act.transpose() * d_end.transpose();
  grads.span_end_bias(0, 0) += d_end.sum();
  Matrix d_act = d_start.transpose() * h.span_start.transpose();
  d_act.noalias() += d_end.transpose() * h.span_end.transpose();
  const Matrix d_pre = d_act.array() * GeluDerivative(cache.pre).array();
  pg.d_span_base += d_pre;
  const RowVector d_row = d_pre.colwise().sum();
  AddRow(grads.span_hidden_bias, d_row);
  grads.span_hidden.bottomRows(d).noalias() += cache.slot.transpose() * d_row;
  return d_row * h.span_hidden.bottomRows(d).transpose();
}

DomainPrediction DomainsFromLogits(const RowVector& logits) {
  DomainPrediction p;
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    const double prob = Sigmoid(logits(i));
    p.probabilities.push_back(prob);
    p.active.push_back(prob > 0.5);
  }
  return p;
}

DomainPrediction PredictDomains(const HeadWeights& h, const PreparedContext& ctx) {
  return DomainsFromLogits(DomainLogits(h, ctx));
}

std::vector<SlotStatus> PredictStatuses(const HeadWeights& h,
                                        const PreparedContext& ctx,
                                        const Schema& schema,
                                        const SchemaEncodings& enc,
                                        const std::vector<bool>& domain_active,
                                        StatusMode mode,
                                        StatusCallCounter* counter) {
  if (mode == StatusMode::kHierarchical &&
      domain_active.size() != schema.num_domains()) {
    throw Error("hierarchical status prediction needs one activation per domain");
  }
  std::vector<SlotStatus> out(schema.num_slots(), SlotStatus::kInactive);
  for (std::size_t s = 0; s < schema.num_slots(); ++s) {
    if (mode == StatusMode::kHierarchical && !domain_active[schema.slot_domain(s)]) {
      continue;
    }
    if (counter != nullptr) ++counter->calls;
    const RowVector logits = StatusLogits(h, ctx, enc.slots[s]);
    out[s] = static_cast<SlotStatus>(ArgmaxLowestIndex(logits));
  }
  return out;
}

std::size_t PredictCategorical(const HeadWeights& h, const PreparedContext& ctx,
                               const Schema& schema, const SchemaEncodings& enc,
                               std::size_t slot) {
  if (!schema.slot(slot).categorical()) {
    throw Error("slot '" + schema.slot(slot).name + "' is not categorical");
  }
  const RowVector logits =
      CategoricalLogits(h, ctx, enc.slots[slot], enc.candidates[slot]);
  return static_cast<std::size_t>(ArgmaxLowestIndex(logits));
}

std::string SpanText(const ContextTokens& tokens, std::span<const Turn> turns,
                     int start, int end) {
  if (start < 0 || end < start || end >= tokens.length()) return {};
  const auto s = static_cast<std::size_t>(start);
  const auto e = static_cast<std::size_t>(end);
  if (Tokenizer::IsSpecial(tokens.ids[s]) || Tokenizer::IsSpecial(tokens.ids[e])) {
    return {};
  }
  const int turn = tokens.turn_map[s];
  if (turn != tokens.turn_map[e] || turn < 0 ||
      static_cast<std::size_t>(turn) >= turns.size()) {
    return {};
  }
  const std::string& text = turns[static_cast<std::size_t>(turn)].text;
  const std::size_t begin = tokens.tokens[s].begin;
  const std::size_t stop = tokens.tokens[e].end;
  if (stop <= begin || stop > text.size()) return {};
  return text.substr(begin, stop - begin);
}

SpanPrediction SelectSpan(const RowVector& start_logits,
                          const RowVector& end_logits,
                          const ContextTokens& tokens,
                          std::span<const Turn> turns) {
  SpanPrediction p;
  p.start = static_cast<int>(ArgmaxLowestIndex(start_logits));
  p.end = static_cast<int>(ArgmaxLowestIndex(end_logits));
  p.value = SpanText(tokens, turns, p.start, p.end);
  return p;
}

SpanPrediction PredictSpan(const HeadWeights& h, const PreparedContext& ctx,
                           const ContextTokens& tokens,
                           std::span<const Turn> turns,
                           const SchemaEncodings& enc, std::size_t slot) {
  const SpanLogitsOut logits = SpanLogits(h, ctx, enc.slots[slot]);
  return SelectSpan(logits.start, logits.end, tokens, turns);
}

TurnContext EncodeTurnContext(const DstModel& model, std::span<const Turn> turns) {
  TurnContext c;
  c.encoding = EncodeContext(model.weights.encoder, model.config.encoder,
                             model.tokenizer, turns);
  c.prepared = PrepareContext(model.weights.heads, c.encoding.sequence,
                              c.encoding.pooled);
  return c;
}

std::string PredictValue(const DstModel& model, const SchemaEncodings& enc,
                         const TurnContext& ctx, std::span<const Turn> turns,
                         std::size_t slot,
                         std::map<std::string, SpanPrediction>* spans) {
  const SlotSpec& spec = model.schema.slot(slot);
  if (spec.categorical()) {
    const std::size_t j =
        PredictCategorical(model.weights.heads, ctx.prepared, model.schema, enc, slot);
    return spec.candidate_values[j];
  }
  SpanPrediction sp = PredictSpan(model.weights.heads, ctx.prepared,
                                  ctx.encoding.tokens, turns, enc, slot);
  std::string value = sp.value;
  if (spans != nullptr) (*spans)[spec.name] = std::move(sp);
  return value;
}

TurnPrediction PredictTurn(const DstModel& model, const SchemaEncodings& enc,
                           std::span<const Turn> turns, StatusMode mode,
                           StatusCallCounter* counter) {
  return PredictTurn(model, enc, EncodeTurnContext(model, turns), turns, mode,
                     counter);
}

TurnPrediction PredictTurn(const DstModel& model, const SchemaEncodings& enc,
                           const TurnContext& ctx, std::span<const Turn> turns,
                           StatusMode mode, StatusCallCounter* counter) {
  const HeadWeights& h = model.weights.heads;
  TurnPrediction p;
  const DomainPrediction domains = PredictDomains(h, ctx.prepared);
  p.domain_probabilities = domains.probabilities;
  p.domain_active = domains.active;
  const std::vector<SlotStatus> statuses = PredictStatuses(
      h, ctx.prepared, model.schema, enc, domains.active, mode, counter);
  for (std::size_t s = 0; s < statuses.size(); ++s) {
    std::string value;
    if (statuses[s] == SlotStatus::kActive) {
      value = PredictValue(model, enc, ctx, turns, s, &p.spans);
    }
    p.state.Set(model.schema.slot(s).name, statuses[s], std::move(value));
  }
  return p;
}

std::vector<TurnPrediction> PredictCorpus(const DstModel& model,
                                          const Corpus& corpus) {
  const SchemaEncodings enc = EncodeSchema(model);
  std::vector<TurnPrediction> out;
  for (const Dialogue& d : corpus.dialogues) {
    for (std::size_t t = 0; t < d.turns.size(); ++t) {
      if (!d.turns[t].gold_state) continue;
      TurnPrediction p = PredictTurn(
          model, enc, std::span<const Turn>(d.turns.data(), t + 1),
          model.config.status_mode);
      p.dialogue_id = d.id;
      p.turn_index = static_cast<int>(t);
      out.push_back(std::move(p));
    }
  }
  return out;
}

nlohmann::ordered_json TurnPredictionToJson(const TurnPrediction& p,
                                            const Schema& schema) {
  nlohmann::ordered_json j;
  j["dialogue_id"] = p.dialogue_id;
  j["turn"] = p.turn_index;
  if (!p.domain_probabilities.empty()) {
    nlohmann::ordered_json domains = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < p.domain_probabilities.size() && i < schema.num_domains(); ++i) {
      domains[schema.domains()[i]] = {{"probability", p.domain_probabilities[i]},
                                      {"active", static_cast<bool>(p.domain_active[i])}};
    }
    j["domains"] = std::move(domains);
  }
  j["state"] = BeliefStateToJson(p.state);
  if (!p.spans.empty()) {
    nlohmann::ordered_json spans = nlohmann::ordered_json::object();
    for (const auto& [slot, sp] : p.spans) {
      spans[slot] = {{"start", sp.start}, {"end", sp.end}, {"value", sp.value}};
    }
    j["spans"] = std::move(spans);
  }
  return j;
}

TurnPrediction TurnPredictionFromJson(const nlohmann::json& j,
                                      const Schema& schema) {
  TurnPrediction p;
  p.dialogue_id = j.at("dialogue_id").get<std::string>();
  p.turn_index = j.at("turn").get<int>();
  if (j.contains("domains")) {
    for (const std::string& name : schema.domains()) {
      const auto it = j.at("domains").find(name);
      if (it == j.at("domains").end()) {
        throw Error("prediction for " + p.dialogue_id + " lacks domain '" + name + "'");
      }
      p.domain_probabilities.push_back(it->at("probability").get<double>());
      p.domain_active.push_back(it->at("active").get<bool>());
    }
  }
  const BeliefState given = BeliefStateFromJson(j.at("state"));
  for (const auto& [slot, v] : given.entries) {
    if (!schema.FindSlot(slot)) {
      throw Error("prediction for " + p.dialogue_id + " names unknown slot '" + slot + "'");
    }
  }
  for (const SlotSpec& s : schema.slots()) {
    const SlotValue v = given.Get(s.name);
    p.state.Set(s.name, v.status, v.value);
  }
  if (j.contains("spans")) {
    for (const auto& [slot, v] : j.at("spans").items()) {
      p.spans[slot] = {v.at("start").get<int>(), v.at("end").get<int>(),
                       v.at("value").get<std::string>()};
    }
  }
  return p;
}

std::string PredictionsToJsonl(const std::vector<TurnPrediction>& predictions,
                               const Schema& schema) {
  std::string out;
  for (const TurnPrediction& p : predictions) {
    out += TurnPredictionToJson(p, schema).dump();
    out += '\n';
  }
  return out;
}

std::vector<TurnPrediction> PredictionsFromJsonl(std::string_view text,
                                                 const Schema& schema) {
  std::vector<TurnPrediction> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(TurnPredictionFromJson(nlohmann::json::parse(line), schema));
    } catch (const nlohmann::json::exception& e) {
      throw Error("prediction line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace dstlab
