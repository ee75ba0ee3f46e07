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

#include "dstlab/training.h"

#include <cmath>

namespace dstlab {
namespace {

std::vector<Matrix*> Tensors(ModelWeights& w) {
  std::vector<Matrix*> out;
  ForEachTensor(w, [&out](const std::string&, Matrix& m) { out.push_back(&m); });
  return out;
}

void SetZero(ModelWeights& w) {
  ForEachTensor(w, [](const std::string&, Matrix& m) { m.setZero(); });
}

bool StartsWithContinuation(const std::string& piece) {
  return piece.size() > 2 && piece.compare(0, 2, "##") == 0;
}

// Every string encoded for one batch: slot names, then candidate values.
struct SchemaStrings {
  std::vector<std::string> texts;
  std::vector<std::size_t> slot_index;
  std::vector<std::size_t> first_candidate;  // per slot
};

SchemaStrings CollectSchemaStrings(const Schema& schema) {
  SchemaStrings s;
  for (const SlotSpec& slot : schema.slots()) {
    s.slot_index.push_back(s.texts.size());
    s.texts.push_back(SlotText(slot));
  }
  for (const SlotSpec& slot : schema.slots()) {
    s.first_candidate.push_back(s.texts.size());
    for (const std::string& v : slot.candidate_values) s.texts.push_back(v);
  }
  return s;
}

struct Instance {
  std::size_t slot = 0;
  int target = 0;
  int end = 0;
  double weight = 1.0;
};

struct PlannedExample {
  ContextTokens tokens;
  std::vector<double> domain_targets;
  std::vector<Instance> status, categorical, span;
};

}  // namespace

std::string_view MlmModeName(MlmMode mode) {
  switch (mode) {
    case MlmMode::kOff:
      return "off";
    case MlmMode::kTargetOnly:
      return "target_only";
    case MlmMode::kTargetPlusAuxiliary:
      return "target_plus_auxiliary";
  }
  return "off";
}

MlmMode ParseMlmMode(std::string_view name) {
  if (name == "off") return MlmMode::kOff;
  if (name == "target_only") return MlmMode::kTargetOnly;
  if (name == "target_plus_auxiliary") return MlmMode::kTargetPlusAuxiliary;
  throw Error("unknown mlm_mode '" + std::string(name) + "'");
}

void TrainConfig::Validate() const {
  if (!(learning_rate > 0.0)) throw Error("learning_rate must be positive");
  if (batch_size < 1) throw Error("batch_size must be >= 1");
  if (steps < 0 || mlm_warmup_steps < 0) throw Error("step counts must be >= 0");
  if (mlm_weight < 0.0 || loss_weights.domain < 0.0 || loss_weights.status < 0.0 ||
      loss_weights.categorical < 0.0 || loss_weights.span < 0.0 ||
      inactive_weight < 0.0) {
    throw Error("loss weights must be >= 0");
  }
  if (!(mlm_mask_prob > 0.0 && mlm_mask_prob < 1.0)) {
    throw Error("mlm_mask_prob must lie in (0, 1)");
  }
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw Error("beta2 must lie in [0, 1)");
  if (clip_norm < 0.0) throw Error("clip_norm must be >= 0");
  if (perturbation) perturbation->Validate();
}

nlohmann::ordered_json TrainConfigToJson(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["learning_rate"] = c.learning_rate;
  j["batch_size"] = c.batch_size;
  j["steps"] = c.steps;
  j["seed"] = c.seed;
  j["mlm_mode"] = MlmModeName(c.mlm_mode);
  j["mlm_weight"] = c.mlm_weight;
  j["mlm_mask_prob"] = c.mlm_mask_prob;
  j["mlm_warmup_steps"] = c.mlm_warmup_steps;
  j["perturbation"] = c.perturbation ? nlohmann::ordered_json(PerturbationConfigToJson(*c.perturbation))
                                     : nlohmann::ordered_json(nullptr);
  j["status_mode"] = StatusModeName(c.status_mode);
  j["loss_weights"] = {{"domain", c.loss_weights.domain},
                       {"status", c.loss_weights.status},
                       {"categorical", c.loss_weights.categorical},
                       {"span", c.loss_weights.span}};
  j["inactive_weight"] = c.inactive_weight;
  j["lr_warmup_steps"] = c.lr_warmup_steps;
  j["clip_norm"] = c.clip_norm;
  j["beta2"] = c.beta2;
  j["epsilon"] = c.epsilon;
  j["checkpoint_every"] = c.checkpoint_every;
  return j;
}

TrainConfig TrainConfigFromJson(const nlohmann::json& j) {
  TrainConfig c;
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.steps = j.value("steps", c.steps);
  c.seed = j.value("seed", c.seed);
  if (j.contains("mlm_mode")) c.mlm_mode = ParseMlmMode(j.at("mlm_mode").get<std::string>());
  c.mlm_weight = j.value("mlm_weight", c.mlm_weight);
  c.mlm_mask_prob = j.value("mlm_mask_prob", c.mlm_mask_prob);
  c.mlm_warmup_steps = j.value("mlm_warmup_steps", c.mlm_warmup_steps);
  if (j.contains("perturbation") && !j.at("perturbation").is_null()) {
    c.perturbation = PerturbationConfigFromJson(j.at("perturbation"));
  }
  if (j.contains("status_mode")) {
    c.status_mode = ParseStatusMode(j.at("status_mode").get<std::string>());
  }
  if (j.contains("loss_weights")) {
    const auto& w = j.at("loss_weights");
    c.loss_weights.domain = w.value("domain", c.loss_weights.domain);
    c.loss_weights.status = w.value("status", c.loss_weights.status);
    c.loss_weights.categorical = w.value("categorical", c.loss_weights.categorical);
    c.loss_weights.span = w.value("span", c.loss_weights.span);
  }
  c.inactive_weight = j.value("inactive_weight", c.inactive_weight);
  c.lr_warmup_steps = j.value("lr_warmup_steps", c.lr_warmup_steps);
  c.clip_norm = j.value("clip_norm", c.clip_norm);
  c.beta2 = j.value("beta2", c.beta2);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
  c.Validate();
  return c;
}

nlohmann::ordered_json LossBreakdownToJson(const LossBreakdown& l) {
  nlohmann::ordered_json j;
  j["total"] = l.total;
  j["dst_total"] = l.dst_total;
  j["domain_bce"] = l.domain_bce;
  j["status_ce"] = l.status_ce;
  j["categorical_ce"] = l.categorical_ce;
  j["span_ce"] = l.span_ce;
  j["mlm"] = l.mlm;
  j["skipped_spans"] = l.skipped_spans;
  return j;
}

std::optional<std::pair<int, int>> FindSpan(const Tokenizer& tokenizer,
                                            const ContextTokens& tokens,
                                            std::string_view value) {
  const std::vector<int> v = tokenizer.Encode(value);
  if (v.empty()) return std::nullopt;
  for (int id : v) {
    if (Tokenizer::IsSpecial(id)) return std::nullopt;
  }
  const int n = static_cast<int>(v.size());
  const int len = tokens.length();
  for (int start = len - n; start >= 1; --start) {
    const int end = start + n - 1;
    const int turn = tokens.turn_map[static_cast<std::size_t>(start)];
    bool match = true;
    for (int k = 0; k < n && match; ++k) {
      const auto p = static_cast<std::size_t>(start + k);
      match = tokens.ids[p] == v[static_cast<std::size_t>(k)] &&
              tokens.turn_map[p] == turn;
    }
    if (!match) continue;
    if (end + 1 < len &&
        tokens.turn_map[static_cast<std::size_t>(end + 1)] == turn &&
        StartsWithContinuation(tokenizer.piece(tokens.ids[static_cast<std::size_t>(end + 1)]))) {
      continue;
    }
    return std::make_pair(start, end);
  }
  return std::nullopt;
}

LossBreakdown BatchLoss(const DstModel& model, std::span<const TrainExample> batch,
                        std::span<const std::string> auxiliary,
                        const TrainConfig& config, std::uint64_t mask_seed,
                        Rng* dropout_rng, ModelWeights* grads) {
  const Schema& schema = model.schema;
  const EncoderConfig& ecfg = model.config.encoder;
  const EncoderWeights& ew = model.weights.encoder;
  const HeadWeights& hw = model.weights.heads;
  const Eigen::Index d = ecfg.hidden_dim;
  const LossWeights& lw = config.loss_weights;
  const bool backward = grads != nullptr;
  LossBreakdown loss;

  // Schema strings, encoded once for the whole batch.
  const SchemaStrings strings = CollectSchemaStrings(schema);
  std::vector<EncoderCache> string_caches(backward ? strings.texts.size() : 0);
  std::vector<RowVector> string_vecs;
  std::vector<RowVector> string_grads;
  for (std::size_t i = 0; i < strings.texts.size(); ++i) {
    const std::vector<int> ids = TextIds(model.tokenizer, strings.texts[i]);
    string_vecs.push_back(MeanTokenPool(
        EncodeIds(ew, ecfg, ids, backward ? &string_caches[i] : nullptr, dropout_rng)
            .sequence));
    string_grads.push_back(RowVector::Zero(d));
  }
  std::vector<Matrix> candidates;
  for (std::size_t s = 0; s < schema.num_slots(); ++s) {
    const auto& vals = schema.slot(s).candidate_values;
    Matrix c(static_cast<Eigen::Index>(vals.size()), d);
    for (std::size_t j = 0; j < vals.size(); ++j) {
      c.row(static_cast<Eigen::Index>(j)) = string_vecs[strings.first_candidate[s] + j];
    }
    candidates.push_back(std::move(c));
  }

  // Plan supervision so each component can be averaged over the batch.
  std::vector<PlannedExample> plans;
  double status_norm = 0.0;
  std::size_t n_cat = 0;
  std::size_t n_span = 0;
  for (const TrainExample& ex : batch) {
    PlannedExample p;
    p.tokens = BuildContext(model.tokenizer, ex.turns, ecfg);
    const std::vector<bool> active = ActiveDomains(schema, ex.gold);
    for (bool a : active) p.domain_targets.push_back(a ? 1.0 : 0.0);
    for (std::size_t s = 0; s < schema.num_slots(); ++s) {
      const SlotSpec& spec = schema.slot(s);
      const SlotValue g = ex.gold.Get(spec.name);
      if (config.status_mode == StatusMode::kFlat || active[schema.slot_domain(s)]) {
        const double w = g.status == SlotStatus::kInactive ? config.inactive_weight : 1.0;
        p.status.push_back({s, static_cast<int>(g.status), 0, w});
        status_norm += w;
      }
      if (g.status != SlotStatus::kActive) continue;
      if (spec.categorical()) {
        for (std::size_t j = 0; j < spec.candidate_values.size(); ++j) {
          if (NormalizeValue(spec.candidate_values[j]) == NormalizeValue(g.value)) {
            p.categorical.push_back({s, static_cast<int>(j), 0, 1.0});
            break;
          }
        }
      } else if (auto span = FindSpan(model.tokenizer, p.tokens, g.value)) {
        p.span.push_back({s, span->first, span->second, 1.0});
      } else {
        ++loss.skipped_spans;
      }
    }
    n_cat += p.categorical.size();
    n_span += p.span.size();
    plans.push_back(std::move(p));
  }
  const double n_dom = static_cast<double>(batch.size() * schema.num_domains());
  const double dom_scale = n_dom > 0 ? 1.0 / n_dom : 0.0;
  const double status_scale = status_norm > 0 ? 1.0 / status_norm : 0.0;
  const double cat_scale = n_cat > 0 ? 1.0 / static_cast<double>(n_cat) : 0.0;
  const double span_scale = n_span > 0 ? 1.0 / static_cast<double>(n_span) : 0.0;

  for (std::size_t b = 0; b < batch.size(); ++b) {
    const PlannedExample& p = plans[b];
    EncoderCache cache;
    const EncoderOutput out =
        EncodeIds(ew, ecfg, p.tokens.ids, backward ? &cache : nullptr, dropout_rng);
    const PreparedContext ctx = PrepareContext(hw, out.sequence, out.pooled);
    PreparedGrads pg(backward ? out.sequence.rows() : 0, backward ? d : 0);
    HeadWeights* hg = backward ? &grads->heads : nullptr;

    DomainCache dc;
    const RowVector dlog = DomainLogits(hw, ctx, backward ? &dc : nullptr);
    RowVector d_dom = RowVector::Zero(dlog.size());
    for (Eigen::Index i = 0; i < dlog.size(); ++i) {
      double g = 0.0;
      loss.domain_bce += dom_scale * BinaryCrossEntropy(
          dlog(i), p.domain_targets[static_cast<std::size_t>(i)],
          lw.domain * dom_scale, &g);
      d_dom(i) = g;
    }
    if (backward) DomainBackward(hw, ctx, dc, d_dom, *hg, pg);

    for (const Instance& in : p.status) {
      StatusCache sc;
      const std::size_t si = strings.slot_index[in.slot];
      const RowVector logits =
          StatusLogits(hw, ctx, string_vecs[si], backward ? &sc : nullptr);
      RowVector dl;
      const double ce = CrossEntropy(logits, in.target,
                                     lw.status * in.weight * status_scale, &dl);
      loss.status_ce += in.weight * status_scale * ce;
      if (backward) string_grads[si] += StatusBackward(hw, ctx, sc, dl, *hg, pg);
    }

    for (const Instance& in : p.categorical) {
      CategoricalCache cc;
      const std::size_t si = strings.slot_index[in.slot];
      const Matrix& cand = candidates[in.slot];
      const RowVector logits = CategoricalLogits(hw, ctx, string_vecs[si], cand,
                                                 backward ? &cc : nullptr);
      RowVector dl;
      loss.categorical_ce +=
          cat_scale * CrossEntropy(logits, in.target, lw.categorical * cat_scale, &dl);
      if (backward) {
        Matrix d_cand = Matrix::Zero(cand.rows(), d);
        string_grads[si] += CategoricalBackward(hw, ctx, cand, cc, dl, *hg, pg, d_cand);
        for (Eigen::Index j = 0; j < cand.rows(); ++j) {
          string_grads[strings.first_candidate[in.slot] + static_cast<std::size_t>(j)] +=
              d_cand.row(j);
        }
      }
    }

    for (const Instance& in : p.span) {
      SpanCache spc;
      const std::size_t si = strings.slot_index[in.slot];
      const SpanLogitsOut logits =
          SpanLogits(hw, ctx, string_vecs[si], backward ? &spc : nullptr);
      RowVector ds, de;
      const double scale = lw.span * span_scale;
      loss.span_ce += span_scale * (CrossEntropy(logits.start, in.target, scale, &ds) +
                                    CrossEntropy(logits.end, in.end, scale, &de));
      if (backward) string_grads[si] += SpanBackward(hw, spc, ds, de, *hg, pg);
    }

    if (backward) {
      const Matrix d_seq = PrepareContextBackward(hw, ctx, pg, *hg);
      EncodeBackward(ew, ecfg, cache, d_seq, pg.d_pooled, grads->encoder);
    }
  }

  if (backward) {
    for (std::size_t i = 0; i < strings.texts.size(); ++i) {
      if (string_grads[i].isZero(0.0)) continue;
      const Matrix d_seq =
          MeanTokenPoolBackward(string_caches[i].sequence.rows(), string_grads[i]);
      EncodeBackward(ew, ecfg, string_caches[i], d_seq, RowVector::Zero(d), grads->encoder);
    }
  }

  loss.dst_total = lw.domain * loss.domain_bce + lw.status * loss.status_ce +
                   lw.categorical * loss.categorical_ce + lw.span * loss.span_ce;

  if (config.mlm_mode != MlmMode::kOff) {
    std::vector<std::vector<int>> sequences;
    for (const PlannedExample& p : plans) sequences.push_back(p.tokens.ids);
    if (config.mlm_mode == MlmMode::kTargetPlusAuxiliary) {
      for (const std::string& text : auxiliary) {
        sequences.push_back(TextIds(model.tokenizer, text));
      }
    }
    Rng mask_rng(mask_seed);
    // MLM passes draw dropout from their own stream so the DST trajectory
    // does not depend on whether MLM runs.
    Rng mlm_dropout_rng(DeriveSeed(mask_seed, "dropout"));
    Rng* mlm_dropout = dropout_rng != nullptr ? &mlm_dropout_rng : nullptr;
    std::vector<MlmMask> masks;
    std::size_t targets = 0;
    for (const auto& ids : sequences) {
      masks.push_back(MaskForMlm(ids, config.mlm_mask_prob, ecfg.vocab_size, mask_rng));
      targets += masks.back().targets.size();
    }
    if (targets > 0) {
      const double scale = config.mlm_weight / static_cast<double>(targets);
      double sum = 0.0;
      for (const MlmMask& m : masks) {
        if (m.targets.empty()) continue;
        EncoderCache cache;
        const EncoderOutput out =
            EncodeIds(ew, ecfg, m.masked_ids, backward ? &cache : nullptr, mlm_dropout);
        if (backward) {
          Matrix d_seq = Matrix::Zero(out.sequence.rows(), d);
          sum += MlmLossBackward(ew, out.sequence, m.positions, m.targets, scale,
                                 grads->encoder, d_seq);
          EncodeBackward(ew, ecfg, cache, d_seq, RowVector::Zero(d), grads->encoder);
        } else {
          sum += MlmLoss(ew, out.sequence, m.positions, m.targets) *
                 static_cast<double>(m.targets.size());
        }
      }
      loss.mlm = sum / static_cast<double>(targets);
    }
  }
  loss.total = loss.dst_total + config.mlm_weight * loss.mlm;
  return loss;
}

double MlmTextLoss(const DstModel& model, std::span<const std::string> texts,
                   double mask_prob, std::uint64_t mask_seed, Rng* dropout_rng,
                   ModelWeights* grads) {
  const EncoderConfig& ecfg = model.config.encoder;
  const EncoderWeights& ew = model.weights.encoder;
  Rng mask_rng(mask_seed);
  std::vector<MlmMask> masks;
  std::size_t targets = 0;
  for (const std::string& t : texts) {
    masks.push_back(MaskForMlm(TextIds(model.tokenizer, t), mask_prob,
                               ecfg.vocab_size, mask_rng));
    targets += masks.back().targets.size();
  }
  if (targets == 0) return 0.0;
  const double scale = 1.0 / static_cast<double>(targets);
  double sum = 0.0;
  for (const MlmMask& m : masks) {
    if (m.targets.empty()) continue;
    EncoderCache cache;
    const EncoderOutput out =
        EncodeIds(ew, ecfg, m.masked_ids, grads ? &cache : nullptr, dropout_rng);
    if (grads != nullptr) {
      Matrix d_seq = Matrix::Zero(out.sequence.rows(), ecfg.hidden_dim);
      sum += MlmLossBackward(ew, out.sequence, m.positions, m.targets, scale,
                             grads->encoder, d_seq);
      EncodeBackward(ew, ecfg, cache, d_seq, RowVector::Zero(ecfg.hidden_dim),
                     grads->encoder);
    } else {
      sum += MlmLoss(ew, out.sequence, m.positions, m.targets) *
             static_cast<double>(m.targets.size());
    }
  }
  return sum * scale;
}

Optimizer::Optimizer(const ModelWeights& like, const TrainConfig& config)
    : config_(config), second_moment_(ZerosLike(like)) {}

double Optimizer::LearningRate(int step) const {
  if (config_.lr_warmup_steps <= 0) return config_.learning_rate;
  const double frac = std::min(1.0, static_cast<double>(step + 1) /
                                        static_cast<double>(config_.lr_warmup_steps));
  return config_.learning_rate * frac;
}

double Optimizer::Step(ModelWeights& weights, ModelWeights& grads) {
  std::vector<Matrix*> w = Tensors(weights);
  std::vector<Matrix*> g = Tensors(grads);
  std::vector<Matrix*> v = Tensors(second_moment_);
  double sq = 0.0;
  for (const Matrix* m : g) sq += m->squaredNorm();
  const double norm = std::sqrt(sq);
  const double clip =
      config_.clip_norm > 0.0 && norm > config_.clip_norm ? config_.clip_norm / norm : 1.0;
  const double lr = LearningRate(t_);
  ++t_;
  const double correction = 1.0 - std::pow(config_.beta2, t_);
  for (std::size_t i = 0; i < w.size(); ++i) {
    auto gi = g[i]->array() * clip;
    v[i]->array() = config_.beta2 * v[i]->array() + (1.0 - config_.beta2) * gi.square();
    w[i]->array() -= lr * gi / ((v[i]->array() / correction).sqrt() + config_.epsilon);
  }
  return norm;
}

Tokenizer BuildVocabulary(const Corpus& train, std::span<const std::string> auxiliary) {
  std::vector<std::string> texts;
  for (const Dialogue& d : train.dialogues) {
    for (const Turn& t : d.turns) texts.push_back(t.text);
  }
  for (const SlotSpec& s : train.schema.slots()) {
    texts.push_back(SlotText(s));
    for (const std::string& v : s.candidate_values) texts.push_back(v);
  }
  texts.insert(texts.end(), auxiliary.begin(), auxiliary.end());
  return Tokenizer::Build(texts);
}

nlohmann::ordered_json StepRecordToJson(const StepRecord& r) {
  nlohmann::ordered_json j;
  j["step"] = r.step;
  j["phase"] = r.phase;
  j["lr"] = r.learning_rate;
  j["grad_norm"] = r.grad_norm;
  j["losses"] = LossBreakdownToJson(r.losses);
  return j;
}

DstModel Train(const Corpus& train, std::span<const std::string> auxiliary,
               const ModelConfig& model_config, const TrainConfig& config,
               const TrainHooks& hooks) {
  config.Validate();
  std::vector<std::pair<std::size_t, std::size_t>> instances;
  for (std::size_t i = 0; i < train.dialogues.size(); ++i) {
    std::size_t gold_index = 0;
    for (const Turn& t : train.dialogues[i].turns) {
      if (t.gold_state) instances.emplace_back(i, gold_index++);
    }
  }
  if (instances.empty()) throw Error("training corpus has no gold user turns");
  const bool uses_aux = config.mlm_mode == MlmMode::kTargetPlusAuxiliary ||
                        config.mlm_warmup_steps > 0;
  if (uses_aux && auxiliary.empty()) throw Error("auxiliary pool is empty");

  const Tokenizer tokenizer = BuildVocabulary(train, auxiliary);
  ModelConfig mc = model_config;
  mc.status_mode = config.status_mode;
  Rng init_rng = MakeRng(config.seed, "init");
  DstModel model = InitModel(mc, train.schema, tokenizer, init_rng);

  Rng batch_rng = MakeRng(config.seed, "batches");
  Rng perturb_rng = MakeRng(config.seed, "perturbation");
  Rng aux_rng = MakeRng(config.seed, "auxiliary");
  Rng dropout_rng = MakeRng(config.seed, "dropout");
  const std::uint64_t mask_root = DeriveSeed(config.seed, "masking");
  Rng* dropout = mc.encoder.dropout > 0.0 ? &dropout_rng : nullptr;

  std::vector<std::string> insertion_pool;
  if (config.perturbation) {
    switch (config.perturbation->source) {
      case InsertionSource::kAuxiliary:
        insertion_pool.assign(auxiliary.begin(), auxiliary.end());
        break;
      case InsertionSource::kTarget:
        insertion_pool = TargetUtterancePool(train);
        break;
      case InsertionSource::kRandomWords:
        insertion_pool = tokenizer.Words();
        break;
    }
    if (insertion_pool.empty()) throw Error("insertion pool is empty");
  }

  auto sample_aux = [&](std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) {
      out.push_back(auxiliary[static_cast<std::size_t>(
          UniformInt(aux_rng, 0, static_cast<std::int64_t>(auxiliary.size()) - 1))]);
    }
    return out;
  };

  Optimizer optimizer(model.weights, config);
  ModelWeights grads = ZerosLike(model.weights);
  const auto batch = static_cast<std::size_t>(config.batch_size);

  for (int k = 0; k < config.mlm_warmup_steps; ++k) {
    SetZero(grads);
    const std::vector<std::string> texts = sample_aux(batch);
    StepRecord rec;
    rec.phase = "mlm_warmup";
    rec.step = k + 1;
    rec.learning_rate = optimizer.LearningRate(optimizer.steps_taken());
    rec.losses.mlm = MlmTextLoss(model, texts, config.mlm_mask_prob,
                                 DeriveSeed(DeriveSeed(mask_root, "warmup"),
                                            static_cast<std::uint64_t>(k)),
                                 dropout, &grads);
    rec.losses.total = rec.losses.mlm;
    if (!std::isfinite(rec.losses.total)) {
      throw Error("non-finite loss at MLM warm-up step " + std::to_string(k + 1));
    }
    rec.grad_norm = optimizer.Step(model.weights, grads);
    if (hooks.on_step) hooks.on_step(rec);
  }

  for (int step = 0; step < config.steps; ++step) {
    std::vector<TrainExample> examples;
    for (std::size_t b = 0; b < batch; ++b) {
      const auto& [di, gi] = instances[static_cast<std::size_t>(
          UniformInt(batch_rng, 0, static_cast<std::int64_t>(instances.size()) - 1))];
      const Dialogue* dialogue = &train.dialogues[di];
      Dialogue perturbed;
      if (config.perturbation) {
        perturbed = PerturbDialogue(*dialogue, *config.perturbation, insertion_pool,
                                    perturb_rng);
        dialogue = &perturbed;
      }
      std::size_t seen = 0;
      for (std::size_t t = 0; t < dialogue->turns.size(); ++t) {
        if (!dialogue->turns[t].gold_state) continue;
        if (seen++ != gi) continue;
        TrainExample ex;
        ex.turns.assign(dialogue->turns.begin(),
                        dialogue->turns.begin() + static_cast<std::ptrdiff_t>(t + 1));
        ex.gold = *dialogue->turns[t].gold_state;
        examples.push_back(std::move(ex));
        break;
      }
    }
    std::vector<std::string> aux_texts;
    if (config.mlm_mode == MlmMode::kTargetPlusAuxiliary) aux_texts = sample_aux(batch);

    SetZero(grads);
    StepRecord rec;
    rec.phase = "finetune";
    rec.step = step + 1;
    rec.learning_rate = optimizer.LearningRate(optimizer.steps_taken());
    rec.losses = BatchLoss(model, examples, aux_texts, config,
                           DeriveSeed(mask_root, static_cast<std::uint64_t>(step)),
                           dropout, &grads);
    if (!std::isfinite(rec.losses.total)) {
      throw Error("non-finite loss at step " + std::to_string(step + 1));
    }
    rec.grad_norm = optimizer.Step(model.weights, grads);
    if (hooks.on_step) hooks.on_step(rec);
    if (hooks.on_checkpoint && config.checkpoint_every > 0 &&
        (step + 1) % config.checkpoint_every == 0 && step + 1 != config.steps) {
      hooks.on_checkpoint(step + 1, model);
    }
  }
  if (hooks.on_checkpoint) hooks.on_checkpoint(config.steps, model);
  return model;
}

TurnPrediction SetOracleStatuses(const TurnPrediction& prediction,
                                 const BeliefState& gold, const Schema& schema,
                                 const ValueProvider& value_for_slot) {
  TurnPrediction out = prediction;
  for (std::size_t s = 0; s < schema.num_slots(); ++s) {
    const std::string& name = schema.slot(s).name;
    const SlotValue g = gold.Get(name);
    const SlotValue p = prediction.state.Get(name);
    std::string value;
    if (g.status == SlotStatus::kActive) {
      value = p.status == SlotStatus::kActive ? p.value : value_for_slot(s);
    } else {
      out.spans.erase(name);
    }
    out.state.Set(name, g.status, std::move(value));
  }
  return out;
}

}  // namespace dstlab
