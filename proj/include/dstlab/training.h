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

#ifndef DSTLAB_TRAINING_H_
#define DSTLAB_TRAINING_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dstlab/corpus.h"
#include "dstlab/dst_model.h"
#include "dstlab/perturbation.h"
#include "json.hpp"

namespace dstlab {

enum class MlmMode { kOff, kTargetOnly, kTargetPlusAuxiliary };
std::string_view MlmModeName(MlmMode mode);
MlmMode ParseMlmMode(std::string_view name);

struct LossWeights {
  double domain = 1.0;
  double status = 1.0;
  double categorical = 1.0;
  double span = 1.0;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 16;
  int steps = 1000;
  std::uint64_t seed = 0;
  MlmMode mlm_mode = MlmMode::kOff;
  double mlm_weight = 1.0;
  double mlm_mask_prob = 0.15;
  // MLM-only steps on the auxiliary pool before fine-tuning starts.
  int mlm_warmup_steps = 0;
  std::optional<PerturbationConfig> perturbation;
  StatusMode status_mode = StatusMode::kHierarchical;
  LossWeights loss_weights;
  // Multiplies the status loss of gold-inactive instances.
  double inactive_weight = 1.0;
  int lr_warmup_steps = 100;
  double clip_norm = 1.0;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // 0 keeps only the final checkpoint.
  int checkpoint_every = 0;

  void Validate() const;
};

nlohmann::ordered_json TrainConfigToJson(const TrainConfig& c);
TrainConfig TrainConfigFromJson(const nlohmann::json& j);

struct LossBreakdown {
  double domain_bce = 0.0;
  double status_ce = 0.0;
  double categorical_ce = 0.0;
  double span_ce = 0.0;
  // Weighted sum of the four DST components.
  double dst_total = 0.0;
  double mlm = 0.0;
  // dst_total + mlm_weight * mlm.
  double total = 0.0;
  int skipped_spans = 0;
};

nlohmann::ordered_json LossBreakdownToJson(const LossBreakdown& l);

// One supervised instance: the turns up to and including a gold user turn.
struct TrainExample {
  std::vector<Turn> turns;
  BeliefState gold;
};

// Gold span of `value` in the context: last occurrence of its token sequence
// inside a single turn, never touching special tokens or splitting a word.
std::optional<std::pair<int, int>> FindSpan(const Tokenizer& tokenizer,
                                            const ContextTokens& tokens,
                                            std::string_view value);

// Loss of one batch. With `grads` set, gradients of `total` are accumulated
// into it. `mask_seed` fixes the MLM masks; `dropout_rng` enables dropout.
LossBreakdown BatchLoss(const DstModel& model, std::span<const TrainExample> batch,
                        std::span<const std::string> auxiliary,
                        const TrainConfig& config, std::uint64_t mask_seed,
                        Rng* dropout_rng, ModelWeights* grads);

// MLM-only loss over plain texts.
double MlmTextLoss(const DstModel& model, std::span<const std::string> texts,
                   double mask_prob, std::uint64_t mask_seed, Rng* dropout_rng,
                   ModelWeights* grads);

// Momentum-free adaptive optimizer (second-moment scaling with bias
// correction), linear warm-up then constant rate, global-norm clipping.
class Optimizer {
 public:
  Optimizer(const ModelWeights& like, const TrainConfig& config);
  double LearningRate(int step) const;
  // Returns the gradient norm before clipping.
  double Step(ModelWeights& weights, ModelWeights& grads);
  int steps_taken() const { return t_; }

 private:
  TrainConfig config_;
  ModelWeights second_moment_;
  int t_ = 0;
};

Tokenizer BuildVocabulary(const Corpus& train, std::span<const std::string> auxiliary);

struct StepRecord {
  int step = 0;
  std::string phase;
  double learning_rate = 0.0;
  double grad_norm = 0.0;
  LossBreakdown losses;
};

nlohmann::ordered_json StepRecordToJson(const StepRecord& r);

struct TrainHooks {
  std::function<void(const StepRecord&)> on_step;
  std::function<void(int step, const DstModel&)> on_checkpoint;
};

// Trains from scratch. Throws Error when the loss becomes non-finite.
DstModel Train(const Corpus& train, std::span<const std::string> auxiliary,
               const ModelConfig& model_config, const TrainConfig& config,
               const TrainHooks& hooks = {});

// Replaces predicted statuses by gold ones. Values are kept where both agree
// on active, requested from `value_for_slot` for slots newly active, and
// cleared elsewhere.
using ValueProvider = std::function<std::string(std::size_t slot)>;
TurnPrediction SetOracleStatuses(const TurnPrediction& prediction,
                                 const BeliefState& gold, const Schema& schema,
                                 const ValueProvider& value_for_slot);

}  // namespace dstlab

#endif  // DSTLAB_TRAINING_H_
