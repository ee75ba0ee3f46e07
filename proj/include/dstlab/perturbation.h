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

#ifndef DSTLAB_PERTURBATION_H_
#define DSTLAB_PERTURBATION_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dstlab/corpus.h"
#include "dstlab/rng.h"
#include "json.hpp"

namespace dstlab {

enum class InsertionSource { kAuxiliary, kTarget, kRandomWords };
enum class PositionPolicy { kRandomBoundary, kAfterUserOnly, kAfterAgentOnly };

std::string_view SourceName(InsertionSource source);
InsertionSource ParseSource(std::string_view name);
std::string_view PositionName(PositionPolicy policy);
PositionPolicy ParsePosition(std::string_view name);

// Utterance-insertion settings. Defaults are the best-performing setup:
// two auxiliary utterances at random boundaries for 20% of examples.
struct PerturbationConfig {
  double probability = 0.2;
  int num_insertions = 2;
  InsertionSource source = InsertionSource::kAuxiliary;
  PositionPolicy position = PositionPolicy::kRandomBoundary;
  std::uint64_t seed = 0;

  void Validate() const;
};

nlohmann::ordered_json PerturbationConfigToJson(const PerturbationConfig& c);
PerturbationConfig PerturbationConfigFromJson(const nlohmann::json& j);

inline constexpr int kMinRandomWords = 4;
inline constexpr int kMaxRandomWords = 16;

// `length` whitespace-joined tokens drawn uniformly from `vocab`.
std::string RandomWordUtterance(int length, std::span<const std::string> vocab,
                                Rng& rng);

// With probability cfg.probability inserts cfg.num_insertions distractor
// turns after original turns permitted by the position policy. `pool` holds
// utterances, or vocabulary words when the source is kRandomWords. Original
// turns keep their order and content; inserted turns carry no gold state.
// A dialogue without any permitted boundary is returned unchanged.
Dialogue PerturbDialogue(const Dialogue& dialogue, const PerturbationConfig& cfg,
                         std::span<const std::string> pool, Rng& rng);

// Independent PerturbDialogue per example, each on a sub-stream drawn from
// `rng`.
std::vector<Dialogue> PerturbBatch(std::span<const Dialogue> batch,
                                   const PerturbationConfig& cfg,
                                   std::span<const std::string> pool, Rng& rng);

// Perturbs every dialogue of a corpus on a sub-stream derived from
// (cfg.seed, dialogue id).
Corpus PerturbCorpus(const Corpus& corpus, const PerturbationConfig& cfg,
                     std::span<const std::string> pool);

}  // namespace dstlab

#endif  // DSTLAB_PERTURBATION_H_
