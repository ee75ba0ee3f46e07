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

#ifndef DSTLAB_SYNTHETIC_H_
#define DSTLAB_SYNTHETIC_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dstlab/corpus.h"
#include "dstlab/schema.h"
#include "json.hpp"

namespace dstlab {

// Phrase templates for the synthetic generator. Placeholders: {value},
// {label}. Keys of the per-slot / per-domain maps are schema names.
struct TemplateBank {
  std::map<std::string, std::vector<std::string>> domain_intro;
  std::map<std::string, std::vector<std::string>> slot_inform;
  std::vector<std::string> generic_inform;
  std::vector<std::string> dontcare;
  std::vector<std::string> revision;
  std::vector<std::string> chitchat;
  std::vector<std::string> agent_request;
  // Slots an agent may propose a value for (the user may then accept it).
  std::map<std::string, std::vector<std::string>> agent_offer;
  std::vector<std::string> agent_generic;
  std::vector<std::string> user_accept;
  std::vector<std::string> user_reject;
  // Human-readable slot labels; defaults derived from the slot name.
  std::map<std::string, std::string> labels;

  bool empty() const;
};

struct SynthConfig {
  std::size_t num_dialogues = 2000;
  Schema schema;
  // Candidate surface values for each non-categorical slot.
  std::map<std::string, std::vector<std::string>> value_pools;
  int min_user_turns = 1;
  int max_user_turns = 7;
  double domain_switch_prob = 0.4;
  double chitchat_prob = 0.15;
  double dontcare_prob = 0.05;
  double revision_prob = 0.06;
  double offer_prob = 0.35;
  double accept_prob = 0.7;
  double train_fraction = 0.8;
  double dev_fraction = 0.1;
  TemplateBank templates;
};

Schema DefaultSynthSchema();
SynthConfig DefaultSynthConfig();

nlohmann::ordered_json SynthConfigToJson(const SynthConfig& config);
// `base_dir` resolves a relative "schema" path. Missing fields keep the
// defaults, so a sidecar only needs to list what it overrides.
SynthConfig SynthConfigFromJson(const nlohmann::json& j,
                                const std::filesystem::path& base_dir = {});

// Deterministic in (config, seed). Dialogue ids are "synth-<seed>-<index>".
Corpus GenerateSynthetic(const SynthConfig& config, std::uint64_t seed);

struct CorpusSplits {
  Corpus train;
  Corpus dev;
  Corpus test;
};

// Contiguous split by the configured fractions; ids stay disjoint.
CorpusSplits SplitCorpus(const Corpus& corpus, double train_fraction,
                         double dev_fraction);

// Task-oriented utterances from domains outside the target schema (flights,
// movies, banking, ...) plus general chit-chat.
std::vector<std::string> GenerateAuxiliaryUtterances(std::size_t count,
                                                     std::uint64_t seed);

}  // namespace dstlab

#endif  // DSTLAB_SYNTHETIC_H_
