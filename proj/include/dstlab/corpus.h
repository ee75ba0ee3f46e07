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

#ifndef DSTLAB_CORPUS_H_
#define DSTLAB_CORPUS_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dstlab/schema.h"
#include "json.hpp"

namespace dstlab {

enum class Speaker { kUser, kAgent };

std::string_view SpeakerName(Speaker speaker);

struct Turn {
  Speaker speaker = Speaker::kUser;
  std::string text;
  // Added by perturbation; such turns never carry a gold state.
  bool inserted = false;
  // Present exactly on non-inserted user turns.
  std::optional<BeliefState> gold_state;

  friend bool operator==(const Turn&, const Turn&) = default;
};

struct Dialogue {
  std::string id;
  std::vector<Turn> turns;

  std::size_t num_utterances() const { return turns.size(); }
  // Number of inserted turns.
  std::size_t num_inserted() const;

  friend bool operator==(const Dialogue&, const Dialogue&) = default;
};

enum class Split { kTrain, kDev, kTest };

std::string_view SplitName(Split split);
Split ParseSplit(std::string_view name);

struct Corpus {
  Schema schema;
  std::vector<Dialogue> dialogues;
  Split split = Split::kTrain;
};

// Structural problems in a dialogue: alternation of non-inserted turns,
// gold-state placement. Empty when well formed.
std::vector<std::string> CheckDialogueStructure(const Dialogue& dialogue);

// Parses the dialogue-JSON array and validates every gold state. Errors name
// the dialogue id and, for unknown slots, the slot.
Corpus IngestDialogues(const nlohmann::json& array, const Schema& schema,
                       Split split = Split::kTest);
Corpus IngestMultiwoz(const std::filesystem::path& path, const Schema& schema,
                      Split split = Split::kTest);

nlohmann::ordered_json DialogueToJson(const Dialogue& dialogue);
nlohmann::ordered_json CorpusToJson(const Corpus& corpus);
// Canonical serialized form; used for writing and hashing.
std::string SerializeCorpus(const Corpus& corpus);
void WriteCorpus(const std::filesystem::path& path, const Corpus& corpus);
std::string CorpusHash(const Corpus& corpus);

// Total count of turns that carry a gold state.
std::size_t CountGoldTurns(const Corpus& corpus);

// Every non-inserted utterance of the corpus, in order.
std::vector<std::string> TargetUtterancePool(const Corpus& corpus);

struct AuxiliarySource {
  // Newline-delimited utterance file; takes precedence over `synthetic`.
  std::optional<std::filesystem::path> path;
  bool synthetic = true;
  std::size_t synthetic_size = 4000;
  std::uint64_t seed = 0;
  // Drop utterances that also occur (after normalization) in the target.
  bool exclude_target = true;
};

// Flat pool of utterances for continued MLM and perturbation sampling.
std::vector<std::string> AuxiliaryCorpus(const AuxiliarySource& source,
                                         const Corpus* target = nullptr);

std::vector<std::string> LoadUtteranceFile(const std::filesystem::path& path);

}  // namespace dstlab

#endif  // DSTLAB_CORPUS_H_
