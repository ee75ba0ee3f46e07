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

#include "dstlab/corpus.h"

#include <set>
#include <sstream>

#include "dstlab/synthetic.h"

namespace dstlab {

std::string_view SpeakerName(Speaker speaker) {
  return speaker == Speaker::kUser ? "user" : "agent";
}

std::size_t Dialogue::num_inserted() const {
  std::size_t n = 0;
  for (const Turn& t : turns) n += t.inserted ? 1 : 0;
  return n;
}

std::string_view SplitName(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kDev:
      return "dev";
    case Split::kTest:
      return "test";
  }
  return "test";
}

Split ParseSplit(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "dev") return Split::kDev;
  if (name == "test") return Split::kTest;
  throw Error("unknown split '" + std::string(name) + "'");
}

std::vector<std::string> CheckDialogueStructure(const Dialogue& dialogue) {
  std::vector<std::string> problems;
  Speaker expected = Speaker::kUser;
  for (std::size_t i = 0; i < dialogue.turns.size(); ++i) {
    const Turn& t = dialogue.turns[i];
    const std::string where =
        "dialogue '" + dialogue.id + "' turn " + std::to_string(i);
    if (t.inserted) {
      if (t.gold_state) problems.push_back(where + ": inserted turn has state");
      continue;
    }
    if (t.speaker != expected) {
      problems.push_back(where + ": expected " +
                         std::string(SpeakerName(expected)) + " turn");
    }
    expected = t.speaker == Speaker::kUser ? Speaker::kAgent : Speaker::kUser;
    if (t.speaker == Speaker::kUser && !t.gold_state) {
      problems.push_back(where + ": user turn without state");
    }
    if (t.speaker == Speaker::kAgent && t.gold_state) {
      problems.push_back(where + ": agent turn carries a state");
    }
  }
  return problems;
}

Corpus IngestDialogues(const nlohmann::json& array, const Schema& schema,
                       Split split) {
  if (!array.is_array()) throw Error("dialogue file must hold a JSON array");
  Corpus corpus;
  corpus.schema = schema;
  corpus.split = split;
  corpus.dialogues.reserve(array.size());
  for (std::size_t k = 0; k < array.size(); ++k) {
    const auto& jd = array[k];
    std::string id = "#" + std::to_string(k);
    try {
      id = jd.at("id").get<std::string>();
      Dialogue d;
      d.id = id;
      for (const auto& jt : jd.at("turns")) {
        Turn t;
        const std::string speaker = jt.at("speaker").get<std::string>();
        if (speaker == "user") {
          t.speaker = Speaker::kUser;
        } else if (speaker == "agent" || speaker == "system") {
          t.speaker = Speaker::kAgent;
        } else {
          throw Error("unknown speaker '" + speaker + "'");
        }
        t.text = jt.at("text").get<std::string>();
        t.inserted = jt.value("inserted", false);
        if (jt.contains("state") && !jt.at("state").is_null()) {
          t.gold_state = BeliefStateFromJson(jt.at("state"));
        }
        d.turns.push_back(std::move(t));
      }
      auto problems = CheckDialogueStructure(d);
      if (!problems.empty()) throw Error(problems.front());
      for (const Turn& t : d.turns) {
        if (!t.gold_state) continue;
        auto violations = ValidateState(schema, *t.gold_state);
        if (!violations.empty()) throw Error(violations.front());
      }
      corpus.dialogues.push_back(std::move(d));
    } catch (const nlohmann::json::exception& e) {
      throw Error("malformed dialogue '" + id + "': " + e.what());
    } catch (const Error& e) {
      throw Error("dialogue '" + id + "': " + e.what());
    }
  }
  return corpus;
}

Corpus IngestMultiwoz(const std::filesystem::path& path, const Schema& schema,
                      Split split) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ReadFile(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error("cannot parse '" + path.string() + "': " + e.what());
  }
  return IngestDialogues(j, schema, split);
}

nlohmann::ordered_json DialogueToJson(const Dialogue& dialogue) {
  nlohmann::ordered_json jd;
  jd["id"] = dialogue.id;
  jd["turns"] = nlohmann::ordered_json::array();
  for (const Turn& t : dialogue.turns) {
    nlohmann::ordered_json jt;
    jt["speaker"] = SpeakerName(t.speaker);
    jt["text"] = t.text;
    jt["inserted"] = t.inserted;
    if (t.gold_state) jt["state"] = BeliefStateToJson(*t.gold_state);
    jd["turns"].push_back(std::move(jt));
  }
  return jd;
}

nlohmann::ordered_json CorpusToJson(const Corpus& corpus) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const Dialogue& d : corpus.dialogues) j.push_back(DialogueToJson(d));
  return j;
}

std::string SerializeCorpus(const Corpus& corpus) {
  return CorpusToJson(corpus).dump(1) + "\n";
}

void WriteCorpus(const std::filesystem::path& path, const Corpus& corpus) {
  WriteFile(path, SerializeCorpus(corpus));
}

std::string CorpusHash(const Corpus& corpus) {
  return Sha256Hex(SerializeCorpus(corpus));
}

std::size_t CountGoldTurns(const Corpus& corpus) {
  std::size_t n = 0;
  for (const Dialogue& d : corpus.dialogues) {
    for (const Turn& t : d.turns) n += t.gold_state ? 1 : 0;
  }
  return n;
}

std::vector<std::string> TargetUtterancePool(const Corpus& corpus) {
  std::vector<std::string> pool;
  for (const Dialogue& d : corpus.dialogues) {
    for (const Turn& t : d.turns) {
      if (!t.inserted) pool.push_back(t.text);
    }
  }
  return pool;
}

std::vector<std::string> LoadUtteranceFile(const std::filesystem::path& path) {
  std::istringstream in(ReadFile(path));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!NormalizeValue(line).empty()) lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> AuxiliaryCorpus(const AuxiliarySource& source,
                                         const Corpus* target) {
  std::vector<std::string> pool;
  if (source.path) {
    pool = LoadUtteranceFile(*source.path);
  } else if (source.synthetic) {
    pool = GenerateAuxiliaryUtterances(source.synthetic_size, source.seed);
  }
  if (target != nullptr && source.exclude_target) {
    std::set<std::string> seen;
    for (const std::string& u : TargetUtterancePool(*target)) {
      seen.insert(NormalizeValue(u));
    }
    std::erase_if(pool, [&](const std::string& u) {
      return seen.count(NormalizeValue(u)) > 0;
    });
  }
  if (pool.empty()) throw Error("auxiliary utterance pool is empty");
  return pool;
}

}  // namespace dstlab
