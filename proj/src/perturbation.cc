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

#include "dstlab/perturbation.h"

#include <algorithm>
#include <numeric>

namespace dstlab {

std::string_view SourceName(InsertionSource source) {
  switch (source) {
    case InsertionSource::kAuxiliary:
      return "auxiliary";
    case InsertionSource::kTarget:
      return "target";
    case InsertionSource::kRandomWords:
      return "random_words";
  }
  return "auxiliary";
}

InsertionSource ParseSource(std::string_view name) {
  if (name == "auxiliary") return InsertionSource::kAuxiliary;
  if (name == "target") return InsertionSource::kTarget;
  if (name == "random_words") return InsertionSource::kRandomWords;
  throw Error("unknown insertion source '" + std::string(name) + "'");
}

std::string_view PositionName(PositionPolicy policy) {
  switch (policy) {
    case PositionPolicy::kRandomBoundary:
      return "random_boundary";
    case PositionPolicy::kAfterUserOnly:
      return "after_user_only";
    case PositionPolicy::kAfterAgentOnly:
      return "after_agent_only";
  }
  return "random_boundary";
}

PositionPolicy ParsePosition(std::string_view name) {
  if (name == "random_boundary") return PositionPolicy::kRandomBoundary;
  if (name == "after_user_only") return PositionPolicy::kAfterUserOnly;
  if (name == "after_agent_only") return PositionPolicy::kAfterAgentOnly;
  throw Error("unknown position policy '" + std::string(name) + "'");
}

void PerturbationConfig::Validate() const {
  if (!(probability >= 0.0 && probability <= 1.0)) {
    throw Error("perturbation probability must lie in [0, 1]");
  }
  if (num_insertions < 1) throw Error("num_insertions must be >= 1");
}

nlohmann::ordered_json PerturbationConfigToJson(const PerturbationConfig& c) {
  nlohmann::ordered_json j;
  j["probability"] = c.probability;
  j["num_insertions"] = c.num_insertions;
  j["source"] = SourceName(c.source);
  j["position"] = PositionName(c.position);
  j["seed"] = c.seed;
  return j;
}

PerturbationConfig PerturbationConfigFromJson(const nlohmann::json& j) {
  PerturbationConfig c;
  try {
    c.probability = j.value("probability", c.probability);
    c.num_insertions = j.value("num_insertions", c.num_insertions);
    if (j.contains("source")) c.source = ParseSource(j.at("source").get<std::string>());
    if (j.contains("position")) {
      c.position = ParsePosition(j.at("position").get<std::string>());
    }
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed perturbation config: ") + e.what());
  }
  c.Validate();
  return c;
}

std::string RandomWordUtterance(int length, std::span<const std::string> vocab,
                                Rng& rng) {
  if (vocab.empty()) throw Error("random-word vocabulary is empty");
  if (length < 1) throw Error("random-word utterance length must be >= 1");
  std::string out;
  for (int i = 0; i < length; ++i) {
    if (i > 0) out.push_back(' ');
    out += vocab[static_cast<std::size_t>(
        UniformInt(rng, 0, static_cast<std::int64_t>(vocab.size()) - 1))];
  }
  return out;
}

Dialogue PerturbDialogue(const Dialogue& dialogue, const PerturbationConfig& cfg,
                         std::span<const std::string> pool, Rng& rng) {
  cfg.Validate();
  if (pool.empty()) {
    throw Error(cfg.source == InsertionSource::kRandomWords
                    ? "random-word vocabulary is empty"
                    : "perturbation utterance pool is empty");
  }
  if (!Bernoulli(rng, cfg.probability)) return dialogue;

  // Boundary k means "right after input turn k".
  std::vector<std::size_t> permitted;
  for (std::size_t k = 0; k < dialogue.turns.size(); ++k) {
    const Turn& t = dialogue.turns[k];
    switch (cfg.position) {
      case PositionPolicy::kRandomBoundary:
        permitted.push_back(k);
        break;
      case PositionPolicy::kAfterUserOnly:
        if (!t.inserted && t.speaker == Speaker::kUser) permitted.push_back(k);
        break;
      case PositionPolicy::kAfterAgentOnly:
        if (!t.inserted && t.speaker == Speaker::kAgent) permitted.push_back(k);
        break;
    }
  }
  if (permitted.empty()) return dialogue;

  const auto n = static_cast<std::size_t>(cfg.num_insertions);
  // Distinct boundaries while they last, then with replacement.
  std::vector<std::size_t> chosen = permitted;
  std::shuffle(chosen.begin(), chosen.end(), rng);
  chosen.resize(std::min(n, chosen.size()));
  while (chosen.size() < n) {
    chosen.push_back(permitted[static_cast<std::size_t>(UniformInt(
        rng, 0, static_cast<std::int64_t>(permitted.size()) - 1))]);
  }

  std::vector<std::string> texts;
  if (cfg.source == InsertionSource::kRandomWords) {
    for (std::size_t i = 0; i < n; ++i) {
      const int len =
          static_cast<int>(UniformInt(rng, kMinRandomWords, kMaxRandomWords));
      texts.push_back(RandomWordUtterance(len, pool, rng));
    }
  } else if (pool.size() >= n) {
    std::vector<std::size_t> idx(pool.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    // Partial Fisher-Yates: first n entries become a sample without
    // replacement.
    for (std::size_t i = 0; i < n; ++i) {
      const auto j = static_cast<std::size_t>(UniformInt(
          rng, static_cast<std::int64_t>(i),
          static_cast<std::int64_t>(idx.size()) - 1));
      std::swap(idx[i], idx[j]);
      texts.push_back(pool[idx[i]]);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      texts.push_back(pool[static_cast<std::size_t>(UniformInt(
          rng, 0, static_cast<std::int64_t>(pool.size()) - 1))]);
    }
  }

  std::vector<std::vector<std::string>> at(dialogue.turns.size());
  for (std::size_t i = 0; i < n; ++i) at[chosen[i]].push_back(std::move(texts[i]));

  Dialogue out;
  out.id = dialogue.id;
  out.turns.reserve(dialogue.turns.size() + n);
  for (std::size_t k = 0; k < dialogue.turns.size(); ++k) {
    const Turn& original = dialogue.turns[k];
    out.turns.push_back(original);
    Speaker previous = original.speaker;
    for (std::string& text : at[k]) {
      Turn t;
      t.inserted = true;
      t.text = std::move(text);
      if (cfg.position == PositionPolicy::kRandomBoundary) {
        t.speaker = Bernoulli(rng, 0.5) ? Speaker::kUser : Speaker::kAgent;
      } else {
        t.speaker = previous == Speaker::kUser ? Speaker::kAgent : Speaker::kUser;
      }
      previous = t.speaker;
      out.turns.push_back(std::move(t));
    }
  }
  return out;
}

std::vector<Dialogue> PerturbBatch(std::span<const Dialogue> batch,
                                   const PerturbationConfig& cfg,
                                   std::span<const std::string> pool, Rng& rng) {
  std::vector<Dialogue> out;
  out.reserve(batch.size());
  for (const Dialogue& d : batch) {
    Rng sub(rng());
    out.push_back(PerturbDialogue(d, cfg, pool, sub));
  }
  return out;
}

Corpus PerturbCorpus(const Corpus& corpus, const PerturbationConfig& cfg,
                     std::span<const std::string> pool) {
  Corpus out;
  out.schema = corpus.schema;
  out.split = corpus.split;
  out.dialogues.reserve(corpus.dialogues.size());
  for (const Dialogue& d : corpus.dialogues) {
    Rng rng = MakeRng(cfg.seed, d.id);
    out.dialogues.push_back(PerturbDialogue(d, cfg, pool, rng));
  }
  return out;
}

}  // namespace dstlab
