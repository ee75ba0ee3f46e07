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

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "dstlab/synthetic.h"
#include "support/test_support.h"

namespace dstlab {
namespace {

std::vector<Turn> Originals(const Dialogue& d) {
  std::vector<Turn> out;
  for (const Turn& t : d.turns) {
    if (!t.inserted) out.push_back(t);
  }
  return out;
}

// Speaker of the original turn each inserted run follows.
std::vector<Speaker> AnchorSpeakers(const Dialogue& d) {
  std::vector<Speaker> out;
  std::optional<Speaker> anchor;
  for (const Turn& t : d.turns) {
    if (!t.inserted) {
      anchor = t.speaker;
    } else {
      out.push_back(*anchor);
    }
  }
  return out;
}

const std::vector<std::string> kPool = {"the weather is nice", "my flight is late",
                                        "i like movies", "banks close early"};

class PerturbationGridTest
    : public ::testing::TestWithParam<std::tuple<PositionPolicy, int>> {};

TEST_P(PerturbationGridTest, PreservesOriginalsAndObeysPolicy) {
  const auto [position, n] = GetParam();
  SynthConfig sc = DefaultSynthConfig();
  sc.num_dialogues = 60;
  const Corpus corpus = GenerateSynthetic(sc, 11);
  PerturbationConfig cfg;
  cfg.probability = 1.0;
  cfg.num_insertions = n;
  cfg.position = position;
  Rng rng(5);
  for (const Dialogue& d : corpus.dialogues) {
    const Dialogue p = PerturbDialogue(d, cfg, kPool, rng);
    EXPECT_EQ(Originals(p), d.turns);
    EXPECT_EQ(p.num_inserted(), static_cast<std::size_t>(n));
    EXPECT_TRUE(CheckDialogueStructure(p).empty()) << d.id;
    for (const Turn& t : p.turns) {
      if (!t.inserted) continue;
      EXPECT_FALSE(t.gold_state.has_value());
      EXPECT_NE(std::find(kPool.begin(), kPool.end(), t.text), kPool.end());
    }
    for (Speaker s : AnchorSpeakers(p)) {
      if (position == PositionPolicy::kAfterUserOnly) {
        EXPECT_EQ(s, Speaker::kUser);
      } else if (position == PositionPolicy::kAfterAgentOnly) {
        EXPECT_EQ(s, Speaker::kAgent);
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(
    Policies, PerturbationGridTest,
    ::testing::Combine(::testing::Values(PositionPolicy::kRandomBoundary,
                                         PositionPolicy::kAfterUserOnly,
                                         PositionPolicy::kAfterAgentOnly),
                       ::testing::Values(1, 2, 3, 4, 9)));

TEST(PerturbationTest, ZeroProbabilityIsIdentity) {
  const Corpus c = testing::TinyCorpus();
  PerturbationConfig cfg;
  cfg.probability = 0.0;
  EXPECT_EQ(SerializeCorpus(PerturbCorpus(c, cfg, kPool)), SerializeCorpus(c));
}

TEST(PerturbationTest, AgentOnlyWithoutAgentTurnsIsUnchanged) {
  const Corpus c = testing::TinyCorpus();
  PerturbationConfig cfg;
  cfg.probability = 1.0;
  cfg.position = PositionPolicy::kAfterAgentOnly;
  Rng rng(1);
  EXPECT_EQ(PerturbDialogue(c.dialogues[3], cfg, kPool, rng), c.dialogues[3]);
}

TEST(PerturbationTest, DistinctPoolUtterancesWhenPoolIsLargeEnough) {
  const Corpus c = testing::TinyCorpus();
  PerturbationConfig cfg;
  cfg.probability = 1.0;
  cfg.num_insertions = 4;
  for (int seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const Dialogue p = PerturbDialogue(c.dialogues[0], cfg, kPool, rng);
    std::set<std::string> texts;
    for (const Turn& t : p.turns) {
      if (t.inserted) texts.insert(t.text);
    }
    EXPECT_EQ(texts.size(), 4u);
  }
}

TEST(PerturbationTest, RandomWordsDrawFromVocabulary) {
  const std::vector<std::string> vocab = {"alpha", "beta", "gamma"};
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const int len = static_cast<int>(UniformInt(rng, kMinRandomWords, kMaxRandomWords));
    const std::string u = RandomWordUtterance(len, vocab, rng);
    std::size_t words = 1;
    for (char ch : u) words += ch == ' ' ? 1 : 0;
    EXPECT_EQ(words, static_cast<std::size_t>(len));
  }
  EXPECT_THROW(RandomWordUtterance(3, {}, rng), Error);
}

TEST(PerturbationTest, EmptyPoolIsAnError) {
  PerturbationConfig cfg;
  Rng rng(1);
  EXPECT_THROW(PerturbDialogue(testing::TinyCorpus().dialogues[0], cfg, {}, rng), Error);
}

TEST(PerturbationTest, InvalidConfigRejected) {
  PerturbationConfig cfg;
  cfg.probability = 1.5;
  EXPECT_THROW(cfg.Validate(), Error);
  cfg.probability = 0.5;
  cfg.num_insertions = 0;
  EXPECT_THROW(cfg.Validate(), Error);
  EXPECT_THROW(ParseSource("meena"), Error);
  EXPECT_THROW(ParsePosition("anywhere"), Error);
}

TEST(PerturbationTest, CorpusPerturbationIsDeterministic) {
  SynthConfig sc = DefaultSynthConfig();
  sc.num_dialogues = 40;
  const Corpus c = GenerateSynthetic(sc, 2);
  PerturbationConfig cfg;
  cfg.probability = 0.5;
  cfg.seed = 4;
  EXPECT_EQ(SerializeCorpus(PerturbCorpus(c, cfg, kPool)),
            SerializeCorpus(PerturbCorpus(c, cfg, kPool)));
  cfg.seed = 5;
  const std::string other = SerializeCorpus(PerturbCorpus(c, cfg, kPool));
  cfg.seed = 4;
  EXPECT_NE(SerializeCorpus(PerturbCorpus(c, cfg, kPool)), other);
}

TEST(PerturbationTest, ConfigJsonRoundTrip) {
  PerturbationConfig cfg;
  cfg.probability = 0.4;
  cfg.num_insertions = 3;
  cfg.source = InsertionSource::kRandomWords;
  cfg.position = PositionPolicy::kAfterAgentOnly;
  cfg.seed = 9;
  const PerturbationConfig back = PerturbationConfigFromJson(PerturbationConfigToJson(cfg));
  EXPECT_EQ(PerturbationConfigToJson(back), PerturbationConfigToJson(cfg));
}

}  // namespace
}  // namespace dstlab
