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

#include <gtest/gtest.h>

#include "support/test_support.h"

namespace dstlab {
namespace {

using testing::TinyCorpus;
using testing::TinySchema;

nlohmann::json OneDialogue(const std::string& first_speaker) {
  return nlohmann::json::parse(R"([{"id": "d-1", "turns": [
    {"speaker": ")" + first_speaker + R"(", "text": "hi", "state": {}}]}])");
}

TEST(CorpusTest, SerializationRoundTrips) {
  const Corpus c = TinyCorpus();
  const Corpus back = IngestDialogues(CorpusToJson(c), c.schema, Split::kTrain);
  EXPECT_EQ(back.dialogues, c.dialogues);
  EXPECT_EQ(CorpusHash(back), CorpusHash(c));
}

TEST(CorpusTest, RejectsAgentFirstNamingDialogue) {
  try {
    IngestDialogues(OneDialogue("agent"), TinySchema());
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("d-1"), std::string::npos);
  }
}

TEST(CorpusTest, RejectsUserTurnWithoutState) {
  const auto j = nlohmann::json::parse(
      R"([{"id": "d-2", "turns": [{"speaker": "user", "text": "hi"}]}])");
  EXPECT_THROW(IngestDialogues(j, TinySchema()), Error);
}

TEST(CorpusTest, RejectsUnknownSlotNamingIt) {
  const auto j = nlohmann::json::parse(R"([{"id": "d-3", "turns": [
    {"speaker": "user", "text": "hi",
     "state": {"taxi-day": {"status": "active", "value": "x"}}}]}])");
  try {
    IngestDialogues(j, TinySchema());
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("taxi-day"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("d-3"), std::string::npos);
  }
}

TEST(CorpusTest, InsertedTurnsMayNotCarryState) {
  Dialogue d = TinyCorpus().dialogues[0];
  Turn t;
  t.inserted = true;
  t.text = "noise";
  d.turns.insert(d.turns.begin() + 1, t);
  EXPECT_TRUE(CheckDialogueStructure(d).empty());
  d.turns[1].gold_state = BeliefState{};
  EXPECT_FALSE(CheckDialogueStructure(d).empty());
}

TEST(CorpusTest, CountsGoldTurns) {
  EXPECT_EQ(CountGoldTurns(TinyCorpus()), 6u);
}

TEST(CorpusTest, AuxiliaryPoolExcludesTargetUtterances) {
  const Corpus c = TinyCorpus();
  const auto dir = testing::TempDir("aux");
  WriteFile(dir / "aux.txt", "I need a CHEAP hotel .\nthe weather is nice\n\n");
  AuxiliarySource src;
  src.path = dir / "aux.txt";
  const auto pool = AuxiliaryCorpus(src, &c);
  EXPECT_EQ(pool, std::vector<std::string>{"the weather is nice"});

  WriteFile(dir / "only_target.txt", "i need a cheap hotel .\n");
  src.path = dir / "only_target.txt";
  EXPECT_THROW(AuxiliaryCorpus(src, &c), Error);
}

TEST(CorpusTest, SyntheticAuxiliaryPoolIsDeterministic) {
  AuxiliarySource src;
  src.synthetic_size = 50;
  src.seed = 3;
  EXPECT_EQ(AuxiliaryCorpus(src), AuxiliaryCorpus(src));
  EXPECT_FALSE(AuxiliaryCorpus(src).empty());
}

}  // namespace
}  // namespace dstlab
