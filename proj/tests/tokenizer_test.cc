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

#include "dstlab/tokenizer.h"

#include <gtest/gtest.h>

#include "dstlab/synthetic.h"
#include "dstlab/training.h"
#include "support/test_support.h"

namespace dstlab {
namespace {

TEST(TokenizerTest, EmptyTextHasNoTokens) {
  const Tokenizer tok = Tokenizer::Build(std::vector<std::string>{"a b"});
  EXPECT_TRUE(tok.Encode("").empty());
  EXPECT_TRUE(tok.Encode("   ").empty());
}

TEST(TokenizerTest, RepeatedWordsShareAnId) {
  const Tokenizer tok = Tokenizer::Build(std::vector<std::string>{"a a"});
  const auto ids = tok.Encode("a a");
  ASSERT_EQ(ids.size(), 2u);
  EXPECT_EQ(ids[0], ids[1]);
  EXPECT_FALSE(Tokenizer::IsSpecial(ids[0]));
}

TEST(TokenizerTest, SpecialsAreReserved) {
  const Tokenizer tok;
  EXPECT_EQ(tok.size(), kNumSpecialTokens);
  EXPECT_EQ(tok.piece(kClsId), "[CLS]");
  EXPECT_EQ(tok.piece(kSepId), "[SEP]");
  EXPECT_EQ(tok.piece(kMaskId), "[MASK]");
}

TEST(TokenizerTest, OffsetsCoverSourceBytes) {
  const Tokenizer tok = Tokenizer::Build(std::vector<std::string>{"leave at 15:15 please"});
  const std::string text = "Leave at 15:15, please!";
  for (const Token& t : tok.EncodeWithOffsets(text)) {
    ASSERT_LT(t.begin, t.end);
    ASSERT_LE(t.end, text.size());
  }
  const auto toks = tok.EncodeWithOffsets(text);
  EXPECT_EQ(text.substr(toks.front().begin, toks.front().end - toks.front().begin), "Leave");
}

TEST(TokenizerTest, DecodeReproducesNormalizedText) {
  const std::vector<std::string> texts = {"I need a CHEAP hotel, near the centre."};
  const Tokenizer tok = Tokenizer::Build(texts);
  EXPECT_EQ(tok.Decode(tok.Encode(texts[0])), NormalizeForTokens(texts[0]));
}

TEST(TokenizerTest, UnseenWordsDecomposeIntoPieces) {
  const Tokenizer tok = Tokenizer::Build(std::vector<std::string>{"abc"});
  const auto ids = tok.Encode("cab");
  EXPECT_EQ(ids.size(), 3u);
  for (int id : ids) EXPECT_NE(id, kUnkId);
  EXPECT_EQ(tok.Decode(ids), "cab");
}

TEST(TokenizerTest, VocabTextRoundTrip) {
  const Tokenizer tok = Tokenizer::Build(std::vector<std::string>{"hotel in the north"});
  const Tokenizer back = Tokenizer::FromVocabText(tok.VocabText());
  EXPECT_EQ(back.VocabText(), tok.VocabText());
  EXPECT_EQ(back.Encode("the north hotel"), tok.Encode("the north hotel"));
}

TEST(TokenizerTest, SyntheticCorpusHasNoUnknownTokens) {
  SynthConfig sc = DefaultSynthConfig();
  sc.num_dialogues = 200;
  const Corpus c = GenerateSynthetic(sc, 1);
  const Tokenizer tok = BuildVocabulary(c, {});
  for (const Dialogue& d : c.dialogues) {
    for (const Turn& t : d.turns) {
      for (int id : tok.Encode(t.text)) ASSERT_NE(id, kUnkId) << t.text;
    }
  }
}

}  // namespace
}  // namespace dstlab
