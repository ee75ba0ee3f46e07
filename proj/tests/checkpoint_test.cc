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

#include "dstlab/checkpoint.h"

#include <gtest/gtest.h>

#include "support/test_support.h"

namespace dstlab {
namespace {

TEST(CheckpointTest, RoundTripPreservesPredictions) {
  const Corpus c = testing::TinyCorpus();
  const DstModel m = testing::TinyModel(c, 5);
  const auto path = testing::TempDir("ckpt") / "model.ckpt";
  SaveModel(path, m, {{"step", 12}});
  nlohmann::json meta;
  const DstModel back = LoadModel(path, &meta);
  EXPECT_EQ(meta.at("step"), 12);
  EXPECT_EQ(back.schema, m.schema);
  EXPECT_EQ(back.tokenizer.VocabText(), m.tokenizer.VocabText());
  EXPECT_EQ(SerializeModel(back), SerializeModel(m));
  EXPECT_EQ(PredictCorpus(back, c), PredictCorpus(m, c));
}

TEST(CheckpointTest, RejectsCorruptInput) {
  const DstModel m = testing::TinyModel(testing::TinyCorpus());
  std::string bytes = SerializeModel(m);
  EXPECT_THROW(DeserializeModel(bytes.substr(0, bytes.size() - 8)), Error);
  EXPECT_THROW(DeserializeModel("not a checkpoint"), Error);
  bytes[0] = 'X';
  EXPECT_THROW(DeserializeModel(bytes), Error);
}

}  // namespace
}  // namespace dstlab
