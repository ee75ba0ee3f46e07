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

#include "dstlab/dst_model.h"

#include <gtest/gtest.h>

#include <cmath>

#include "support/test_support.h"

namespace dstlab {
namespace {

using testing::TinyCorpus;
using testing::TinyModel;

struct Fixture {
  Corpus corpus = TinyCorpus();
  DstModel model = TinyModel(corpus);
  SchemaEncodings enc = EncodeSchema(model);
};

int FindPiece(const ContextTokens& ctx, const Tokenizer& tok, const std::string& piece,
              int turn) {
  int last = -1;
  for (int i = 0; i < ctx.length(); ++i) {
    if (ctx.turn_map[static_cast<std::size_t>(i)] == turn &&
        tok.piece(ctx.ids[static_cast<std::size_t>(i)]) == piece) {
      last = i;
    }
  }
  return last;
}

SpanPrediction SpanAt(const ContextTokens& ctx, std::span<const Turn> turns, int start,
                      int end) {
  RowVector s = RowVector::Zero(ctx.length());
  RowVector e = RowVector::Zero(ctx.length());
  s(start) = 1.0;
  e(end) = 1.0;
  return SelectSpan(s, e, ctx, turns);
}

TEST(DstModelTest, HierarchicalSkipsInactiveDomains) {
  Fixture f;
  const TurnContext ctx = EncodeTurnContext(f.model, f.corpus.dialogues[0].turns);
  StatusCallCounter counter;
  const auto statuses = PredictStatuses(f.model.weights.heads, ctx.prepared, f.model.schema,
                                        f.enc, {true, false}, StatusMode::kHierarchical,
                                        &counter);
  EXPECT_EQ(counter.calls, 2);
  EXPECT_EQ(statuses[2], SlotStatus::kInactive);
  EXPECT_EQ(statuses[3], SlotStatus::kInactive);
  StatusCallCounter flat;
  PredictStatuses(f.model.weights.heads, ctx.prepared, f.model.schema, f.enc, {true, false},
                  StatusMode::kFlat, &flat);
  EXPECT_EQ(flat.calls, 4);
}

TEST(DstModelTest, AllDomainsActiveReducesToFlat) {
  Fixture f;
  for (const Dialogue& d : f.corpus.dialogues) {
    const TurnContext ctx = EncodeTurnContext(f.model, d.turns);
    EXPECT_EQ(PredictStatuses(f.model.weights.heads, ctx.prepared, f.model.schema, f.enc,
                              {true, true}, StatusMode::kHierarchical),
              PredictStatuses(f.model.weights.heads, ctx.prepared, f.model.schema, f.enc,
                              {true, true}, StatusMode::kFlat));
  }
}

TEST(DstModelTest, DomainThresholdIsStrict) {
  RowVector logits(3);
  logits << 0.0, 1e-9, -1e-9;
  const DomainPrediction p = DomainsFromLogits(logits);
  EXPECT_EQ(p.active, (std::vector<bool>{false, true, false}));
  EXPECT_DOUBLE_EQ(p.probabilities[0], 0.5);
}

TEST(DstModelTest, ArgmaxTiesGoToLowestIndex) {
  RowVector v(4);
  v << 1.0, 3.0, 3.0, 2.0;
  EXPECT_EQ(ArgmaxLowestIndex(v), 1);
}

TEST(DstModelTest, CategoricalTiesPickFirstCandidate) {
  Fixture f;
  f.model.weights.heads.categorical_proj.setZero();
  const TurnContext ctx = EncodeTurnContext(f.model, f.corpus.dialogues[2].turns);
  EXPECT_EQ(PredictCategorical(f.model.weights.heads, ctx.prepared, f.model.schema, f.enc, 2),
            0u);
}

TEST(DstModelTest, CategoricalPicksAlignedCandidate) {
  Fixture f;
  const TurnContext ctx = EncodeTurnContext(f.model, f.corpus.dialogues[2].turns);
  const int d = f.model.config.encoder.hidden_dim;
  // One-hot candidate rows and a projection mapping z onto the second axis.
  Matrix cands = Matrix::Zero(2, d);
  cands(0, 0) = 1.0;
  cands(1, 1) = 1.0;
  f.enc.candidates[0] = cands;
  CategoricalCache cache;
  CategoricalLogits(f.model.weights.heads, ctx.prepared, f.enc.slots[0], cands, &cache);
  Matrix proj = Matrix::Zero(d, d);
  proj.col(1) = std::sqrt(static_cast<double>(d)) * cache.z.transpose() / cache.z.squaredNorm();
  f.model.weights.heads.categorical_proj = proj;
  const RowVector logits =
      CategoricalLogits(f.model.weights.heads, ctx.prepared, f.enc.slots[0], cands);
  EXPECT_NEAR(logits(0), 0.0, 1e-12);
  EXPECT_NEAR(logits(1), 1.0, 1e-12);
  const std::size_t idx =
      PredictCategorical(f.model.weights.heads, ctx.prepared, f.model.schema, f.enc, 0);
  EXPECT_EQ(f.model.schema.slot(0).candidate_values[idx], "expensive");
}

TEST(DstModelTest, CategoricalRejectsSpanSlot) {
  Fixture f;
  const TurnContext ctx = EncodeTurnContext(f.model, f.corpus.dialogues[0].turns);
  EXPECT_THROW(
      PredictCategorical(f.model.weights.heads, ctx.prepared, f.model.schema, f.enc, 1),
      Error);
}

TEST(DstModelTest, SpanExtractsTimeWithPunctuation) {
  Fixture f;
  const auto& turns = f.corpus.dialogues[1].turns;
  const ContextTokens ctx = BuildContext(f.model.tokenizer, turns, f.model.config.encoder);
  const int s = FindPiece(ctx, f.model.tokenizer, "14", 2);
  const int e = FindPiece(ctx, f.model.tokenizer, "19", 2);
  ASSERT_GE(s, 0);
  EXPECT_EQ(SpanAt(ctx, turns, s, e).value, "14:19");
}

TEST(DstModelTest, SpanExtractsMultiWordName) {
  Fixture f;
  const auto& turns = f.corpus.dialogues[0].turns;
  const ContextTokens ctx = BuildContext(f.model.tokenizer, turns, f.model.config.encoder);
  int s = -1;
  for (int i = 0; i < ctx.length(); ++i) {
    if (ctx.turn_map[static_cast<std::size_t>(i)] == 1 &&
        f.model.tokenizer.piece(ctx.ids[static_cast<std::size_t>(i)]) == "a") {
      s = i;
      break;
    }
  }
  const int e = FindPiece(ctx, f.model.tokenizer, "house", 1);
  EXPECT_EQ(SpanAt(ctx, turns, s, e).value, "a and b guest house");
}

TEST(DstModelTest, InvalidSpansAreEmpty) {
  Fixture f;
  const auto& turns = f.corpus.dialogues[1].turns;
  const ContextTokens ctx = BuildContext(f.model.tokenizer, turns, f.model.config.encoder);
  const int s = FindPiece(ctx, f.model.tokenizer, "14", 2);
  const int e = FindPiece(ctx, f.model.tokenizer, "19", 2);
  EXPECT_EQ(SpanAt(ctx, turns, e, s).value, "");
  EXPECT_EQ(SpanAt(ctx, turns, 0, e).value, "");
  EXPECT_EQ(SpanAt(ctx, turns, s, ctx.length() - 1).value, "");
  const int earlier = FindPiece(ctx, f.model.tokenizer, "14", 1);
  EXPECT_EQ(SpanAt(ctx, turns, earlier, e).value, "");
}

TEST(DstModelTest, PredictionsAreStructurallyValid) {
  Fixture f;
  for (StatusMode mode : {StatusMode::kHierarchical, StatusMode::kFlat}) {
    f.model.config.status_mode = mode;
    const auto preds = PredictCorpus(f.model, f.corpus);
    ASSERT_EQ(preds.size(), CountGoldTurns(f.corpus));
    for (const TurnPrediction& p : preds) {
      EXPECT_EQ(p.state.entries.size(), f.model.schema.num_slots());
      EXPECT_EQ(p.domain_active.size(), 2u);
      for (const auto& [slot, v] : p.state.entries) {
        const SlotSpec& spec = f.model.schema.slot(*f.model.schema.FindSlot(slot));
        if (v.status != SlotStatus::kActive) {
          EXPECT_TRUE(v.value.empty());
        } else if (spec.categorical()) {
          EXPECT_NE(std::find(spec.candidate_values.begin(), spec.candidate_values.end(),
                              v.value),
                    spec.candidate_values.end());
        }
        if (mode == StatusMode::kHierarchical &&
            !p.domain_active[f.model.schema.slot_domain(*f.model.schema.FindSlot(slot))]) {
          EXPECT_EQ(v.status, SlotStatus::kInactive);
        }
      }
    }
  }
}

TEST(DstModelTest, InferenceIsDeterministic) {
  Fixture f;
  EXPECT_EQ(PredictCorpus(f.model, f.corpus), PredictCorpus(f.model, f.corpus));
}

TEST(DstModelTest, PredictionJsonlRoundTrip) {
  Fixture f;
  const auto preds = PredictCorpus(f.model, f.corpus);
  const std::string text = PredictionsToJsonl(preds, f.model.schema);
  EXPECT_EQ(PredictionsFromJsonl(text, f.model.schema), preds);
}

TEST(DstModelTest, PredictionJsonRejectsUnknownSlot) {
  const Schema s = testing::TinySchema();
  const auto j = nlohmann::json::parse(
      R"({"dialogue_id": "x", "turn": 0, "state": {"taxi-day": {"status": "dontcare"}}})");
  EXPECT_THROW(TurnPredictionFromJson(j, s), Error);
  const auto sparse = nlohmann::json::parse(R"({"dialogue_id": "x", "turn": 0, "state": {}})");
  const TurnPrediction p = TurnPredictionFromJson(sparse, s);
  EXPECT_EQ(p.state.Get("hotel-name").status, SlotStatus::kInactive);
}

TEST(DstModelTest, ParameterCountMatchesTensors) {
  Fixture f;
  std::size_t n = 0;
  ForEachTensor(f.model.weights, [&](const std::string&, Matrix& m) {
    n += static_cast<std::size_t>(m.size());
  });
  EXPECT_EQ(ParameterCount(f.model.weights), n);
  ModelWeights z = ZerosLike(f.model.weights);
  EXPECT_EQ(ParameterCount(z), n);
}

}  // namespace
}  // namespace dstlab
