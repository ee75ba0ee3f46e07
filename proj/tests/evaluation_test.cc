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

#include "dstlab/evaluation.h"

#include <gtest/gtest.h>

#include "support/metric_oracle.h"
#include "support/test_support.h"

namespace dstlab {
namespace {

using testing::BruteForceMetrics;
using testing::CompareWithOracle;
using testing::TinyCorpus;

TurnPrediction FromGold(const std::string& id, int turn, const BeliefState& gold) {
  TurnPrediction p;
  p.dialogue_id = id;
  p.turn_index = turn;
  p.state = gold;
  return p;
}

std::vector<TurnPrediction> GoldPredictions(const Corpus& c) {
  std::vector<TurnPrediction> out;
  for (const GoldTurnRef& r : GoldTurns(c)) {
    const Dialogue& d = c.dialogues[r.dialogue];
    out.push_back(FromGold(d.id, static_cast<int>(r.turn), *d.turns[r.turn].gold_state));
  }
  return out;
}

Corpus CorpusWithLengths(const std::vector<int>& lengths) {
  Corpus c;
  c.schema = testing::TinySchema();
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    std::vector<std::string> texts;
    std::vector<testing::StateSpec> states;
    for (int t = 0; t < lengths[i]; ++t) {
      texts.push_back("turn");
      if (t % 2 == 0) states.push_back({});
    }
    c.dialogues.push_back(testing::MakeDialogue("len-" + std::to_string(i), texts, states));
  }
  return c;
}

double Expected(const nlohmann::json& pair) {
  return pair[0].get<double>() / pair[1].get<double>();
}

TEST(EvaluationTest, FixtureMatchesBruteForceOracle) {
  const auto f = testing::LoadMetricFixture();
  ASSERT_EQ(f.corpus.dialogues.size(), 50u);
  const EvalReport r = EvaluatePredictions(f.predictions, f.corpus);
  const auto diffs = CompareWithOracle(r, BruteForceMetrics(f.predictions, f.corpus));
  EXPECT_TRUE(diffs.empty()) << diffs.front();
}

TEST(EvaluationTest, FixtureMatchesRecordedExpectations) {
  const auto f = testing::LoadMetricFixture();
  const EvalReport r = EvaluatePredictions(f.predictions, f.corpus);
  const auto& e = f.expected;
  EXPECT_EQ(r.thresholds.short_max_utts, e["thresholds"]["short_max_utts"].get<int>());
  EXPECT_EQ(r.thresholds.long_min_utts, e["thresholds"]["long_min_utts"].get<int>());
  const std::pair<const BucketMetrics*, const char*> buckets[] = {
      {&r.all, "all"}, {&r.short_bucket, "short"}, {&r.long_bucket, "long"}};
  for (const auto& [m, name] : buckets) {
    const auto& b = e[name];
    EXPECT_EQ(*m->jga, Expected(b["jga"])) << name;
    EXPECT_EQ(*m->components.status, Expected(b["status"])) << name;
    EXPECT_EQ(*m->components.categorical, Expected(b["categorical"])) << name;
    EXPECT_EQ(*m->components.noncategorical, Expected(b["noncategorical"])) << name;
    EXPECT_EQ(m->dialogues, b["dialogues"].get<std::size_t>()) << name;
    EXPECT_EQ(m->turns, b["turns"].get<std::size_t>()) << name;
  }
  EXPECT_EQ(JointGoalAccuracy(f.predictions, f.corpus), *r.all.jga);
}

TEST(EvaluationTest, PerfectPredictionsScoreOne) {
  const Corpus c = TinyCorpus();
  const EvalReport r = EvaluatePredictions(GoldPredictions(c), c);
  EXPECT_EQ(*r.all.jga, 1.0);
  EXPECT_EQ(*r.all.components.status, 1.0);
}

TEST(EvaluationTest, OneWrongSpanOutOfFour) {
  Corpus c = TinyCorpus();
  c.dialogues.push_back(testing::MakeDialogue("tiny-4", {"the avalon please ."},
                                              {{{"hotel-name", "avalon"}}}));
  auto preds = GoldPredictions(c);
  // Gold-active span instances: tiny-0 turn 2, tiny-1 turns 0 and 2, tiny-4.
  preds[3].state.Set("train-leaveat", SlotStatus::kActive, "15:15");
  const EvalReport r = EvaluatePredictions(preds, c);
  EXPECT_EQ(*r.all.components.noncategorical, 0.75);
  EXPECT_EQ(*r.all.jga, 6.0 / 7.0);
}

TEST(EvaluationTest, ValueComparisonIgnoresCaseAndSpacing) {
  const Corpus c = TinyCorpus();
  auto preds = GoldPredictions(c);
  preds[1].state.Set("hotel-name", SlotStatus::kActive, "  A and B   Guest House ");
  EXPECT_EQ(JointGoalAccuracy(preds, c), 1.0);
}

TEST(EvaluationTest, DontCareValueIsNotCompared) {
  const Corpus c = TinyCorpus();
  auto preds = GoldPredictions(c);
  preds[4].state.Set("train-day", SlotStatus::kDontCare, "friday");
  EXPECT_EQ(JointGoalAccuracy(preds, c), 1.0);
  preds[4].state.Set("train-day", SlotStatus::kActive, "friday");
  EXPECT_EQ(JointGoalAccuracy(preds, c), 5.0 / 6.0);
}

TEST(EvaluationTest, MissingPredictionNamesTheTurn) {
  const Corpus c = TinyCorpus();
  auto preds = GoldPredictions(c);
  preds.erase(preds.begin() + 2);
  try {
    EvaluatePredictions(preds, c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("(tiny-1, 0)"), std::string::npos) << e.what();
  }
}

TEST(EvaluationTest, ThresholdsForLengthsOneToTen) {
  const Corpus c = CorpusWithLengths({7, 3, 10, 1, 5, 2, 9, 4, 8, 6});
  const BucketThresholds t = ComputeBucketThresholds(c);
  EXPECT_EQ(t.short_max_utts, 3);
  EXPECT_EQ(t.long_min_utts, 8);
  EXPECT_FALSE(t.degenerate);
  const auto o = BruteForceMetrics(GoldPredictions(c), c);
  EXPECT_EQ(o.short_max, 3);
  EXPECT_EQ(o.long_min, 8);
}

TEST(EvaluationTest, ThresholdsMatchBruteForceOnRandomLengths) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> lengths(static_cast<std::size_t>(UniformInt(rng, 1, 40)));
    for (int& l : lengths) l = static_cast<int>(UniformInt(rng, 1, 12));
    const Corpus c = CorpusWithLengths(lengths);
    const BucketThresholds t = ComputeBucketThresholds(c);
    const auto o = BruteForceMetrics(GoldPredictions(c), c);
    ASSERT_EQ(t.short_max_utts, o.short_max) << trial;
    ASSERT_EQ(t.long_min_utts, o.long_min) << trial;
  }
}

TEST(EvaluationTest, EqualLengthsAreDegenerate) {
  const Corpus c = CorpusWithLengths({4, 4, 4, 4});
  const EvalReport r = EvaluatePredictions(GoldPredictions(c), c);
  EXPECT_TRUE(r.thresholds.degenerate);
  EXPECT_EQ(r.short_bucket.dialogues, 4u);
  EXPECT_EQ(r.long_bucket.dialogues, 4u);
}

TEST(EvaluationTest, MultiwozShapedLengthsGiveFiveAndEleven) {
  std::vector<int> lengths;
  const std::pair<int, int> shape[] = {{3, 100}, {5, 250}, {7, 150}, {9, 150}, {11, 60},
                                       {13, 90}, {15, 80}, {17, 60}, {19, 40}, {21, 20}};
  for (const auto& [len, count] : shape) lengths.insert(lengths.end(), count, len);
  const BucketThresholds t = ComputeBucketThresholds(CorpusWithLengths(lengths));
  EXPECT_EQ(t.short_max_utts, 5);
  EXPECT_EQ(t.long_min_utts, 11);
}

TEST(EvaluationTest, AllInactivePredictionsScoreInactiveSlots) {
  const Corpus c = TinyCorpus();
  std::vector<TurnPrediction> preds;
  for (const GoldTurnRef& r : GoldTurns(c)) {
    preds.push_back(FromGold(c.dialogues[r.dialogue].id, static_cast<int>(r.turn), {}));
  }
  const EvalReport rep = EvaluatePredictions(preds, c);
  // 6 turns x 4 slots; 9 gold non-inactive instances.
  EXPECT_EQ(*rep.all.components.status, 15.0 / 24.0);
  EXPECT_EQ(*rep.all.components.categorical, 0.0);
  EXPECT_EQ(*rep.all.jga, 1.0 / 6.0);
  EXPECT_EQ(*rep.all_inactive_jga, 1.0 / 6.0);
}

TEST(EvaluationTest, EmptyDenominatorsAreAbsent) {
  Corpus c = TinyCorpus();
  c.dialogues = {c.dialogues[3]};
  const EvalReport r = EvaluatePredictions(GoldPredictions(c), c);
  EXPECT_FALSE(r.all.components.categorical.has_value());
  EXPECT_FALSE(r.all.components.noncategorical.has_value());
  EXPECT_TRUE(r.all.components.status.has_value());
}

TEST(EvaluationTest, ModelEvaluationIsDeterministicAndOracleDominates) {
  const Corpus c = TinyCorpus();
  const DstModel m = testing::TinyModel(c, 4);
  const ModelEvaluation a = EvaluateModel(m, c);
  const ModelEvaluation b = EvaluateModel(m, c);
  EXPECT_EQ(EvalReportToJson(a.report).dump(), EvalReportToJson(b.report).dump());
  EXPECT_GE(*a.report.oracle_jga, *a.report.all.jga);
  const EvalReport oracle = EvaluatePredictions(a.oracle_predictions, c);
  EXPECT_EQ(*oracle.all.components.status, 1.0);
}

TEST(EvaluationTest, ReportJsonRoundTrip) {
  const auto f = testing::LoadMetricFixture();
  EvalReport r = EvaluatePredictions(f.predictions, f.corpus);
  r.oracle_jga = 0.9;
  r.config_hash = "abc";
  EXPECT_EQ(EvalReportToJson(EvalReportFromJson(EvalReportToJson(r))).dump(),
            EvalReportToJson(r).dump());
}

EvalReport Report(double s, double l, double a, const std::string& hash = "h") {
  EvalReport r;
  r.short_bucket.jga = s;
  r.long_bucket.jga = l;
  r.all.jga = a;
  r.corpus_hash = hash;
  return r;
}

TEST(EvaluationTest, CompareComputesRelativeGains) {
  const auto rows = CompareReports(Report(0.5, 0.2, 0.4), Report(0.6, 0.1, 0.4), "x");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].bucket, "short");
  EXPECT_NEAR(*rows[0].relative_gain, 0.2, 1e-15);
  EXPECT_NEAR(*rows[1].relative_gain, -0.5, 1e-15);
  EXPECT_EQ(*rows[2].relative_gain, 0.0);
  EXPECT_EQ(rows[0].step, "x");
  const auto zero = CompareReports(Report(0.0, 0.2, 0.4), Report(0.1, 0.2, 0.4));
  EXPECT_FALSE(zero[0].relative_gain.has_value());
  EXPECT_EQ(GainsToCsv(zero).substr(0, 42), "step,bucket,before,after,relative_gain_pct");
}

TEST(EvaluationTest, CompareRejectsDifferentCorpora) {
  EXPECT_THROW(CompareReports(Report(0.5, 0.2, 0.4, "a"), Report(0.5, 0.2, 0.4, "b")), Error);
}

TEST(EvaluationTest, CompareChainPairsNeighbours) {
  const auto rows = CompareChain({Report(0.1, 0.1, 0.1), Report(0.2, 0.2, 0.2),
                                  Report(0.3, 0.3, 0.3)},
                                 {"a", "b", "c"});
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0].step, "b");
  EXPECT_EQ(rows[5].step, "c");
  EXPECT_NEAR(*rows[5].relative_gain, 0.5, 1e-12);
}

}  // namespace
}  // namespace dstlab
