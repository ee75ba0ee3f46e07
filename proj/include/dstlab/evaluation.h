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

#ifndef DSTLAB_EVALUATION_H_
#define DSTLAB_EVALUATION_H_

#include <optional>
#include <string>
#include <vector>

#include "dstlab/corpus.h"
#include "dstlab/dst_model.h"
#include "json.hpp"

namespace dstlab {

// True iff every schema slot matches on status and, for active slots, on the
// normalized value.
bool TurnCorrect(const Schema& schema, const BeliefState& predicted,
                 const BeliefState& gold);

struct GoldTurnRef {
  std::size_t dialogue = 0;
  std::size_t turn = 0;
};

// Gold user turns in corpus order.
std::vector<GoldTurnRef> GoldTurns(const Corpus& corpus);

// Predictions aligned with GoldTurns(corpus). Throws Error listing every
// (dialogue id, turn) that has no prediction.
std::vector<const TurnPrediction*> AlignPredictions(
    const std::vector<TurnPrediction>& predictions, const Corpus& corpus);

double JointGoalAccuracy(const std::vector<TurnPrediction>& predictions,
                         const Corpus& corpus);

struct BucketThresholds {
  int short_max_utts = 0;
  int long_min_utts = 0;
  // All dialogues have the same length, so both buckets hold everything.
  bool degenerate = false;
};

// Smallest length L with at least 30% of dialogues no longer than L, and
// largest length L with at least 30% of dialogues no shorter than L.
BucketThresholds ComputeBucketThresholds(const Corpus& corpus);

struct ComponentAccuracy {
  std::optional<double> status;
  std::optional<double> categorical;
  std::optional<double> noncategorical;
};

struct BucketMetrics {
  std::optional<double> jga;
  std::size_t turns = 0;
  std::size_t dialogues = 0;
  ComponentAccuracy components;
};

struct EvalReport {
  BucketMetrics all;
  BucketMetrics short_bucket;
  BucketMetrics long_bucket;
  BucketThresholds thresholds;
  std::optional<double> oracle_jga;
  std::optional<double> all_inactive_jga;
  std::string corpus_hash;
  std::string config_hash;
};

EvalReport EvaluatePredictions(const std::vector<TurnPrediction>& predictions,
                               const Corpus& corpus);

// Predictions whose statuses come from gold, re-running the model's value
// heads where a slot becomes active.
std::vector<TurnPrediction> OracleStatusPredictions(const DstModel& model,
                                                    const Corpus& corpus);

struct ModelEvaluation {
  std::vector<TurnPrediction> predictions;
  std::vector<TurnPrediction> oracle_predictions;
  EvalReport report;
};

// Runs inference, the oracle-status variant and the full report.
ModelEvaluation EvaluateModel(const DstModel& model, const Corpus& corpus);

nlohmann::ordered_json EvalReportToJson(const EvalReport& report);
EvalReport EvalReportFromJson(const nlohmann::json& j);

struct GainRow {
  std::string step;    // label of the `after` report
  std::string bucket;  // all, short, long
  double before = 0.0;
  double after = 0.0;
  // (after - before) / before; absent when before is 0.
  std::optional<double> relative_gain;
};

// Relative JGA gains per bucket. Throws Error when the corpus hashes differ.
std::vector<GainRow> CompareReports(const EvalReport& before,
                                    const EvalReport& after,
                                    const std::string& label = "after");

// Gains of each report over its predecessor.
std::vector<GainRow> CompareChain(const std::vector<EvalReport>& reports,
                                  const std::vector<std::string>& labels);

nlohmann::ordered_json GainsToJson(const std::vector<GainRow>& rows);
std::string GainsToCsv(const std::vector<GainRow>& rows);

}  // namespace dstlab

#endif  // DSTLAB_EVALUATION_H_
