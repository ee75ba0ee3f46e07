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

#ifndef DSTLAB_TESTS_SUPPORT_METRIC_ORACLE_H_
#define DSTLAB_TESTS_SUPPORT_METRIC_ORACLE_H_

#include <cstddef>
#include <optional>
#include <vector>

#include "dstlab/corpus.h"
#include "dstlab/dst_model.h"
#include "dstlab/evaluation.h"

namespace dstlab::testing {

struct Count {
  std::size_t hit = 0;
  std::size_t total = 0;

  std::optional<double> Value() const;
};

struct OracleBucket {
  Count jga, status, categorical, noncategorical;
  std::size_t dialogues = 0;
};

struct OracleReport {
  int short_max = 0;
  int long_min = 0;
  OracleBucket all, short_bucket, long_bucket;
};

// Brute-force re-derivation of the evaluation metrics: linear search for each
// prediction, thresholds by scanning every candidate length.
OracleReport BruteForceMetrics(const std::vector<TurnPrediction>& predictions,
                               const Corpus& corpus);

// The hand-auditable 50-dialogue fixture under tests/data/metric_fixture;
// `expected` holds its independently computed (hit, total) pairs.
struct MetricFixture {
  Corpus corpus;
  std::vector<TurnPrediction> predictions;
  nlohmann::json expected;
};
MetricFixture LoadMetricFixture();

// Empty when `report` matches `oracle` bit for bit; otherwise the mismatches.
std::vector<std::string> CompareWithOracle(const EvalReport& report,
                                           const OracleReport& oracle);

}  // namespace dstlab::testing

#endif  // DSTLAB_TESTS_SUPPORT_METRIC_ORACLE_H_
