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

#include "support/metric_oracle.h"

#include <algorithm>
#include <cctype>
#include <string>

#include "support/test_support.h"

namespace dstlab::testing {
namespace {

std::string Canon(const std::string& v) {
  std::string out;
  std::string word;
  for (char c : v + " ") {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!word.empty()) {
        if (!out.empty()) out += ' ';
        out += word;
        word.clear();
      }
    } else {
      word += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  return out;
}

SlotValue Lookup(const BeliefState& s, const std::string& slot) {
  for (const auto& [name, v] : s.entries) {
    if (name == slot) return v;
  }
  return {};
}

const TurnPrediction* Find(const std::vector<TurnPrediction>& preds, const std::string& id,
                           int turn) {
  const TurnPrediction* found = nullptr;
  for (const TurnPrediction& p : preds) {
    if (p.dialogue_id == id && p.turn_index == turn) found = &p;
  }
  return found;
}

void AddTurn(const Schema& schema, const BeliefState& pred, const BeliefState& gold,
             OracleBucket& b) {
  bool joint = true;
  for (const SlotSpec& s : schema.slots()) {
    const SlotValue g = Lookup(gold, s.name);
    const SlotValue p = Lookup(pred, s.name);
    const bool status_ok = g.status == p.status;
    b.status.total += 1;
    b.status.hit += status_ok ? 1 : 0;
    const bool value_ok = Canon(g.value) == Canon(p.value);
    if (!status_ok || (g.status == SlotStatus::kActive && !value_ok)) joint = false;
    if (g.status == SlotStatus::kActive) {
      Count& c = s.categorical() ? b.categorical : b.noncategorical;
      c.total += 1;
      c.hit += (p.status == SlotStatus::kActive && value_ok) ? 1 : 0;
    }
  }
  b.jga.total += 1;
  b.jga.hit += joint ? 1 : 0;
}

void Check(const char* what, const std::optional<double>& got, const Count& want,
           std::vector<std::string>& out) {
  const std::optional<double> w = want.Value();
  if (got.has_value() != w.has_value() || (got && *got != *w)) {
    out.push_back(std::string(what) + ": got " + (got ? std::to_string(*got) : "null") +
                  " want " + (w ? std::to_string(*w) : "null"));
  }
}

void CheckBucket(const std::string& name, const BucketMetrics& got, const OracleBucket& want,
                 std::vector<std::string>& out) {
  Check((name + ".jga").c_str(), got.jga, want.jga, out);
  Check((name + ".status").c_str(), got.components.status, want.status, out);
  Check((name + ".categorical").c_str(), got.components.categorical, want.categorical, out);
  Check((name + ".noncategorical").c_str(), got.components.noncategorical,
        want.noncategorical, out);
  if (got.turns != want.jga.total) out.push_back(name + ".turns");
  if (got.dialogues != want.dialogues) out.push_back(name + ".dialogues");
}

}  // namespace

std::optional<double> Count::Value() const {
  if (total == 0) return std::nullopt;
  return static_cast<double>(hit) / static_cast<double>(total);
}

OracleReport BruteForceMetrics(const std::vector<TurnPrediction>& predictions,
                               const Corpus& corpus) {
  OracleReport r;
  const int n = static_cast<int>(corpus.dialogues.size());
  int max_len = 0;
  for (const Dialogue& d : corpus.dialogues) {
    max_len = std::max(max_len, static_cast<int>(d.turns.size()));
  }
  r.short_max = -1;
  for (int len = 0; len <= max_len && r.short_max < 0; ++len) {
    int at_most = 0;
    for (const Dialogue& d : corpus.dialogues) {
      at_most += static_cast<int>(d.turns.size()) <= len ? 1 : 0;
    }
    if (10 * at_most >= 3 * n) r.short_max = len;
  }
  r.long_min = -1;
  for (int len = max_len; len >= 0 && r.long_min < 0; --len) {
    int at_least = 0;
    for (const Dialogue& d : corpus.dialogues) {
      at_least += static_cast<int>(d.turns.size()) >= len ? 1 : 0;
    }
    if (10 * at_least >= 3 * n) r.long_min = len;
  }
  for (const Dialogue& d : corpus.dialogues) {
    const int len = static_cast<int>(d.turns.size());
    std::vector<OracleBucket*> buckets = {&r.all};
    if (len <= r.short_max) buckets.push_back(&r.short_bucket);
    if (len >= r.long_min) buckets.push_back(&r.long_bucket);
    for (OracleBucket* b : buckets) b->dialogues += 1;
    for (std::size_t t = 0; t < d.turns.size(); ++t) {
      const Turn& turn = d.turns[t];
      if (turn.inserted || !turn.gold_state) continue;
      const TurnPrediction* p = Find(predictions, d.id, static_cast<int>(t));
      const BeliefState pred = p != nullptr ? p->state : BeliefState{};
      for (OracleBucket* b : buckets) AddTurn(corpus.schema, pred, *turn.gold_state, *b);
    }
  }
  return r;
}

MetricFixture LoadMetricFixture() {
  const auto dir = DataDir() / "metric_fixture";
  MetricFixture f;
  const Schema schema = LoadSchema(dir / "schema.json");
  f.corpus = IngestDialogues(nlohmann::json::parse(ReadFile(dir / "dialogues.json")), schema);
  f.predictions = PredictionsFromJsonl(ReadFile(dir / "predictions.jsonl"), schema);
  f.expected = nlohmann::json::parse(ReadFile(dir / "expected.json"));
  return f;
}

std::vector<std::string> CompareWithOracle(const EvalReport& report,
                                           const OracleReport& oracle) {
  std::vector<std::string> out;
  if (report.thresholds.short_max_utts != oracle.short_max) out.push_back("short_max_utts");
  if (report.thresholds.long_min_utts != oracle.long_min) out.push_back("long_min_utts");
  CheckBucket("all", report.all, oracle.all, out);
  CheckBucket("short", report.short_bucket, oracle.short_bucket, out);
  CheckBucket("long", report.long_bucket, oracle.long_bucket, out);
  return out;
}

}  // namespace dstlab::testing
