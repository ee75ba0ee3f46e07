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

#include <algorithm>
#include <map>
#include <sstream>

#include "dstlab/training.h"

namespace dstlab {
namespace {

nlohmann::ordered_json Optional(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

std::optional<double> ReadOptional(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

std::optional<double> Ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

struct Tally {
  std::size_t turns = 0, correct = 0;
  std::size_t status_total = 0, status_correct = 0;
  std::size_t cat_total = 0, cat_correct = 0;
  std::size_t noncat_total = 0, noncat_correct = 0;
  std::size_t dialogues = 0;

  void Add(const Schema& schema, const BeliefState& pred, const BeliefState& gold) {
    ++turns;
    if (TurnCorrect(schema, pred, gold)) ++correct;
    for (const SlotSpec& s : schema.slots()) {
      const SlotValue g = gold.Get(s.name);
      const SlotValue p = pred.Get(s.name);
      ++status_total;
      if (g.status == p.status) ++status_correct;
      if (g.status != SlotStatus::kActive) continue;
      const bool ok = p.status == SlotStatus::kActive &&
                      NormalizeValue(p.value) == NormalizeValue(g.value);
      if (s.categorical()) {
        ++cat_total;
        if (ok) ++cat_correct;
      } else {
        ++noncat_total;
        if (ok) ++noncat_correct;
      }
    }
  }

  BucketMetrics Metrics() const {
    BucketMetrics m;
    m.jga = Ratio(correct, turns);
    m.turns = turns;
    m.dialogues = dialogues;
    m.components.status = Ratio(status_correct, status_total);
    m.components.categorical = Ratio(cat_correct, cat_total);
    m.components.noncategorical = Ratio(noncat_correct, noncat_total);
    return m;
  }
};

nlohmann::ordered_json BucketJson(const BucketMetrics& m) {
  nlohmann::ordered_json j;
  j["jga"] = Optional(m.jga);
  j["turns"] = m.turns;
  j["dialogues"] = m.dialogues;
  j["status"] = Optional(m.components.status);
  j["categorical"] = Optional(m.components.categorical);
  j["noncategorical"] = Optional(m.components.noncategorical);
  return j;
}

BucketMetrics BucketFromJson(const nlohmann::json& j) {
  BucketMetrics m;
  m.jga = ReadOptional(j, "jga");
  m.turns = j.value("turns", std::size_t{0});
  m.dialogues = j.value("dialogues", std::size_t{0});
  m.components.status = ReadOptional(j, "status");
  m.components.categorical = ReadOptional(j, "categorical");
  m.components.noncategorical = ReadOptional(j, "noncategorical");
  return m;
}

std::string FormatDouble(double v) {
  std::ostringstream out;
  out.precision(10);
  out << v;
  return out.str();
}

}  // namespace

bool TurnCorrect(const Schema& schema, const BeliefState& predicted,
                 const BeliefState& gold) {
  for (const SlotSpec& s : schema.slots()) {
    const SlotValue g = gold.Get(s.name);
    const SlotValue p = predicted.Get(s.name);
    if (g.status != p.status) return false;
    if (g.status == SlotStatus::kActive &&
        NormalizeValue(g.value) != NormalizeValue(p.value)) {
      return false;
    }
  }
  return true;
}

std::vector<GoldTurnRef> GoldTurns(const Corpus& corpus) {
  std::vector<GoldTurnRef> out;
  for (std::size_t d = 0; d < corpus.dialogues.size(); ++d) {
    const auto& turns = corpus.dialogues[d].turns;
    for (std::size_t t = 0; t < turns.size(); ++t) {
      if (turns[t].gold_state && !turns[t].inserted) out.push_back({d, t});
    }
  }
  return out;
}

std::vector<const TurnPrediction*> AlignPredictions(
    const std::vector<TurnPrediction>& predictions, const Corpus& corpus) {
  std::map<std::pair<std::string, int>, const TurnPrediction*> index;
  for (const TurnPrediction& p : predictions) {
    index[{p.dialogue_id, p.turn_index}] = &p;
  }
  std::vector<const TurnPrediction*> out;
  std::vector<std::string> missing;
  for (const GoldTurnRef& r : GoldTurns(corpus)) {
    const std::string& id = corpus.dialogues[r.dialogue].id;
    const auto it = index.find({id, static_cast<int>(r.turn)});
    if (it == index.end()) {
      missing.push_back("(" + id + ", " + std::to_string(r.turn) + ")");
      out.push_back(nullptr);
    } else {
      out.push_back(it->second);
    }
  }
  if (!missing.empty()) {
    std::string msg = std::to_string(missing.size()) + " gold turns lack a prediction:";
    for (std::size_t i = 0; i < missing.size() && i < 20; ++i) msg += " " + missing[i];
    if (missing.size() > 20) msg += " ...";
    throw Error(msg);
  }
  return out;
}

double JointGoalAccuracy(const std::vector<TurnPrediction>& predictions,
                         const Corpus& corpus) {
  const std::vector<GoldTurnRef> refs = GoldTurns(corpus);
  if (refs.empty()) throw Error("corpus has no gold user turns");
  const std::vector<const TurnPrediction*> aligned = AlignPredictions(predictions, corpus);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const Turn& t = corpus.dialogues[refs[i].dialogue].turns[refs[i].turn];
    if (TurnCorrect(corpus.schema, aligned[i]->state, *t.gold_state)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(refs.size());
}

BucketThresholds ComputeBucketThresholds(const Corpus& corpus) {
  if (corpus.dialogues.empty()) throw Error("bucket thresholds need a dialogue");
  std::vector<int> lengths;
  for (const Dialogue& d : corpus.dialogues) {
    lengths.push_back(static_cast<int>(d.num_utterances()));
  }
  std::sort(lengths.begin(), lengths.end());
  const std::size_t n = lengths.size();
  BucketThresholds b;
  // k-th smallest / largest with 10k >= 3n.
  const std::size_t k = (3 * n + 9) / 10;
  b.short_max_utts = lengths[k - 1];
  b.long_min_utts = lengths[n - k];
  b.degenerate = lengths.front() == lengths.back();
  return b;
}

EvalReport EvaluatePredictions(const std::vector<TurnPrediction>& predictions,
                               const Corpus& corpus) {
  const std::vector<const TurnPrediction*> aligned = AlignPredictions(predictions, corpus);
  EvalReport r;
  r.thresholds = ComputeBucketThresholds(corpus);
  r.corpus_hash = CorpusHash(corpus);
  Tally all, short_t, long_t, inactive;
  std::size_t i = 0;
  const BeliefState empty;
  for (const Dialogue& d : corpus.dialogues) {
    const int len = static_cast<int>(d.num_utterances());
    const bool is_short = len <= r.thresholds.short_max_utts;
    const bool is_long = len >= r.thresholds.long_min_utts;
    ++all.dialogues;
    if (is_short) ++short_t.dialogues;
    if (is_long) ++long_t.dialogues;
    for (const Turn& t : d.turns) {
      if (!t.gold_state || t.inserted) continue;
      const BeliefState& pred = aligned[i++]->state;
      all.Add(corpus.schema, pred, *t.gold_state);
      inactive.Add(corpus.schema, empty, *t.gold_state);
      if (is_short) short_t.Add(corpus.schema, pred, *t.gold_state);
      if (is_long) long_t.Add(corpus.schema, pred, *t.gold_state);
    }
  }
  r.all = all.Metrics();
  r.short_bucket = short_t.Metrics();
  r.long_bucket = long_t.Metrics();
  r.all_inactive_jga = inactive.Metrics().jga;
  return r;
}

std::vector<TurnPrediction> OracleStatusPredictions(const DstModel& model,
                                                    const Corpus& corpus) {
  return EvaluateModel(model, corpus).oracle_predictions;
}

ModelEvaluation EvaluateModel(const DstModel& model, const Corpus& corpus) {
  const SchemaEncodings enc = EncodeSchema(model);
  ModelEvaluation out;
  for (const Dialogue& d : corpus.dialogues) {
    for (std::size_t t = 0; t < d.turns.size(); ++t) {
      if (!d.turns[t].gold_state || d.turns[t].inserted) continue;
      const std::span<const Turn> turns(d.turns.data(), t + 1);
      const TurnContext ctx = EncodeTurnContext(model, turns);
      TurnPrediction p = PredictTurn(model, enc, ctx, turns, model.config.status_mode);
      p.dialogue_id = d.id;
      p.turn_index = static_cast<int>(t);
      std::map<std::string, SpanPrediction> extra;
      TurnPrediction oracle = SetOracleStatuses(
          p, *d.turns[t].gold_state, model.schema, [&](std::size_t slot) {
            return PredictValue(model, enc, ctx, turns, slot, &extra);
          });
      for (auto& [k, v] : extra) oracle.spans[k] = v;
      out.predictions.push_back(std::move(p));
      out.oracle_predictions.push_back(std::move(oracle));
    }
  }
  out.report = EvaluatePredictions(out.predictions, corpus);
  out.report.oracle_jga = JointGoalAccuracy(out.oracle_predictions, corpus);
  return out;
}

nlohmann::ordered_json EvalReportToJson(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["corpus_hash"] = r.corpus_hash;
  j["config_hash"] = r.config_hash;
  j["jga_all"] = Optional(r.all.jga);
  j["jga_short"] = Optional(r.short_bucket.jga);
  j["jga_long"] = Optional(r.long_bucket.jga);
  j["oracle_jga"] = Optional(r.oracle_jga);
  j["all_inactive_jga"] = Optional(r.all_inactive_jga);
  j["thresholds"] = {{"short_max_utts", r.thresholds.short_max_utts},
                     {"long_min_utts", r.thresholds.long_min_utts},
                     {"degenerate", r.thresholds.degenerate}};
  j["buckets"] = {{"all", BucketJson(r.all)},
                  {"short", BucketJson(r.short_bucket)},
                  {"long", BucketJson(r.long_bucket)}};
  return j;
}

EvalReport EvalReportFromJson(const nlohmann::json& j) {
  EvalReport r;
  r.corpus_hash = j.value("corpus_hash", std::string());
  r.config_hash = j.value("config_hash", std::string());
  r.oracle_jga = ReadOptional(j, "oracle_jga");
  r.all_inactive_jga = ReadOptional(j, "all_inactive_jga");
  if (j.contains("thresholds")) {
    const auto& t = j.at("thresholds");
    r.thresholds.short_max_utts = t.value("short_max_utts", 0);
    r.thresholds.long_min_utts = t.value("long_min_utts", 0);
    r.thresholds.degenerate = t.value("degenerate", false);
  }
  if (j.contains("buckets")) {
    const auto& b = j.at("buckets");
    if (b.contains("all")) r.all = BucketFromJson(b.at("all"));
    if (b.contains("short")) r.short_bucket = BucketFromJson(b.at("short"));
    if (b.contains("long")) r.long_bucket = BucketFromJson(b.at("long"));
  }
  r.all.jga = ReadOptional(j, "jga_all");
  r.short_bucket.jga = ReadOptional(j, "jga_short");
  r.long_bucket.jga = ReadOptional(j, "jga_long");
  return r;
}

std::vector<GainRow> CompareReports(const EvalReport& before,
                                    const EvalReport& after,
                                    const std::string& label) {
  if (before.corpus_hash != after.corpus_hash) {
    throw Error("reports were computed on different corpora (" + before.corpus_hash +
                " vs " + after.corpus_hash + ")");
  }
  std::vector<GainRow> rows;
  const std::pair<const char*, std::pair<const BucketMetrics*, const BucketMetrics*>> buckets[] = {
      {"short", {&before.short_bucket, &after.short_bucket}},
      {"long", {&before.long_bucket, &after.long_bucket}},
      {"all", {&before.all, &after.all}}};
  for (const auto& [name, pair] : buckets) {
    if (!pair.first->jga || !pair.second->jga) {
      throw Error(std::string("report lacks jga for bucket '") + name + "'");
    }
    GainRow row;
    row.step = label;
    row.bucket = name;
    row.before = *pair.first->jga;
    row.after = *pair.second->jga;
    if (row.before != 0.0) row.relative_gain = (row.after - row.before) / row.before;
    rows.push_back(row);
  }
  return rows;
}

std::vector<GainRow> CompareChain(const std::vector<EvalReport>& reports,
                                  const std::vector<std::string>& labels) {
  if (labels.size() != reports.size()) {
    throw Error("CompareChain needs one label per report");
  }
  std::vector<GainRow> rows;
  for (std::size_t i = 1; i < reports.size(); ++i) {
    for (GainRow& r : CompareReports(reports[i - 1], reports[i], labels[i])) {
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

nlohmann::ordered_json GainsToJson(const std::vector<GainRow>& rows) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const GainRow& r : rows) {
    j.push_back({{"step", r.step},
                 {"bucket", r.bucket},
                 {"before", r.before},
                 {"after", r.after},
                 {"relative_gain", Optional(r.relative_gain)}});
  }
  return j;
}

std::string GainsToCsv(const std::vector<GainRow>& rows) {
  std::string out = "step,bucket,before,after,relative_gain_pct\n";
  for (const GainRow& r : rows) {
    out += r.step + "," + r.bucket + "," + FormatDouble(r.before) + "," +
           FormatDouble(r.after) + "," +
           (r.relative_gain ? FormatDouble(100.0 * *r.relative_gain) : std::string("NA")) +
           "\n";
  }
  return out;
}

}  // namespace dstlab
