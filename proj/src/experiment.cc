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

#include "dstlab/experiment.h"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "dstlab/checkpoint.h"

namespace dstlab {
namespace {

namespace fs = std::filesystem;

fs::path Resolve(const fs::path& base, const fs::path& p) {
  return p.is_absolute() || base.empty() ? p : base / p;
}

std::string HashStrings(const std::vector<std::string>& texts) {
  std::string joined;
  for (const std::string& t : texts) {
    joined += t;
    joined += '\n';
  }
  return Sha256Hex(joined);
}

std::string CsvNumber(const std::optional<double>& v) {
  if (!v) return "NA";
  std::ostringstream out;
  out.precision(10);
  out << *v;
  return out.str();
}

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace

std::uint64_t ResolveSeed(std::uint64_t seed) {
  const char* env = std::getenv(kSeedEnvVar);
  if (env == nullptr || *env == '\0') return seed;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(env, &used);
    if (used != std::string_view(env).size()) throw std::invalid_argument(env);
    return v;
  } catch (const std::exception&) {
    throw Error(std::string(kSeedEnvVar) + " is not an unsigned integer: '" + env + "'");
  }
}

nlohmann::ordered_json ExperimentSpecToJson(const ExperimentSpec& s) {
  nlohmann::ordered_json j;
  j["name"] = s.name;
  j["seed"] = s.seed;
  auto path = [&](const std::optional<fs::path>& p) {
    return p ? nlohmann::ordered_json(Resolve(s.base_dir, *p).string())
             : nlohmann::ordered_json(nullptr);
  };
  j["schema"] = path(s.schema_path);
  j["corpus"] = {{"train", path(s.train_path)},
                 {"dev", path(s.dev_path)},
                 {"test", path(s.test_path)}};
  j["synthetic"] = s.synthetic ? nlohmann::ordered_json(*s.synthetic)
                               : nlohmann::ordered_json(nullptr);
  j["synthetic_seed"] = s.synthetic_seed ? nlohmann::ordered_json(*s.synthetic_seed)
                                         : nlohmann::ordered_json(nullptr);
  j["auxiliary"] = {{"path", path(s.auxiliary.path)},
                    {"synthetic", s.auxiliary.synthetic},
                    {"synthetic_size", s.auxiliary.synthetic_size},
                    {"exclude_target", s.auxiliary.exclude_target}};
  j["model"] = ModelConfigToJson(s.model);
  j["train"] = TrainConfigToJson(s.train);
  j["eval_split"] = SplitName(s.eval_split);
  j["output_dir"] = Resolve(s.base_dir, s.output_dir).string();
  return j;
}

ExperimentSpec ExperimentSpecFromJson(const nlohmann::json& j,
                                      const fs::path& base_dir) {
  ExperimentSpec s;
  s.base_dir = base_dir;
  try {
    s.name = j.value("name", s.name);
    s.seed = j.value("seed", s.seed);
    auto path = [](const nlohmann::json& obj, const char* key) -> std::optional<fs::path> {
      if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
      return fs::path(obj.at(key).get<std::string>());
    };
    s.schema_path = path(j, "schema");
    if (j.contains("corpus") && !j.at("corpus").is_null()) {
      const auto& c = j.at("corpus");
      s.train_path = path(c, "train");
      s.dev_path = path(c, "dev");
      s.test_path = path(c, "test");
    }
    if (j.contains("synthetic") && !j.at("synthetic").is_null()) {
      s.synthetic = j.at("synthetic");
    }
    if (j.contains("synthetic_seed") && !j.at("synthetic_seed").is_null()) {
      s.synthetic_seed = j.at("synthetic_seed").get<std::uint64_t>();
    }
    if (j.contains("auxiliary")) {
      const auto& a = j.at("auxiliary");
      s.auxiliary.path = path(a, "path");
      s.auxiliary.synthetic = a.value("synthetic", s.auxiliary.synthetic);
      s.auxiliary.synthetic_size = a.value("synthetic_size", s.auxiliary.synthetic_size);
      s.auxiliary.exclude_target = a.value("exclude_target", s.auxiliary.exclude_target);
    }
    if (j.contains("model")) s.model = ModelConfigFromJson(j.at("model"));
    if (j.contains("train")) s.train = TrainConfigFromJson(j.at("train"));
    if (j.contains("eval_split")) {
      s.eval_split = ParseSplit(j.at("eval_split").get<std::string>());
    }
    if (j.contains("output_dir")) s.output_dir = j.at("output_dir").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed experiment spec: ") + e.what());
  }
  if (!s.train_path && !s.synthetic) {
    throw Error("experiment spec needs corpus.train or a synthetic section");
  }
  if (s.train_path && !s.schema_path) {
    throw Error("experiment spec with corpus files needs a schema path");
  }
  return s;
}

ExperimentSpec LoadExperimentSpec(const fs::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ReadFile(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error("cannot parse '" + path.string() + "': " + e.what());
  }
  return ExperimentSpecFromJson(j, path.parent_path());
}

ExperimentData LoadExperimentData(const ExperimentSpec& spec) {
  ExperimentData data;
  nlohmann::ordered_json hashes;
  if (spec.train_path) {
    const Schema schema = LoadSchema(Resolve(spec.base_dir, *spec.schema_path));
    hashes["schema"] = Sha256Hex(schema.ToJson().dump());
    auto load = [&](const std::optional<fs::path>& p, Split split) {
      if (!p) {
        Corpus c;
        c.schema = schema;
        c.split = split;
        return c;
      }
      return IngestMultiwoz(Resolve(spec.base_dir, *p), schema, split);
    };
    data.splits.train = load(spec.train_path, Split::kTrain);
    data.splits.dev = load(spec.dev_path, Split::kDev);
    data.splits.test = load(spec.test_path, Split::kTest);
  } else {
    const SynthConfig cfg = SynthConfigFromJson(*spec.synthetic, spec.base_dir);
    const std::uint64_t corpus_seed =
        spec.synthetic_seed ? *spec.synthetic_seed : DeriveSeed(spec.seed, "corpus");
    data.splits = SplitCorpus(GenerateSynthetic(cfg, corpus_seed), cfg.train_fraction,
                              cfg.dev_fraction);
    hashes["schema"] = Sha256Hex(cfg.schema.ToJson().dump());
    hashes["synthetic_seed"] = corpus_seed;
  }
  hashes["train"] = CorpusHash(data.splits.train);
  hashes["dev"] = CorpusHash(data.splits.dev);
  hashes["test"] = CorpusHash(data.splits.test);

  const bool needs_aux =
      spec.train.mlm_mode == MlmMode::kTargetPlusAuxiliary || spec.train.mlm_warmup_steps > 0 ||
      (spec.train.perturbation &&
       spec.train.perturbation->source == InsertionSource::kAuxiliary);
  if (needs_aux) {
    AuxiliarySource aux = spec.auxiliary;
    if (aux.path) aux.path = Resolve(spec.base_dir, *aux.path);
    aux.seed = DeriveSeed(spec.seed, "auxiliary");
    data.auxiliary = AuxiliaryCorpus(aux, &data.splits.train);
  }
  hashes["auxiliary"] = HashStrings(data.auxiliary);
  data.input_hashes = std::move(hashes);
  return data;
}

fs::path RunDirectory(const ExperimentSpec& spec) {
  return Resolve(spec.base_dir, spec.output_dir) /
         (spec.name + "-seed" + std::to_string(spec.seed));
}

RunResult RunExperiment(const ExperimentSpec& spec, bool overwrite,
                        const ExperimentData* data, std::ostream* log) {
  ExperimentSpec s = spec;
  s.train.seed = s.seed;
  const fs::path dir = RunDirectory(s);
  if (fs::exists(dir)) {
    if (!overwrite) {
      throw Error("run directory '" + dir.string() + "' exists; pass --overwrite");
    }
    fs::remove_all(dir);
  }
  fs::create_directories(dir);

  ExperimentData loaded;
  if (data == nullptr) {
    loaded = LoadExperimentData(s);
    data = &loaded;
  }
  const nlohmann::ordered_json frozen = ExperimentSpecToJson(s);
  const std::string spec_text = frozen.dump(2) + "\n";
  WriteFile(dir / "spec.json", spec_text);
  // Where a run is written does not change what it computes.
  nlohmann::ordered_json hashed = frozen;
  hashed.erase("output_dir");
  const std::string config_hash = Sha256Hex(hashed.dump());
  WriteFile(dir / "inputs.json", data->input_hashes.dump(2) + "\n");

  std::ofstream metrics(dir / "metrics.jsonl", std::ios::binary);
  if (!metrics) throw Error("cannot write metrics log in '" + dir.string() + "'");
  TrainHooks hooks;
  hooks.on_step = [&](const StepRecord& r) {
    metrics << StepRecordToJson(r).dump() << '\n';
    if (log != nullptr && (r.step % 50 == 0 || r.step == 1)) {
      *log << r.phase << " step " << r.step << " loss " << r.losses.total << '\n';
    }
  };
  hooks.on_checkpoint = [&](int step, const DstModel& model) {
    const fs::path sd = dir / ("step-" + std::to_string(step));
    nlohmann::json meta = {{"step", step}, {"config_hash", config_hash}};
    SaveModel(sd / "model.ckpt", model, meta);
    model.tokenizer.Save(sd / "vocab.txt");
  };
  const DstModel model =
      Train(data->splits.train, data->auxiliary, s.model, s.train, hooks);
  metrics.close();

  const Corpus& eval = s.eval_split == Split::kTrain ? data->splits.train
                       : s.eval_split == Split::kDev ? data->splits.dev
                                                     : data->splits.test;
  RunResult result;
  result.run_dir = dir;
  if (!eval.dialogues.empty()) {
    ModelEvaluation ev = EvaluateModel(model, eval);
    ev.report.config_hash = config_hash;
    WriteFile(dir / "predictions.jsonl", PredictionsToJsonl(ev.predictions, model.schema));
    WriteFile(dir / "oracle_predictions.jsonl",
              PredictionsToJsonl(ev.oracle_predictions, model.schema));
    WriteFile(dir / "report.json", EvalReportToJson(ev.report).dump(2) + "\n");
    result.report = std::move(ev.report);
  }
  return result;
}

GenerateResult GenerateCorpusFiles(const SynthConfig& config, std::uint64_t seed,
                                   const fs::path& out_dir) {
  GenerateResult r;
  r.splits = SplitCorpus(GenerateSynthetic(config, seed), config.train_fraction,
                         config.dev_fraction);
  nlohmann::ordered_json files;
  const std::string schema_text = config.schema.ToJson().dump(2) + "\n";
  WriteFile(out_dir / "schema.json", schema_text);
  files["schema.json"] = Sha256Hex(schema_text);
  const std::pair<const char*, const Corpus*> parts[] = {
      {"train.json", &r.splits.train}, {"dev.json", &r.splits.dev}, {"test.json", &r.splits.test}};
  nlohmann::ordered_json counts;
  for (const auto& [name, corpus] : parts) {
    const std::string text = SerializeCorpus(*corpus);
    WriteFile(out_dir / name, text);
    files[name] = Sha256Hex(text);
    counts[name] = {{"dialogues", corpus->dialogues.size()},
                    {"gold_turns", CountGoldTurns(*corpus)}};
  }
  r.manifest["seed"] = seed;
  r.manifest["config"] = SynthConfigToJson(config);
  r.manifest["sha256"] = std::move(files);
  r.manifest["counts"] = std::move(counts);
  WriteFile(out_dir / "manifest.json", r.manifest.dump(2) + "\n");
  return r;
}

SweepGrid DefaultSweepGrid() {
  return {{InsertionSource::kAuxiliary, InsertionSource::kTarget,
           InsertionSource::kRandomWords},
          {0.2, 0.4, 0.6},
          {2, 3, 4},
          {PositionPolicy::kRandomBoundary, PositionPolicy::kAfterUserOnly,
           PositionPolicy::kAfterAgentOnly}};
}

SweepGrid SweepGridFromJson(const nlohmann::json& j) {
  SweepGrid g = DefaultSweepGrid();
  if (j.contains("sources")) {
    g.sources.clear();
    for (const auto& v : j.at("sources")) g.sources.push_back(ParseSource(v.get<std::string>()));
  }
  if (j.contains("probabilities")) {
    g.probabilities = j.at("probabilities").get<std::vector<double>>();
  }
  if (j.contains("num_insertions")) {
    g.num_insertions = j.at("num_insertions").get<std::vector<int>>();
  }
  if (j.contains("positions")) {
    g.positions.clear();
    for (const auto& v : j.at("positions")) {
      g.positions.push_back(ParsePosition(v.get<std::string>()));
    }
  }
  return g;
}

std::vector<SweepCell> RunSweep(const ExperimentSpec& base, const SweepGrid& grid,
                                const CellRunner& runner) {
  std::vector<SweepCell> cells;
  for (InsertionSource source : grid.sources) {
    for (double p : grid.probabilities) {
      for (int n : grid.num_insertions) {
        for (PositionPolicy pos : grid.positions) {
          SweepCell cell;
          cell.perturbation.source = source;
          cell.perturbation.probability = p;
          cell.perturbation.num_insertions = n;
          cell.perturbation.position = pos;
          cell.perturbation.seed = base.seed;
          ExperimentSpec spec = base;
          spec.train.perturbation = cell.perturbation;
          std::ostringstream name;
          name << base.name << "-" << SourceName(source) << "-p" << p << "-n" << n << "-"
               << PositionName(pos);
          spec.name = name.str();
          try {
            cell.perturbation.Validate();
            cell.report = runner(spec);
            cell.ok = true;
          } catch (const std::exception& e) {
            cell.error = e.what();
          }
          cells.push_back(std::move(cell));
        }
      }
    }
  }
  return cells;
}

std::string SweepToCsv(const std::vector<SweepCell>& cells) {
  std::string out =
      "source,probability,num_insertions,position,status,jga_all,jga_short,jga_long,error\n";
  for (const SweepCell& c : cells) {
    std::ostringstream p;
    p << c.perturbation.probability;
    out += std::string(SourceName(c.perturbation.source)) + "," + p.str() + "," +
           std::to_string(c.perturbation.num_insertions) + "," +
           std::string(PositionName(c.perturbation.position)) + "," +
           (c.ok ? "ok" : "failed") + ",";
    if (c.ok && c.report) {
      out += CsvNumber(c.report->all.jga) + "," + CsvNumber(c.report->short_bucket.jga) +
             "," + CsvNumber(c.report->long_bucket.jga) + ",";
    } else {
      out += "NA,NA,NA," + CsvField(c.error);
    }
    out += "\n";
  }
  return out;
}

}  // namespace dstlab
