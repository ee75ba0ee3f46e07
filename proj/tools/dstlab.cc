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

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dstlab/checkpoint.h"
#include "dstlab/evaluation.h"
#include "dstlab/experiment.h"
#include "dstlab/perturbation.h"
#include "dstlab/synthetic.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

using dstlab::Error;

nlohmann::json LoadJson(const std::string& path) {
  if (path.empty()) return nlohmann::json::object();
  try {
    return nlohmann::json::parse(dstlab::ReadFile(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error("cannot parse '" + path + "': " + e.what());
  }
}

// Flag value if given, else the config entry, else `fallback`.
std::string Pick(const std::string& flag, const nlohmann::json& cfg, const char* key,
                 const std::string& fallback = {}) {
  if (!flag.empty()) return flag;
  if (cfg.contains(key) && cfg.at(key).is_string()) return cfg.at(key).get<std::string>();
  return fallback;
}

std::string Required(const std::string& value, const char* what) {
  if (value.empty()) throw Error(std::string("missing required option --") + what);
  return value;
}

struct GenerateArgs {
  std::string config, out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> num_dialogues;
};

int CmdGenerate(const GenerateArgs& a) {
  const nlohmann::json cfg = LoadJson(a.config);
  dstlab::SynthConfig sc = dstlab::SynthConfigFromJson(
      cfg.contains("synthetic") ? cfg.at("synthetic") : cfg,
      a.config.empty() ? fs::path() : fs::path(a.config).parent_path());
  if (a.num_dialogues) sc.num_dialogues = *a.num_dialogues;
  const std::uint64_t seed =
      dstlab::ResolveSeed(a.seed ? *a.seed : cfg.value("seed", std::uint64_t{0}));
  const std::string out = Required(Pick(a.out, cfg, "out"), "out");
  const auto r = dstlab::GenerateCorpusFiles(sc, seed, out);
  std::cout << r.manifest["counts"].dump() << "\n";
  return 0;
}

struct PerturbArgs {
  std::string config, corpus, schema, out, aux, source, position;
  std::optional<double> probability;
  std::optional<int> num_insertions;
  std::optional<std::uint64_t> seed;
};

int CmdPerturb(const PerturbArgs& a) {
  const nlohmann::json cfg = LoadJson(a.config);
  dstlab::PerturbationConfig pc = dstlab::PerturbationConfigFromJson(
      cfg.contains("perturbation") ? cfg.at("perturbation") : cfg);
  if (a.probability) pc.probability = *a.probability;
  if (a.num_insertions) pc.num_insertions = *a.num_insertions;
  if (!a.source.empty()) pc.source = dstlab::ParseSource(a.source);
  if (!a.position.empty()) pc.position = dstlab::ParsePosition(a.position);
  pc.seed = dstlab::ResolveSeed(a.seed ? *a.seed : pc.seed);
  pc.Validate();
  const dstlab::Schema schema =
      dstlab::LoadSchema(Required(Pick(a.schema, cfg, "schema"), "schema"));
  const dstlab::Corpus corpus =
      dstlab::IngestMultiwoz(Required(Pick(a.corpus, cfg, "corpus"), "corpus"), schema);
  const std::string out = Required(Pick(a.out, cfg, "out"), "out");
  std::vector<std::string> pool;
  const std::string aux = Pick(a.aux, cfg, "aux");
  switch (pc.source) {
    case dstlab::InsertionSource::kAuxiliary: {
      dstlab::AuxiliarySource src;
      if (!aux.empty()) src.path = aux;
      src.seed = dstlab::DeriveSeed(pc.seed, "auxiliary");
      pool = dstlab::AuxiliaryCorpus(src, &corpus);
      break;
    }
    case dstlab::InsertionSource::kTarget:
      pool = dstlab::TargetUtterancePool(corpus);
      break;
    case dstlab::InsertionSource::kRandomWords:
      pool = dstlab::BuildVocabulary(corpus, {}).Words();
      break;
  }
  const dstlab::Corpus perturbed = dstlab::PerturbCorpus(corpus, pc, pool);
  const std::string text = dstlab::SerializeCorpus(perturbed);
  dstlab::WriteFile(out, text);
  std::size_t changed = 0;
  for (const auto& d : perturbed.dialogues) changed += d.num_inserted() > 0 ? 1 : 0;
  nlohmann::ordered_json manifest;
  manifest["perturbation"] = dstlab::PerturbationConfigToJson(pc);
  manifest["input_sha256"] = dstlab::CorpusHash(corpus);
  manifest["output_sha256"] = dstlab::Sha256Hex(text);
  manifest["perturbed_dialogues"] = changed;
  manifest["dialogues"] = perturbed.dialogues.size();
  dstlab::WriteFile(out + ".manifest.json", manifest.dump(2) + "\n");
  std::cout << "perturbed " << changed << " of " << perturbed.dialogues.size()
            << " dialogues\n";
  return 0;
}

dstlab::ExperimentSpec LoadSpecWithOverrides(const std::string& config,
                                             std::optional<std::uint64_t> seed,
                                             const std::string& output_dir) {
  dstlab::ExperimentSpec spec =
      dstlab::LoadExperimentSpec(Required(config, "config"));
  if (seed) spec.seed = *seed;
  spec.seed = dstlab::ResolveSeed(spec.seed);
  if (!output_dir.empty()) {
    spec.output_dir = fs::absolute(output_dir);
  }
  return spec;
}

struct TrainArgs {
  std::string config, output_dir;
  std::optional<std::uint64_t> seed;
  bool overwrite = false;
};

int CmdTrain(const TrainArgs& a) {
  const dstlab::ExperimentSpec spec =
      LoadSpecWithOverrides(a.config, a.seed, a.output_dir);
  const dstlab::RunResult r = dstlab::RunExperiment(spec, a.overwrite, nullptr, &std::cerr);
  std::cout << "run directory: " << r.run_dir.string() << "\n";
  std::cout << dstlab::EvalReportToJson(r.report).dump(2) << "\n";
  return 0;
}

struct EvalArgs {
  std::string config, predictions, checkpoint, corpus, schema, out;
};

int CmdEval(const EvalArgs& a) {
  const nlohmann::json cfg = LoadJson(a.config);
  const std::string corpus_path = Required(Pick(a.corpus, cfg, "corpus"), "corpus");
  const std::string ckpt = Pick(a.checkpoint, cfg, "checkpoint");
  dstlab::EvalReport report;
  if (!ckpt.empty()) {
    const dstlab::DstModel model = dstlab::LoadModel(ckpt);
    const dstlab::Corpus corpus = dstlab::IngestMultiwoz(corpus_path, model.schema);
    report = dstlab::EvaluateModel(model, corpus).report;
  } else {
    const dstlab::Schema schema =
        dstlab::LoadSchema(Required(Pick(a.schema, cfg, "schema"), "schema"));
    const dstlab::Corpus corpus = dstlab::IngestMultiwoz(corpus_path, schema);
    const auto preds = dstlab::PredictionsFromJsonl(
        dstlab::ReadFile(Required(Pick(a.predictions, cfg, "predictions"), "predictions")),
        schema);
    report = dstlab::EvaluatePredictions(preds, corpus);
  }
  const std::string text = dstlab::EvalReportToJson(report).dump(2) + "\n";
  const std::string out = Pick(a.out, cfg, "out");
  if (!out.empty()) dstlab::WriteFile(out, text);
  std::cout << "jga_all=" << (report.all.jga ? *report.all.jga : 0.0) << "\n" << text;
  return 0;
}

struct CompareArgs {
  std::string config, before, after, out_json, out_csv, label;
};

int CmdCompare(const CompareArgs& a) {
  const nlohmann::json cfg = LoadJson(a.config);
  const auto before = dstlab::EvalReportFromJson(
      LoadJson(Required(Pick(a.before, cfg, "before"), "before")));
  const auto after = dstlab::EvalReportFromJson(
      LoadJson(Required(Pick(a.after, cfg, "after"), "after")));
  const auto rows = dstlab::CompareReports(before, after, Pick(a.label, cfg, "label", "after"));
  const std::string json = dstlab::GainsToJson(rows).dump(2) + "\n";
  const std::string csv = dstlab::GainsToCsv(rows);
  const std::string oj = Pick(a.out_json, cfg, "out_json");
  const std::string oc = Pick(a.out_csv, cfg, "out_csv");
  if (!oj.empty()) dstlab::WriteFile(oj, json);
  if (!oc.empty()) dstlab::WriteFile(oc, csv);
  std::cout << csv;
  return 0;
}

struct SweepArgs {
  std::string config, grid, out, output_dir;
  std::optional<std::uint64_t> seed;
  bool overwrite = false;
};

int CmdSweep(const SweepArgs& a) {
  const dstlab::ExperimentSpec spec =
      LoadSpecWithOverrides(a.config, a.seed, a.output_dir);
  const dstlab::SweepGrid grid =
      a.grid.empty() ? dstlab::DefaultSweepGrid() : dstlab::SweepGridFromJson(LoadJson(a.grid));
  const auto cells = dstlab::RunSweep(spec, grid, [&](const dstlab::ExperimentSpec& s) {
    std::cerr << "cell " << s.name << "\n";
    return dstlab::RunExperiment(s, a.overwrite).report;
  });
  const std::string csv = dstlab::SweepToCsv(cells);
  const std::string out = a.out.empty()
                              ? (fs::path(spec.output_dir) / (spec.name + "-sweep.csv")).string()
                              : a.out;
  dstlab::WriteFile(out, csv);
  std::cout << csv;
  std::size_t failed = 0;
  for (const auto& c : cells) failed += c.ok ? 0 : 1;
  return failed == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dstlab: dialogue state tracking experiments"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Generate a synthetic corpus with splits");
  g->add_option("--config", gen.config, "Synthetic corpus config (JSON)");
  g->add_option("--seed", gen.seed, "Root seed");
  g->add_option("--out", gen.out, "Output directory");
  g->add_option("--num-dialogues", gen.num_dialogues, "Number of dialogues");

  PerturbArgs per;
  auto* p = app.add_subcommand("perturb", "Insert distractor utterances into a corpus");
  p->add_option("--config", per.config, "Perturbation config (JSON)");
  p->add_option("--corpus", per.corpus, "Input corpus (JSON)");
  p->add_option("--schema", per.schema, "Schema (JSON)");
  p->add_option("--out", per.out, "Output corpus path");
  p->add_option("--aux", per.aux, "Auxiliary utterance file");
  p->add_option("--source", per.source, "auxiliary | target | random_words");
  p->add_option("--position", per.position,
                "random_boundary | after_user_only | after_agent_only");
  p->add_option("--probability", per.probability, "Per-dialogue insertion probability");
  p->add_option("--num-insertions", per.num_insertions, "Utterances inserted");
  p->add_option("--seed", per.seed, "Seed");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train and evaluate one experiment");
  t->add_option("--config", tr.config, "Experiment spec (JSON)")->required();
  t->add_option("--seed", tr.seed, "Root seed override");
  t->add_option("--output-dir", tr.output_dir, "Parent directory for runs");
  t->add_flag("--overwrite", tr.overwrite, "Replace an existing run directory");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Evaluate predictions or a checkpoint");
  e->add_option("--config", ev.config, "Options as JSON");
  e->add_option("--predictions", ev.predictions, "Prediction dump (JSON lines)");
  e->add_option("--checkpoint", ev.checkpoint, "Model checkpoint");
  e->add_option("--corpus", ev.corpus, "Gold corpus (JSON)");
  e->add_option("--schema", ev.schema, "Schema (JSON)");
  e->add_option("--out", ev.out, "Report output path");

  CompareArgs cm;
  auto* c = app.add_subcommand("compare", "Relative JGA gains between two reports");
  c->add_option("--config", cm.config, "Options as JSON");
  c->add_option("--before", cm.before, "Baseline report");
  c->add_option("--after", cm.after, "Improved report");
  c->add_option("--label", cm.label, "Label of the comparison");
  c->add_option("--out-json", cm.out_json, "JSON output path");
  c->add_option("--out-csv", cm.out_csv, "CSV output path");

  SweepArgs sw;
  auto* s = app.add_subcommand("sweep", "Perturbation grid sweep");
  s->add_option("--config", sw.config, "Base experiment spec (JSON)")->required();
  s->add_option("--grid", sw.grid, "Grid override (JSON)");
  s->add_option("--out", sw.out, "CSV output path");
  s->add_option("--seed", sw.seed, "Root seed override");
  s->add_option("--output-dir", sw.output_dir, "Parent directory for runs");
  s->add_flag("--overwrite", sw.overwrite, "Replace existing run directories");

  CLI11_PARSE(app, argc, argv);
  try {
    if (g->parsed()) return CmdGenerate(gen);
    if (p->parsed()) return CmdPerturb(per);
    if (t->parsed()) return CmdTrain(tr);
    if (e->parsed()) return CmdEval(ev);
    if (c->parsed()) return CmdCompare(cm);
    if (s->parsed()) return CmdSweep(sw);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  return 1;
}
