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

#ifndef DSTLAB_EXPERIMENT_H_
#define DSTLAB_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dstlab/corpus.h"
#include "dstlab/dst_model.h"
#include "dstlab/evaluation.h"
#include "dstlab/perturbation.h"
#include "dstlab/synthetic.h"
#include "dstlab/training.h"
#include "json.hpp"

namespace dstlab {

inline constexpr const char* kSeedEnvVar = "DSTLAB_SEED";

// DSTLAB_SEED, when set, replaces `seed`.
std::uint64_t ResolveSeed(std::uint64_t seed);

struct ExperimentSpec {
  std::string name = "run";
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> schema_path;
  std::optional<std::filesystem::path> train_path, dev_path, test_path;
  // Synthetic corpus description, used when no corpus files are given.
  std::optional<nlohmann::json> synthetic;
  // Fixed corpus seed; derived from `seed` when absent.
  std::optional<std::uint64_t> synthetic_seed;
  AuxiliarySource auxiliary;
  ModelConfig model;
  TrainConfig train;
  Split eval_split = Split::kDev;
  std::filesystem::path output_dir = "runs";
  // Directory relative paths are resolved against.
  std::filesystem::path base_dir;
};

nlohmann::ordered_json ExperimentSpecToJson(const ExperimentSpec& spec);
ExperimentSpec ExperimentSpecFromJson(const nlohmann::json& j,
                                      const std::filesystem::path& base_dir = {});
ExperimentSpec LoadExperimentSpec(const std::filesystem::path& path);

struct ExperimentData {
  CorpusSplits splits;
  std::vector<std::string> auxiliary;
  nlohmann::ordered_json input_hashes;
};

ExperimentData LoadExperimentData(const ExperimentSpec& spec);

struct RunResult {
  std::filesystem::path run_dir;
  EvalReport report;
};

// `{output_dir}/{name}-seed{seed}`.
std::filesystem::path RunDirectory(const ExperimentSpec& spec);

// Trains, checkpoints to `{run}/step-{n}/`, evaluates on the eval split and
// writes the frozen spec, input hashes, metrics log, predictions and report.
RunResult RunExperiment(const ExperimentSpec& spec, bool overwrite,
                        const ExperimentData* data = nullptr,
                        std::ostream* log = nullptr);

struct GenerateResult {
  nlohmann::ordered_json manifest;
  CorpusSplits splits;
};

// Writes schema.json, train/dev/test.json and manifest.json into `out_dir`.
GenerateResult GenerateCorpusFiles(const SynthConfig& config, std::uint64_t seed,
                                   const std::filesystem::path& out_dir);

struct SweepGrid {
  std::vector<InsertionSource> sources;
  std::vector<double> probabilities;
  std::vector<int> num_insertions;
  std::vector<PositionPolicy> positions;
};

// Source x p in {0.2, 0.4, 0.6} x N in {2, 3, 4} x three position policies.
SweepGrid DefaultSweepGrid();
SweepGrid SweepGridFromJson(const nlohmann::json& j);

struct SweepCell {
  PerturbationConfig perturbation;
  bool ok = false;
  std::string error;
  std::optional<EvalReport> report;
};

using CellRunner = std::function<EvalReport(const ExperimentSpec&)>;

// Runs every grid cell in order; a failing cell is recorded and skipped.
std::vector<SweepCell> RunSweep(const ExperimentSpec& base, const SweepGrid& grid,
                                const CellRunner& runner);

std::string SweepToCsv(const std::vector<SweepCell>& cells);

}  // namespace dstlab

#endif  // DSTLAB_EXPERIMENT_H_
