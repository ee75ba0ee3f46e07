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

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

#include "dstlab/corpus.h"
#include "dstlab/dst_model.h"
#include "dstlab/evaluation.h"
#include "support/test_support.h"

namespace dstlab {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code = -1;
  std::string out;
};

Outcome RunCli(const std::string& args, const fs::path& dir) {
  const fs::path log = dir / "stdout.txt";
  const std::string cmd = std::string(DSTLAB_CLI_PATH) + " " + args + " > " + log.string() +
                          " 2> " + (dir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  Outcome o;
  if (WIFEXITED(status)) o.code = WEXITSTATUS(status);
  o.out = ReadFile(log);
  return o;
}

// Writes the tiny corpus, its schema and gold-copy predictions.
void WriteInputs(const fs::path& dir) {
  const Corpus corpus = testing::TinyCorpus();
  WriteFile(dir / "schema.json", corpus.schema.ToJson().dump(2));
  WriteFile(dir / "corpus.json", SerializeCorpus(corpus));
  std::vector<TurnPrediction> preds;
  for (const Dialogue& d : corpus.dialogues) {
    for (std::size_t t = 0; t < d.turns.size(); ++t) {
      if (!d.turns[t].gold_state) continue;
      TurnPrediction p;
      p.dialogue_id = d.id;
      p.turn_index = static_cast<int>(t);
      p.state = *d.turns[t].gold_state;
      preds.push_back(p);
    }
  }
  WriteFile(dir / "gold.jsonl", PredictionsToJsonl(preds, corpus.schema));
}

TEST(CliTest, EvalOfGoldCopyIsPerfect) {
  const fs::path dir = testing::TempDir("cli-eval");
  WriteInputs(dir);
  const Outcome o = RunCli("eval --schema " + (dir / "schema.json").string() + " --corpus " +
                               (dir / "corpus.json").string() + " --predictions " +
                               (dir / "gold.jsonl").string() + " --out " +
                               (dir / "report.json").string(),
                           dir);
  ASSERT_EQ(o.code, 0);
  EXPECT_EQ(o.out.rfind("jga_all=1\n", 0), 0u) << o.out;
  EXPECT_TRUE(fs::exists(dir / "report.json"));
}

TEST(CliTest, CompareOfIdenticalReportsHasNoGain) {
  const fs::path dir = testing::TempDir("cli-compare");
  WriteInputs(dir);
  ASSERT_EQ(RunCli("eval --schema " + (dir / "schema.json").string() + " --corpus " +
                       (dir / "corpus.json").string() + " --predictions " +
                       (dir / "gold.jsonl").string() + " --out " +
                       (dir / "report.json").string(),
                   dir)
                .code,
            0);
  const std::string r = (dir / "report.json").string();
  const Outcome o = RunCli("compare --before " + r + " --after " + r + " --label same --out-csv " +
                               (dir / "gains.csv").string(),
                           dir);
  ASSERT_EQ(o.code, 0);
  EXPECT_EQ(o.out,
            "step,bucket,before,after,relative_gain_pct\n"
            "same,short,1,1,0\nsame,long,1,1,0\nsame,all,1,1,0\n");
  EXPECT_EQ(ReadFile(dir / "gains.csv"), o.out);
}

TEST(CliTest, PerturbWithZeroProbabilityKeepsCorpus) {
  const fs::path dir = testing::TempDir("cli-perturb");
  WriteInputs(dir);
  const Outcome o = RunCli("perturb --schema " + (dir / "schema.json").string() + " --corpus " +
                               (dir / "corpus.json").string() + " --out " +
                               (dir / "out.json").string() +
                               " --source target --probability 0 --seed 4",
                           dir);
  ASSERT_EQ(o.code, 0);
  EXPECT_EQ(ReadFile(dir / "out.json"), ReadFile(dir / "corpus.json"));
  EXPECT_TRUE(fs::exists(dir / "out.json.manifest.json"));
}

TEST(CliTest, GenerateWritesManifest) {
  const fs::path dir = testing::TempDir("cli-generate");
  const Outcome o =
      RunCli("generate --num-dialogues 20 --seed 2 --out " + (dir / "data").string(), dir);
  ASSERT_EQ(o.code, 0);
  for (const char* f : {"schema.json", "train.json", "dev.json", "test.json", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(dir / "data" / f)) << f;
  }
}

TEST(CliTest, ErrorsExitWithCodeTwo) {
  const fs::path dir = testing::TempDir("cli-errors");
  WriteInputs(dir);
  EXPECT_EQ(RunCli("eval --corpus " + (dir / "missing.json").string() + " --schema " +
                       (dir / "schema.json").string() + " --predictions x",
                   dir)
                .code,
            2);
  EXPECT_EQ(RunCli("perturb --schema " + (dir / "schema.json").string() + " --corpus " +
                       (dir / "corpus.json").string() + " --out " + (dir / "o.json").string() +
                       " --probability 1.5",
                   dir)
                .code,
            2);
  EXPECT_NE(ReadFile(dir / "stderr.txt").find("probability"), std::string::npos);
  EXPECT_NE(RunCli("no-such-command", dir).code, 0);
}

}  // namespace
}  // namespace dstlab
