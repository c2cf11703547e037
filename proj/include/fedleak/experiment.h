// Copyright 2026 The FedLeak Authors
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

#ifndef FEDLEAK_EXPERIMENT_H_
#define FEDLEAK_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "fedleak/attack.h"
#include "fedleak/backend.h"
#include "fedleak/defense.h"
#include "fedleak/error.h"
#include "fedleak/federation.h"
#include "fedleak/partition.h"
#include "fedleak/remote_backend.h"
#include "fedleak/synthetic.h"
#include "json.hpp"

namespace fedleak {

struct LaftConfig {
  std::size_t k_prefixes = 1000;
  std::size_t k_pii = 1000;
  double weight = 1.0;
};

struct DefenseConfig {
  MaskingPolicy policy;
  bool prefixes_from_masked = false;
};

// A complete, declarative experiment. Either `corpus_path` or `synthetic`
// names the global corpus.
struct ExperimentConfig {
  std::string corpus_path;
  std::optional<SyntheticSpec> synthetic;
  TokenizerMode tokenizer = TokenizerMode::kCodepoint;
  PartitionSpec partition;
  FlConfig fl;
  AttackConfig attack;
  PrefixProvenance prefix_set = PrefixProvenance::kContextual;
  int attacker_id = 0;
  int victim_id = 1;
  bool all_pairs = false;
  std::string backend = "builtin";  // or "remote"
  RemoteBackendConfig remote;
  std::optional<LaftConfig> laft;
  std::optional<DefenseConfig> defense;
  std::vector<std::int64_t> budget_sweep;  // empty: default sweep
  std::optional<std::string> base_checkpoint;
  std::filesystem::path output_dir;

  // Throws ConfigError naming the offending field.
  void Validate() const;
};

// Reads JSON, or TOML when the extension is .toml, into a JSON tree.
nlohmann::json LoadConfigDocument(const std::filesystem::path& path);

// Sets a dotted key ("attack.lambda=10"). The value is parsed as JSON when
// possible and taken as a string otherwise.
void ApplyOverride(nlohmann::json& doc, std::string_view assignment);

// Unknown keys and ill-typed values throw ConfigError with the field path.
ExperimentConfig ConfigFromJson(const nlohmann::json& doc);

// Canonical form; output_dir is left out unless requested so that reports
// from different output directories compare equal.
nlohmann::json ConfigToJson(const ExperimentConfig& cfg,
                            bool include_output_dir = false);

// FNV-1a 64 of the canonical form, as 16 hex digits.
std::string ConfigHash(const ExperimentConfig& cfg);

enum class Stage {
  kPartition,
  kTrain,
  kAttack,
  kEvaluate,
  kDefend,
  kSweep,
  kCrossClient,
  kReport,
};

std::string_view StageName(Stage s);

// Error raised while a stage runs; what() names the stage.
class StageError : public Error {
 public:
  StageError(Stage stage, const std::string& what)
      : Error("stage '" + std::string(StageName(stage)) + "' failed: " + what),
        stage_(stage) {}
  Stage stage() const { return stage_; }

 private:
  Stage stage_;
};

// Runs pipeline stages under cfg.output_dir. Each stage writes its
// artifacts, then a marker carrying the config hash; a stage whose marker
// matches the current config is skipped unless forced. Missing upstream
// stages run first.
class Experiment {
 public:
  Experiment(ExperimentConfig cfg, std::ostream& log,
             std::optional<std::string> remote_token = std::nullopt);

  const ExperimentConfig& config() const { return cfg_; }

  void Partition(bool force = false);
  void Train(bool force = false);
  // With `budget_sweep`, also writes the sweep CSV for those budgets.
  void Attack(bool force = false,
              std::optional<std::vector<std::int64_t>> budget_sweep = std::nullopt);
  void Evaluate(bool force = false, bool compare_base = false);
  void Defend(bool force = false);
  void Sweep(bool force = false);
  void CrossClient(bool force = false);
  void Report(bool force = false);

  // Artifact locations.
  std::filesystem::path ShardDir() const;
  std::filesystem::path CheckpointDir() const;
  std::filesystem::path AttackDir() const;
  std::filesystem::path ReportDir() const;

 private:
  bool Done(Stage s) const;
  void MarkDone(Stage s) const;
  bool ShouldSkip(Stage s, bool force);
  template <typename F>
  void RunStage(Stage s, bool force, F&& body);
  void WriteManifest() const;

  std::vector<AnnotatedCorpus> LoadShards() const;
  std::unique_ptr<GenerationBackend> MakeBackend(
      const std::vector<AnnotatedCorpus>& shards) const;
  AttackOutcome RunAttack(const std::vector<AnnotatedCorpus>& shards,
                          const GenerationBackend& backend,
                          std::optional<std::int64_t> budget_override,
                          bool use_journal) const;
  nlohmann::json Provenance() const;
  void WriteSweep(const AttackOutcome& full,
                  const std::vector<std::int64_t>& budgets) const;

  ExperimentConfig cfg_;
  std::ostream& log_;
  std::optional<std::string> remote_token_;
  std::string hash_;
};

// Writes `content` to `path` through a temporary file and rename.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view content);

}  // namespace fedleak

#endif  // FEDLEAK_EXPERIMENT_H_
