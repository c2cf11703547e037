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

// fedleak: run federated memorization and PII extraction experiments.
//
//   fedleak <stage> --config exp.toml [--set key=value ...] [--force]
//
// Stages: partition, train, attack, evaluate, defend, sweep, cross-client,
// report. `synthesize` writes a synthetic corpus without a config.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fedleak/corpus.h"
#include "fedleak/error.h"
#include "fedleak/experiment.h"
#include "fedleak/synthetic.h"

namespace {

constexpr int kExitStageFailed = 1;
constexpr int kExitBadConfig = 2;

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string output_dir;
  bool force = false;
};

void AddCommon(CLI::App* sub, CommonOptions& opts) {
  sub->add_option("-c,--config", opts.config_path, "experiment config (.json or .toml)")
      ->required();
  sub->add_option("--set", opts.overrides, "override a config field, e.g. attack.lambda=10");
  sub->add_option("-o,--output-dir", opts.output_dir, "override output_dir");
  sub->add_flag("-f,--force", opts.force, "rerun the stage even if it is up to date");
}

fedleak::ExperimentConfig LoadConfig(const CommonOptions& opts) {
  nlohmann::json doc = fedleak::LoadConfigDocument(opts.config_path);
  for (const auto& o : opts.overrides) fedleak::ApplyOverride(doc, o);
  if (!opts.output_dir.empty()) doc["output_dir"] = opts.output_dir;
  return fedleak::ConfigFromJson(doc);
}

std::vector<std::int64_t> ParseBudgets(const std::string& list) {
  std::vector<std::int64_t> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size() || v < 1) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw fedleak::ConfigError("--budget-sweep: '" + item + "' is not a positive integer");
    }
  }
  if (out.empty()) throw fedleak::ConfigError("--budget-sweep: empty list");
  return out;
}

std::optional<std::string> RemoteToken() {
  const char* t = std::getenv("FEDLEAK_REMOTE_TOKEN");
  if (t == nullptr || *t == '\0') return std::nullopt;
  return std::string(t);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated n-gram memorization simulator and PII extraction harness"};
  app.require_subcommand(1);

  CommonOptions opts;
  std::string budget_sweep;
  std::string compare;

  struct StageCommand {
    CLI::App* app;
    std::function<void(fedleak::Experiment&)> run;
  };
  std::vector<StageCommand> stages;
  auto add_stage = [&](const char* name, const char* help,
                       std::function<void(fedleak::Experiment&)> run) {
    CLI::App* sub = app.add_subcommand(name, help);
    AddCommon(sub, opts);
    stages.push_back({sub, std::move(run)});
    return sub;
  };

  add_stage("partition", "split the corpus into client shards",
            [&](fedleak::Experiment& e) { e.Partition(opts.force); });
  add_stage("train", "run federated training and write per-round checkpoints",
            [&](fedleak::Experiment& e) { e.Train(opts.force); });
  auto* attack = add_stage("attack", "query the global model with attacker prefixes",
                           [&](fedleak::Experiment& e) {
                             std::optional<std::vector<std::int64_t>> budgets;
                             if (!budget_sweep.empty()) budgets = ParseBudgets(budget_sweep);
                             e.Attack(opts.force, budgets);
                           });
  attack->add_option("--budget-sweep", budget_sweep,
                     "comma-separated budgets; writes reports/budget_sweep.csv");
  auto* evaluate = add_stage("evaluate", "score the attack against the victim's PII",
                             [&](fedleak::Experiment& e) {
                               e.Evaluate(opts.force, compare == "base");
                             });
  evaluate->add_option("--compare", compare, "set-difference against a reference model")
      ->check(CLI::IsMember({"base"}));
  add_stage("defend", "compare masked and unmasked training",
            [&](fedleak::Experiment& e) { e.Defend(opts.force); });
  add_stage("sweep", "budget sweep (config attack.budget_sweep or the default)",
            [&](fedleak::Experiment& e) { e.Sweep(opts.force); });
  add_stage("cross-client", "attack every ordered client pair",
            [&](fedleak::Experiment& e) { e.CrossClient(opts.force); });
  add_stage("report", "collect all reports into reports/summary.json",
            [&](fedleak::Experiment& e) { e.Report(opts.force); });

  fedleak::SyntheticSpec synth;
  std::string synth_out;
  CLI::App* synthesize = app.add_subcommand("synthesize", "write a synthetic corpus as JSONL");
  synthesize->add_option("-o,--out", synth_out, "output JSONL path")->required();
  synthesize->add_option("--docs", synth.num_docs, "number of documents");
  synthesize->add_option("--tags", synth.num_tags, "number of task tags");
  synthesize->add_option("--persons-per-tag", synth.persons_per_tag, "person pool size per tag");
  synthesize->add_option("--zipf", synth.zipf_exponent, "Zipf exponent of person popularity");
  synthesize->add_option("--seed", synth.seed, "generator seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synthesize->parsed()) {
      fedleak::Emit(fedleak::GenerateSyntheticCorpus(synth), synth_out);
      return 0;
    }
    fedleak::ExperimentConfig cfg;
    try {
      cfg = LoadConfig(opts);
    } catch (const fedleak::ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return kExitBadConfig;
    }
    fedleak::Experiment experiment(std::move(cfg), std::cout, RemoteToken());
    for (auto& s : stages) {
      if (s.app->parsed()) s.run(experiment);
    }
  } catch (const fedleak::StageError& e) {
    std::cerr << e.what() << "\n";
    return kExitStageFailed;
  } catch (const fedleak::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitBadConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitStageFailed;
  }
  return 0;
}
