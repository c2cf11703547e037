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

#include "fedleak/experiment.h"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "fedleak/judge.h"
#include "fedleak/query.h"
#include "toml.hpp"

namespace fedleak {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Typed access to one config table with field-path error messages. Keys that
// are never looked up are reported as unknown by Finish().
class Table {
 public:
  Table(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(Name() + ": expected a table");
  }

  std::string Field(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  const json* Find(std::string_view key) {
    seen_.insert(std::string(key));
    auto it = j_.find(std::string(key));
    return it == j_.end() || it->is_null() ? nullptr : &*it;
  }

  template <typename T>
  T Get(std::string_view key, T fallback) {
    const json* v = Find(key);
    if (v == nullptr) return fallback;
    return Convert<T>(*v, key);
  }

  template <typename T>
  std::optional<T> Opt(std::string_view key) {
    const json* v = Find(key);
    if (v == nullptr) return std::nullopt;
    return Convert<T>(*v, key);
  }

  Table Sub(std::string_view key) {
    static const json kEmpty = json::object();
    const json* v = Find(key);
    return Table(v == nullptr ? kEmpty : *v, Field(key));
  }

  bool Has(std::string_view key) const {
    auto it = j_.find(std::string(key));
    return it != j_.end() && !it->is_null();
  }

  void Finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.contains(k)) throw ConfigError(Field(k) + ": unknown field");
    }
  }

 private:
  std::string Name() const { return path_.empty() ? "config" : path_; }

  template <typename T>
  T Convert(const json& v, std::string_view key) const {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(Field(key) + ": expected a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(Field(key) + ": expected an integer");
      if (std::is_unsigned_v<T> && v.get<std::int64_t>() < 0) {
        throw ConfigError(Field(key) + ": must be non-negative");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(Field(key) + ": expected a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(Field(key) + ": expected a string");
    } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
      if (!v.is_array()) throw ConfigError(Field(key) + ": expected an array of strings");
      for (const auto& e : v) {
        if (!e.is_string()) throw ConfigError(Field(key) + ": expected an array of strings");
      }
    } else if constexpr (std::is_same_v<T, std::vector<std::int64_t>>) {
      if (!v.is_array()) throw ConfigError(Field(key) + ": expected an array of integers");
      for (const auto& e : v) {
        if (!e.is_number_integer()) {
          throw ConfigError(Field(key) + ": expected an array of integers");
        }
      }
    }
    return v.get<T>();
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

// Runs `parse` and prefixes any ConfigError from it with the field name.
template <typename F>
auto Parsed(const std::string& field, F&& parse) {
  try {
    return parse();
  } catch (const ConfigError& e) {
    throw ConfigError(field + ": " + e.what());
  }
}

std::uint64_t Fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StorageError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string Dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

void WriteFileAtomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw StorageError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw StorageError("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

json LoadConfigDocument(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path.string());
  const std::string text = ReadFile(path);
  if (path.extension() == ".toml") {
    try {
      const toml::table tbl = toml::parse(text, path.string());
      std::ostringstream ss;
      ss << toml::json_formatter{tbl};
      return json::parse(ss.str());
    } catch (const toml::parse_error& e) {
      std::ostringstream msg;
      msg << path.string() << ": line " << e.source().begin.line << ": "
          << e.description();
      throw ConfigError(msg.str());
    }
  }
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void ApplyOverride(json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string value(assignment.substr(eq + 1));
  json* node = &doc;
  std::size_t pos = 0;
  while (true) {
    const auto dot = key.find('.', pos);
    const std::string part = key.substr(pos, dot - pos);
    if (part.empty()) throw ConfigError("override key '" + key + "' is malformed");
    if (!node->is_object()) throw ConfigError("override key '" + key + "' crosses a non-table");
    if (dot == std::string::npos) {
      json parsed = json::parse(value, nullptr, /*allow_exceptions=*/false);
      (*node)[part] = parsed.is_discarded() ? json(value) : std::move(parsed);
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    pos = dot + 1;
  }
}

ExperimentConfig ConfigFromJson(const json& doc) {
  ExperimentConfig cfg;
  Table root(doc, "");
  const auto seed = root.Get<std::uint64_t>("seed", 0);
  cfg.corpus_path = root.Get<std::string>("corpus_path", "");
  if (root.Has("synthetic")) {
    Table t = root.Sub("synthetic");
    SyntheticSpec s;
    s.num_docs = t.Get<std::size_t>("num_docs", s.num_docs);
    s.num_tags = t.Get<int>("num_tags", s.num_tags);
    s.persons_per_tag = t.Get<int>("persons_per_tag", s.persons_per_tag);
    s.zipf_exponent = t.Get<double>("zipf_exponent", s.zipf_exponent);
    s.seed = t.Get<std::uint64_t>("seed", seed);
    t.Finish();
    cfg.synthetic = s;
  }
  cfg.tokenizer = Parsed("tokenizer", [&] {
    return ParseTokenizerMode(
        root.Get<std::string>("tokenizer", cfg.synthetic ? "whitespace" : "codepoint"));
  });
  if (cfg.synthetic) cfg.synthetic->tokenizer = cfg.tokenizer;

  {
    Table t = root.Sub("partition");
    auto& p = cfg.partition;
    p.num_clients = t.Get<int>("num_clients", p.num_clients);
    p.skew_alpha = t.Get<double>("skew_alpha", p.skew_alpha);
    p.seed = t.Get<std::uint64_t>("seed", seed);
    p.strategy = Parsed("partition.strategy", [&] {
      return ParsePartitionStrategy(t.Get<std::string>("strategy", "by-label-skew"));
    });
    t.Finish();
  }
  {
    Table t = root.Sub("fl");
    auto& f = cfg.fl;
    f.rounds = t.Get<int>("rounds", f.rounds);
    f.num_clients = t.Get<int>("num_clients", cfg.partition.num_clients);
    f.aggregator = Parsed("fl.aggregator", [&] {
      return ParseAggregator(t.Get<std::string>("aggregator", "fedavg-weighted"));
    });
    f.learner_order = t.Get<int>("learner_order", f.learner_order);
    f.backoff_factor = t.Get<double>("backoff_factor", f.backoff_factor);
    f.seed = t.Get<std::uint64_t>("seed", seed);
    f.local_step = Parsed("fl.local_step", [&] {
      return ParseLocalStep(t.Get<std::string>("local_step", "stateless"));
    });
    t.Finish();
  }
  {
    Table t = root.Sub("attack");
    auto& a = cfg.attack;
    a.lambda = t.Get<int>("lambda", a.lambda);
    a.samples_per_prefix = t.Get<int>("samples_per_prefix", a.samples_per_prefix);
    a.max_new_tokens = t.Get<int>("max_new_tokens", a.max_new_tokens);
    a.budget = t.Opt<std::int64_t>("budget");
    a.freq_threshold = t.Opt<std::int64_t>("freq_threshold");
    a.temperature = t.Get<double>("temperature", a.temperature);
    a.seed = t.Get<std::uint64_t>("seed", seed);
    cfg.prefix_set = Parsed("attack.prefix_set", [&] {
      return ParsePrefixProvenance(t.Get<std::string>("prefix_set", "contextual"));
    });
    cfg.budget_sweep = t.Get<std::vector<std::int64_t>>("budget_sweep", {});
    t.Finish();
  }
  cfg.attacker_id = root.Get<int>("attacker_id", cfg.attacker_id);
  if (const json* v = root.Find("victim_id")) {
    if (v->is_string() && v->get<std::string>() == "all-pairs") {
      cfg.all_pairs = true;
    } else if (v->is_number_integer()) {
      cfg.victim_id = v->get<int>();
    } else {
      throw ConfigError("victim_id: expected an integer or \"all-pairs\"");
    }
  }
  {
    Table t = root.Sub("backend");
    cfg.backend = t.Get<std::string>("type", "builtin");
    auto& r = cfg.remote;
    r.endpoint_url = t.Get<std::string>("endpoint_url", "");
    r.timeout_seconds = t.Get<double>("timeout_seconds", r.timeout_seconds);
    r.max_retries = t.Get<int>("max_retries", r.max_retries);
    r.max_concurrency = t.Get<int>("max_concurrency", r.max_concurrency);
    t.Finish();
  }
  if (root.Has("laft")) {
    Table t = root.Sub("laft");
    LaftConfig l;
    l.k_prefixes = t.Get<std::size_t>("k_prefixes", l.k_prefixes);
    l.k_pii = t.Get<std::size_t>("k_pii", l.k_pii);
    l.weight = t.Get<double>("weight", l.weight);
    t.Finish();
    cfg.laft = l;
  }
  if (root.Has("defense")) {
    Table t = root.Sub("defense");
    DefenseConfig d;
    d.policy.mask_char = t.Get<std::string>("mask_char", "*");
    d.policy.scope = Parsed("defense.scope", [&] {
      return ParseMaskScope(t.Get<std::string>("scope", "all-labels"));
    });
    for (auto& l : t.Get<std::vector<std::string>>("labels", {})) {
      d.policy.labels.insert(l);
    }
    d.prefixes_from_masked = t.Get<bool>("prefixes_from_masked", false);
    t.Finish();
    cfg.defense = d;
  }
  if (root.Has("compare")) {
    Table t = root.Sub("compare");
    cfg.base_checkpoint = t.Opt<std::string>("base_checkpoint");
    t.Finish();
  }
  cfg.output_dir = root.Get<std::string>("output_dir", "");
  root.Finish();
  cfg.Validate();
  return cfg;
}

void ExperimentConfig::Validate() const {
  if (corpus_path.empty() && !synthetic) {
    throw ConfigError("corpus_path: required unless a [synthetic] table is given");
  }
  if (!corpus_path.empty() && synthetic) {
    throw ConfigError("corpus_path: cannot be combined with [synthetic]");
  }
  if (synthetic) Parsed("synthetic", [&] { synthetic->Validate(); return 0; });
  partition.Validate();
  fl.Validate();
  if (fl.num_clients != partition.num_clients) {
    throw ConfigError("fl.num_clients: must equal partition.num_clients");
  }
  attack.Validate();
  for (auto b : budget_sweep) {
    if (b < 1) throw ConfigError("attack.budget_sweep: budgets must be >= 1");
  }
  if (attacker_id < 0 || attacker_id >= partition.num_clients) {
    throw ConfigError("attacker_id: must be in [0, partition.num_clients)");
  }
  if (!all_pairs) {
    if (victim_id < 0 || victim_id >= partition.num_clients) {
      throw ConfigError("victim_id: must be in [0, partition.num_clients)");
    }
    if (victim_id == attacker_id) {
      throw ConfigError("victim_id: must differ from attacker_id");
    }
  }
  if (backend == "remote") {
    Parsed("backend", [&] { remote.Validate(); return 0; });
    if (laft) throw ConfigError("laft: not supported with the remote backend");
    if (defense) throw ConfigError("defense: needs the builtin backend");
  } else if (backend != "builtin") {
    throw ConfigError("backend.type: expected builtin or remote");
  }
  if (laft && !(laft->weight >= 0)) throw ConfigError("laft.weight: must be >= 0");
  if (defense) Parsed("defense", [&] { defense->policy.Validate(); return 0; });
  if (output_dir.empty()) throw ConfigError("output_dir: required");
}

json ConfigToJson(const ExperimentConfig& cfg, bool include_output_dir) {
  json j;
  if (cfg.synthetic) {
    const auto& s = *cfg.synthetic;
    j["synthetic"] = {{"num_docs", s.num_docs},
                      {"num_tags", s.num_tags},
                      {"persons_per_tag", s.persons_per_tag},
                      {"zipf_exponent", s.zipf_exponent},
                      {"seed", s.seed}};
  } else {
    j["corpus_path"] = cfg.corpus_path;
  }
  j["tokenizer"] = TokenizerModeName(cfg.tokenizer);
  j["partition"] = {{"num_clients", cfg.partition.num_clients},
                    {"skew_alpha", cfg.partition.skew_alpha},
                    {"seed", cfg.partition.seed},
                    {"strategy", PartitionStrategyName(cfg.partition.strategy)}};
  j["fl"] = {{"rounds", cfg.fl.rounds},
             {"num_clients", cfg.fl.num_clients},
             {"aggregator", AggregatorName(cfg.fl.aggregator)},
             {"learner_order", cfg.fl.learner_order},
             {"backoff_factor", cfg.fl.backoff_factor},
             {"seed", cfg.fl.seed},
             {"local_step", LocalStepName(cfg.fl.local_step)}};
  json attack = AttackConfigToJson(cfg.attack);
  attack["prefix_set"] = PrefixProvenanceName(cfg.prefix_set);
  attack["budget_sweep"] = cfg.budget_sweep;
  j["attack"] = std::move(attack);
  j["attacker_id"] = cfg.attacker_id;
  j["victim_id"] = cfg.all_pairs ? json("all-pairs") : json(cfg.victim_id);
  json backend = {{"type", cfg.backend}};
  if (cfg.backend == "remote") {
    backend["endpoint_url"] = cfg.remote.endpoint_url;
    backend["timeout_seconds"] = cfg.remote.timeout_seconds;
    backend["max_retries"] = cfg.remote.max_retries;
    backend["max_concurrency"] = cfg.remote.max_concurrency;
  }
  j["backend"] = std::move(backend);
  if (cfg.laft) {
    j["laft"] = {{"k_prefixes", cfg.laft->k_prefixes},
                 {"k_pii", cfg.laft->k_pii},
                 {"weight", cfg.laft->weight}};
  }
  if (cfg.defense) {
    const auto& p = cfg.defense->policy;
    j["defense"] = {{"mask_char", p.mask_char},
                    {"scope", MaskScopeName(p.scope)},
                    {"labels", p.labels},
                    {"prefixes_from_masked", cfg.defense->prefixes_from_masked}};
  }
  if (cfg.base_checkpoint) j["compare"] = {{"base_checkpoint", *cfg.base_checkpoint}};
  if (include_output_dir) j["output_dir"] = cfg.output_dir.string();
  return j;
}

std::string ConfigHash(const ExperimentConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(Fnv1a64(ConfigToJson(cfg).dump())));
  return buf;
}

std::string_view StageName(Stage s) {
  switch (s) {
    case Stage::kPartition: return "partition";
    case Stage::kTrain: return "train";
    case Stage::kAttack: return "attack";
    case Stage::kEvaluate: return "evaluate";
    case Stage::kDefend: return "defend";
    case Stage::kSweep: return "sweep";
    case Stage::kCrossClient: return "cross-client";
    case Stage::kReport: return "report";
  }
  return "unknown";
}

Experiment::Experiment(ExperimentConfig cfg, std::ostream& log,
                       std::optional<std::string> remote_token)
    : cfg_(std::move(cfg)), log_(log), remote_token_(std::move(remote_token)) {
  cfg_.Validate();
  hash_ = ConfigHash(cfg_);
}

fs::path Experiment::ShardDir() const { return cfg_.output_dir / "shards"; }
fs::path Experiment::CheckpointDir() const { return cfg_.output_dir / "checkpoints"; }
fs::path Experiment::AttackDir() const { return cfg_.output_dir / "attack"; }
fs::path Experiment::ReportDir() const { return cfg_.output_dir / "reports"; }

namespace {

fs::path MarkerPath(const fs::path& root, Stage s) {
  return root / "stages" / (std::string(StageName(s)) + ".done");
}

constexpr Stage kAllStages[] = {Stage::kPartition, Stage::kTrain,  Stage::kAttack,
                                Stage::kEvaluate,  Stage::kDefend, Stage::kSweep,
                                Stage::kCrossClient, Stage::kReport};

}  // namespace

bool Experiment::Done(Stage s) const {
  const fs::path p = MarkerPath(cfg_.output_dir, s);
  return fs::exists(p) && ReadFile(p) == hash_ + "\n";
}

void Experiment::MarkDone(Stage s) const {
  WriteFileAtomic(MarkerPath(cfg_.output_dir, s), hash_ + "\n");
}

template <typename F>
void Experiment::RunStage(Stage s, bool force, F&& body) {
  if (!force && Done(s)) {
    log_ << "[" << StageName(s) << "] up to date, skipping (use --force to rerun)\n";
    return;
  }
  log_ << "[" << StageName(s) << "] running\n";
  try {
    body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(s, e.what());
  }
  MarkDone(s);
  WriteManifest();
  log_ << "[" << StageName(s) << "] done\n";
}

json Experiment::Provenance() const {
  json seeds = {{"partition", cfg_.partition.seed},
                {"fl", cfg_.fl.seed},
                {"attack", cfg_.attack.seed}};
  if (cfg_.synthetic) seeds["synthetic"] = cfg_.synthetic->seed;
  return {{"config", ConfigToJson(cfg_)}, {"config_hash", hash_}, {"seeds", seeds}};
}

void Experiment::WriteManifest() const {
  json m = Provenance();
  m["output_dir"] = cfg_.output_dir.string();
  json stages = json::object();
  for (Stage s : kAllStages) stages[std::string(StageName(s))] = Done(s);
  m["stages"] = std::move(stages);
  WriteFileAtomic(cfg_.output_dir / "manifest.json", Dump(m));
}

std::vector<AnnotatedCorpus> Experiment::LoadShards() const {
  return ReadPartition(ShardDir(), cfg_.tokenizer);
}

void Experiment::Partition(bool force) {
  RunStage(Stage::kPartition, force, [&] {
    const AnnotatedCorpus corpus =
        cfg_.synthetic ? GenerateSyntheticCorpus(*cfg_.synthetic)
                       : Ingest(cfg_.corpus_path, cfg_.tokenizer, "global");
    const auto shards = fedleak::Partition(corpus, cfg_.partition);
    WritePartition(shards, cfg_.partition, ShardDir());
    for (const auto& s : shards) {
      log_ << "  " << s.owner << ": " << s.documents.size() << " docs, "
           << s.NumTokens() << " tokens, " << s.spans.size() << " spans\n";
    }
  });
}

void Experiment::Train(bool force) {
  RunStage(Stage::kTrain, force, [&] {
    if (!Done(Stage::kPartition)) Partition();
    if (cfg_.backend == "remote") {
      log_ << "  remote backend: nothing to train\n";
      return;
    }
    const auto shards = LoadShards();
    const CheckpointStore store(CheckpointDir());
    const FederationResult fed = RunFederation(shards, cfg_.fl, &store);
    json rounds = json::array();
    for (const auto& r : fed.logs) {
      rounds.push_back({{"round", r.round},
                        {"per_client_token_counts", r.per_client_token_counts},
                        {"weights", r.weights},
                        {"global_checkpoint", r.global_checkpoint_ref}});
    }
    WriteFileAtomic(CheckpointDir() / "rounds.json", Dump(rounds));
    log_ << "  " << fed.logs.size() << " rounds, final model has "
         << fed.global.NumEntries() << " entries\n";
  });
}

std::unique_ptr<GenerationBackend> Experiment::MakeBackend(
    const std::vector<AnnotatedCorpus>& shards) const {
  if (cfg_.backend == "remote") {
    RemoteBackendConfig rc = cfg_.remote;
    rc.auth_token = remote_token_;
    return std::make_unique<RemoteBackend>(rc, cfg_.tokenizer);
  }
  const std::string ref = "round_" + std::to_string(cfg_.fl.rounds) + "/global.model";
  auto backend = std::make_unique<NGramBackend>(
      CheckpointStore(CheckpointDir()).Load(ref));
  if (!cfg_.laft) return backend;
  const AnnotatedCorpus& attacker = shards.at(static_cast<std::size_t>(cfg_.attacker_id));
  const auto ranked =
      FrequencySelect(BuildContextual(Concatenate(attacker), cfg_.attack.lambda));
  const auto prefixes = PrefixTokens(ranked);
  const auto pii = UniqueSurfaces(attacker);
  const auto pairs = BuildLaftDataset(prefixes, pii, cfg_.laft->k_prefixes,
                                      cfg_.laft->k_pii, cfg_.attack.seed);
  return backend->FinetunePairs(pairs, cfg_.laft->weight);
}

AttackOutcome Experiment::RunAttack(const std::vector<AnnotatedCorpus>& shards,
                                    const GenerationBackend& backend,
                                    std::optional<std::int64_t> budget,
                                    bool use_journal) const {
  AttackConfig ac = cfg_.attack;
  ac.budget = budget;
  std::optional<QueryJournal> journal;
  if (use_journal) {
    fs::create_directories(AttackDir());
    journal.emplace(AttackDir() / ("journal-" + hash_ + ".jsonl"), cfg_.tokenizer);
  }
  AttackOutcome out = RunPrefixAttack(
      backend, shards.at(static_cast<std::size_t>(cfg_.attacker_id)),
      shards.at(static_cast<std::size_t>(cfg_.victim_id)), ac, cfg_.prefix_set,
      journal ? &*journal : nullptr);
  return out;
}

void Experiment::WriteSweep(const AttackOutcome& full,
                            const std::vector<std::int64_t>& budgets) const {
  const auto rows = BudgetSweep(full, budgets);
  WriteFileAtomic(ReportDir() / "budget_sweep.csv", SweepToCsv(rows));
  json j = Provenance();
  j["budgets"] = budgets;
  j["csv"] = "budget_sweep.csv";
  WriteFileAtomic(ReportDir() / "budget_sweep.json", Dump(j));
  for (const auto& r : rows) {
    log_ << "  B=" << r.budget << " CR="
         << (r.cr ? r.cr->Percent(kCrPercentDecimals) : "undefined")
         << " EF=" << r.ef.Percent(kEfPercentDecimals) << "\n";
  }
}

void Experiment::Attack(bool force, std::optional<std::vector<std::int64_t>> budget_sweep) {
  if (cfg_.all_pairs) {
    CrossClient(force);
    return;
  }
  RunStage(Stage::kAttack, force, [&] {
    if (!Done(Stage::kTrain)) Train();
    const auto shards = LoadShards();
    const auto backend = MakeBackend(shards);
    const fs::path journal = AttackDir() / ("journal-" + hash_ + ".jsonl");
    if (force && fs::exists(journal)) fs::remove(journal);
    const AttackOutcome out = RunAttack(shards, *backend, cfg_.attack.budget, true);

    std::string prefixes;
    for (std::size_t i = 0; i < out.prefixes.size(); ++i) {
      prefixes += json{{"rank", i},
                       {"prefix", Detokenize(out.prefixes[i].tokens, cfg_.tokenizer)},
                       {"count", out.prefixes[i].count}}
                      .dump() +
                  "\n";
    }
    WriteFileAtomic(AttackDir() / "prefixes.jsonl", prefixes);
    if (!out.queries.complete()) {
      json failures = json::array();
      for (const auto& f : out.queries.failures) {
        failures.push_back({{"prefix_idx", f.prefix_idx}, {"error", f.message}});
      }
      WriteFileAtomic(AttackDir() / "failures.json", Dump(failures));
      throw BackendError(std::to_string(out.queries.failures.size()) +
                         " prefixes failed (see attack/failures.json); rerun to resume");
    }
    fs::remove(AttackDir() / "failures.json");
    WriteGenerationSet(out.queries.generations, cfg_.tokenizer,
                       AttackDir() / "generations.jsonl");
    log_ << "  " << out.prefixes.size() << " prefixes, "
         << out.queries.generations.total_queries << " queries\n";
  });
  if (budget_sweep) {
    RunStage(Stage::kSweep, true, [&] {
      const auto shards = LoadShards();
      const auto backend = MakeBackend(shards);
      const auto max_b = *std::max_element(budget_sweep->begin(), budget_sweep->end());
      WriteSweep(RunAttack(shards, *backend, max_b, false), *budget_sweep);
    });
  }
}

void Experiment::Evaluate(bool force, bool compare_base) {
  if (cfg_.all_pairs) {
    CrossClient(force);
    return;
  }
  const bool need_compare = compare_base && !fs::exists(ReportDir() / "compare_base.json");
  RunStage(Stage::kEvaluate, force || need_compare, [&] {
    if (!Done(Stage::kAttack)) Attack();
    const auto shards = LoadShards();
    const AnnotatedCorpus& attacker = shards.at(static_cast<std::size_t>(cfg_.attacker_id));
    const AnnotatedCorpus& victim = shards.at(static_cast<std::size_t>(cfg_.victim_id));
    const GenerationSet gens =
        ReadGenerationSet(AttackDir() / "generations.jsonl", cfg_.tokenizer);
    const EvaluationSet eval = BuildEvaluationSet(
        UniqueSurfaces(victim), UniqueSurfaces(attacker), Concatenate(attacker).tokens,
        DocumentTokenLists(victim));
    const auto extractions = MatchExtractions(gens, eval);
    AttackReport report =
        ComputeMetrics(extractions, eval, gens.total_queries, victim.spans);
    report.config_snapshot = Provenance();
    json j = ReportToJson(report, cfg_.tokenizer);
    json df = json::object();
    for (const auto& [s, n] : DocFrequency(report.vxpii, victim)) {
      df[Detokenize(s, cfg_.tokenizer)] = n;
    }
    j["victim_doc_frequency"] = std::move(df);
    j["eval_dropped"] = eval.dropped.size();
    WriteFileAtomic(ReportDir() / "attack_report.json", Dump(j));
    log_ << "  CR=" << (report.cr ? report.cr->Percent(kCrPercentDecimals) : "undefined")
         << " EF=" << report.ef.Percent(kEfPercentDecimals)
         << " VxPII=" << report.vxpii.size() << "\n";

    if (!compare_base) return;
    if (cfg_.backend == "remote") {
      throw UnsupportedError("--compare base needs the builtin backend");
    }
    const NGramModel base_model =
        cfg_.base_checkpoint ? NGramModel::Load(*cfg_.base_checkpoint)
                             : fedleak::Train(attacker, cfg_.fl.learner_order,
                                              cfg_.fl.backoff_factor);
    const NGramBackend base(base_model);
    const AttackOutcome b = RunAttack(shards, base, cfg_.attack.budget, false);
    const SetDifference d = SetDifferenceAnalysis(report.vxpii, b.report.vxpii);
    json c = Provenance();
    c["base_model"] = cfg_.base_checkpoint ? *cfg_.base_checkpoint
                                           : std::string("attacker-local");
    c["federated_only"] = d.a_only;
    c["base_only"] = d.b_only;
    c["both"] = d.both;
    c["federated_vxpii"] = report.vxpii.size();
    c["base_vxpii"] = b.report.vxpii.size();
    WriteFileAtomic(ReportDir() / "compare_base.json", Dump(c));
    log_ << "  F\\B=" << d.a_only << " B\\F=" << d.b_only << " F&B=" << d.both << "\n";
  });
}

void Experiment::Defend(bool force) {
  RunStage(Stage::kDefend, force, [&] {
    if (!cfg_.defense) throw ConfigError("defense: no [defense] table in config");
    if (cfg_.all_pairs) throw ConfigError("victim_id: defend needs a single victim");
    if (!Done(Stage::kPartition)) Partition();
    const auto shards = LoadShards();
    DefenseOptions opts;
    opts.attacker = static_cast<std::size_t>(cfg_.attacker_id);
    opts.victim = static_cast<std::size_t>(cfg_.victim_id);
    opts.provenance = cfg_.prefix_set;
    opts.prefixes_from_masked = cfg_.defense->prefixes_from_masked;
    DefenseComparison cmp =
        DefendedRun(shards, cfg_.fl, cfg_.attack, cfg_.defense->policy, opts);
    cmp.defended.report.config_snapshot = Provenance();
    cmp.undefended.report.config_snapshot = Provenance();
    const fs::path masked_dir = cfg_.output_dir / "defense" / "masked_shards";
    fs::create_directories(masked_dir);
    for (const auto& s : shards) {
      Emit(MaskCorpus(s, cfg_.defense->policy), masked_dir / (s.owner + ".jsonl"));
    }
    WriteFileAtomic(ReportDir() / "defense.json",
                    Dump(DefenseToJson(cmp, cfg_.tokenizer)));
    log_ << "  defended VxPII=" << cmp.defended.report.vxpii.size()
         << " undefended VxPII=" << cmp.undefended.report.vxpii.size() << "\n";
  });
}

void Experiment::Sweep(bool force) {
  RunStage(Stage::kSweep, force, [&] {
    if (cfg_.all_pairs) throw ConfigError("victim_id: sweep needs a single victim");
    if (!Done(Stage::kTrain)) Train();
    const auto shards = LoadShards();
    const auto backend = MakeBackend(shards);
    std::vector<std::int64_t> budgets = cfg_.budget_sweep;
    std::optional<std::int64_t> max_b;
    if (budgets.empty()) {
      const AnnotatedCorpus& attacker = shards.at(static_cast<std::size_t>(cfg_.attacker_id));
      const ConcatenatedCorpus u = Concatenate(attacker);
      const PrefixMultiset ms = cfg_.prefix_set == PrefixProvenance::kContextual
                                    ? BuildContextual(u, cfg_.attack.lambda)
                                    : BuildGeneralized(u, cfg_.attack.lambda);
      budgets = DefaultBudgetSweep(FrequencySelect(ms, cfg_.attack.freq_threshold).size());
    } else {
      max_b = *std::max_element(budgets.begin(), budgets.end());
    }
    WriteSweep(RunAttack(shards, *backend, max_b, false), budgets);
  });
}

void Experiment::CrossClient(bool force) {
  RunStage(Stage::kCrossClient, force, [&] {
    if (!Done(Stage::kTrain)) Train();
    const auto shards = LoadShards();
    const auto backend = MakeBackend(shards);
    const CrossClientMatrix m =
        RunCrossClientMatrix(shards, *backend, cfg_.attack, cfg_.prefix_set);
    json j = Provenance();
    j["matrix"] = CrossClientToJson(m);
    WriteFileAtomic(ReportDir() / "cross_client.json", Dump(j));
  });
}

void Experiment::Report(bool force) {
  RunStage(Stage::kReport, force, [&] {
    if (!cfg_.all_pairs && !Done(Stage::kEvaluate)) Evaluate();
    if (cfg_.all_pairs && !Done(Stage::kCrossClient)) CrossClient();
    json summary = Provenance();
    json reports = json::object();
    for (const char* name : {"attack_report.json", "compare_base.json", "defense.json",
                             "budget_sweep.json", "cross_client.json"}) {
      const fs::path p = ReportDir() / name;
      if (fs::exists(p)) reports[name] = json::parse(ReadFile(p));
    }
    summary["reports"] = std::move(reports);
    WriteFileAtomic(ReportDir() / "summary.json", Dump(summary));
  });
}

}  // namespace fedleak
