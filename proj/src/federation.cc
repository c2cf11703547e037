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

#include "fedleak/federation.h"

#include <fstream>
#include <string>

#include "fedleak/error.h"
#include "json.hpp"

namespace fedleak {

Aggregator ParseAggregator(std::string_view name) {
  if (name == "fedavg-weighted") return Aggregator::kFedAvgWeighted;
  if (name == "fedavg-uniform") return Aggregator::kFedAvgUniform;
  throw ConfigError("unknown aggregator '" + std::string(name) + "'");
}

std::string_view AggregatorName(Aggregator a) {
  return a == Aggregator::kFedAvgWeighted ? "fedavg-weighted" : "fedavg-uniform";
}

LocalStep ParseLocalStep(std::string_view name) {
  if (name == "stateless") return LocalStep::kStateless;
  if (name == "incremental") return LocalStep::kIncremental;
  throw ConfigError("unknown local_step '" + std::string(name) + "'");
}

std::string_view LocalStepName(LocalStep s) {
  return s == LocalStep::kStateless ? "stateless" : "incremental";
}

void FlConfig::Validate() const {
  if (rounds < 1) throw ConfigError("fl.rounds must be >= 1");
  if (num_clients < 1) throw ConfigError("fl.num_clients must be >= 1");
  if (learner_order < 1) throw ConfigError("fl.learner_order must be >= 1");
}

ClientUpdateMessage ClientUpdate(const AnnotatedCorpus& shard,
                                 const std::optional<NGramModel>& incoming,
                                 const FlConfig& cfg) {
  ClientUpdateMessage msg{Train(shard, cfg.learner_order, cfg.backoff_factor),
                          shard.NumTokens()};
  if (cfg.local_step == LocalStep::kIncremental && incoming) {
    // own counts + incoming / c, via a normalized two-model average
    const double inv_c = 1.0 / cfg.num_clients;
    const NGramModel parts[] = {*incoming, msg.model};
    const double weights[] = {inv_c, 1.0};
    msg.model = FedAvg(parts, weights).Scaled(1.0 + inv_c);
  }
  return msg;
}

NGramModel ServerAggregate(std::span<const ClientUpdateMessage> updates,
                           Aggregator aggregator,
                           std::vector<double>* weights_out) {
  std::vector<double> weights(updates.size(), 1.0);
  if (aggregator == Aggregator::kFedAvgWeighted) {
    double total = 0;
    for (const auto& u : updates) total += static_cast<double>(u.num_tokens);
    for (std::size_t i = 0; i < updates.size(); ++i) {
      weights[i] = static_cast<double>(updates[i].num_tokens) / total;
    }
  } else {
    for (auto& w : weights) w = 1.0 / static_cast<double>(updates.size());
  }
  std::vector<NGramModel> models;
  models.reserve(updates.size());
  for (const auto& u : updates) models.push_back(u.model);
  if (weights_out != nullptr) *weights_out = weights;
  return FedAvg(models, weights);
}

CheckpointStore::CheckpointStore(std::filesystem::path root)
    : root_(std::move(root)) {}

std::string CheckpointStore::Save(int round, const NGramModel& model) const {
  const std::string ref = "round_" + std::to_string(round) + "/global.model";
  std::filesystem::create_directories(root_ / ("round_" + std::to_string(round)));
  model.Save(root_ / ref);
  return ref;
}

NGramModel CheckpointStore::Load(std::string_view ref) const {
  const std::filesystem::path path = root_ / std::string(ref);
  if (ref.empty() || !std::filesystem::is_regular_file(path)) {
    throw StorageError("no checkpoint '" + std::string(ref) + "' under " +
                       root_.string());
  }
  return NGramModel::Load(path);
}

void CheckpointStore::WriteManifest(const std::string& json_text) const {
  std::filesystem::create_directories(root_);
  std::ofstream out(root_ / "manifest.json", std::ios::binary);
  out << json_text << '\n';
  if (!out) throw StorageError("cannot write checkpoint manifest under " + root_.string());
}

NGramModel LoadCheckpoint(const CheckpointStore& store, std::string_view ref) {
  return store.Load(ref);
}

FederationResult RunFederation(const std::vector<AnnotatedCorpus>& shards,
                               const FlConfig& cfg,
                               const CheckpointStore* store) {
  cfg.Validate();
  if (shards.size() != static_cast<std::size_t>(cfg.num_clients)) {
    throw ConfigError("expected " + std::to_string(cfg.num_clients) +
                      " shards, got " + std::to_string(shards.size()));
  }
  for (std::size_t i = 0; i < shards.size(); ++i) {
    if (shards[i].documents.empty()) {
      throw ConfigError("shard of client " + std::to_string(i) +
                        (shards[i].owner.empty() ? "" : " (" + shards[i].owner + ")") +
                        " is empty");
    }
  }

  if (store != nullptr) {
    nlohmann::json manifest;
    manifest["fl_config"] = {{"rounds", cfg.rounds},
                             {"num_clients", cfg.num_clients},
                             {"aggregator", AggregatorName(cfg.aggregator)},
                             {"learner_order", cfg.learner_order},
                             {"backoff_factor", cfg.backoff_factor},
                             {"seed", cfg.seed},
                             {"local_step", LocalStepName(cfg.local_step)}};
    manifest["shards"] = nlohmann::json::array();
    for (const auto& s : shards) {
      manifest["shards"].push_back({{"id", s.owner},
                                    {"num_docs", s.documents.size()},
                                    {"num_tokens", s.NumTokens()}});
    }
    store->WriteManifest(manifest.dump(2));
  }

  std::optional<NGramModel> global;
  FederationResult result{NGramModel(cfg.learner_order, cfg.backoff_factor), {}};
  const int c = cfg.num_clients;
  for (int r = 1; r <= cfg.rounds; ++r) {
    std::vector<std::optional<ClientUpdateMessage>> slots(c);
    // Clients share only the immutable incoming model.
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < c; ++i) {
      slots[i] = ClientUpdate(shards[i], global, cfg);
    }
    std::vector<ClientUpdateMessage> updates;
    updates.reserve(c);
    for (auto& s : slots) updates.push_back(std::move(*s));

    RoundLog log;
    log.round = r;
    for (const auto& u : updates) log.per_client_token_counts.push_back(u.num_tokens);
    global = ServerAggregate(updates, cfg.aggregator, &log.weights);
    if (store != nullptr) log.global_checkpoint_ref = store->Save(r, *global);
    result.logs.push_back(std::move(log));
  }
  result.global = std::move(*global);
  return result;
}

}  // namespace fedleak
