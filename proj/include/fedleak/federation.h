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

#ifndef FEDLEAK_FEDERATION_H_
#define FEDLEAK_FEDERATION_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fedleak/corpus.h"
#include "fedleak/ngram_model.h"

namespace fedleak {

enum class Aggregator {
  kFedAvgWeighted,  // weights |D_i| / sum |D_j|, |D_i| in tokens
  kFedAvgUniform,
};

enum class LocalStep {
  // Client recounts its shard from scratch; incoming model is ignored.
  kStateless,
  // Client returns its own shard counts plus the incoming model scaled by
  // 1 / num_clients.
  kIncremental,
};

Aggregator ParseAggregator(std::string_view name);
std::string_view AggregatorName(Aggregator a);
LocalStep ParseLocalStep(std::string_view name);
std::string_view LocalStepName(LocalStep s);

struct FlConfig {
  int rounds = 10;
  int num_clients = 5;
  Aggregator aggregator = Aggregator::kFedAvgWeighted;
  int learner_order = kDefaultOrder;
  double backoff_factor = kDefaultBackoffFactor;
  std::uint64_t seed = 0;
  LocalStep local_step = LocalStep::kStateless;

  void Validate() const;
};

struct RoundLog {
  int round = 0;  // 1-based
  std::vector<std::size_t> per_client_token_counts;
  std::vector<double> weights;  // sums to 1
  std::string global_checkpoint_ref;  // empty when no store was given
};

// What a client sends to the server: parameters and a size, never data.
struct ClientUpdateMessage {
  NGramModel model;
  std::size_t num_tokens = 0;
};

ClientUpdateMessage ClientUpdate(const AnnotatedCorpus& shard,
                                 const std::optional<NGramModel>& incoming,
                                 const FlConfig& cfg);

// Server-side aggregation over client messages.
NGramModel ServerAggregate(std::span<const ClientUpdateMessage> updates,
                           Aggregator aggregator,
                           std::vector<double>* weights_out = nullptr);

// Directory of per-round global models:
//   <root>/round_<r>/global.model, <root>/manifest.json
class CheckpointStore {
 public:
  explicit CheckpointStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  // Returns the ref "round_<r>/global.model".
  std::string Save(int round, const NGramModel& model) const;
  NGramModel Load(std::string_view ref) const;
  void WriteManifest(const std::string& json_text) const;

 private:
  std::filesystem::path root_;
};

NGramModel LoadCheckpoint(const CheckpointStore& store, std::string_view ref);

struct FederationResult {
  NGramModel global;
  std::vector<RoundLog> logs;
};

// R rounds of parallel ClientUpdate followed by ServerAggregate. Deterministic
// for a given cfg; client scheduling order does not affect the result.
FederationResult RunFederation(const std::vector<AnnotatedCorpus>& shards,
                               const FlConfig& cfg,
                               const CheckpointStore* store = nullptr);

}  // namespace fedleak

#endif  // FEDLEAK_FEDERATION_H_
