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

#ifndef FEDLEAK_PARTITION_H_
#define FEDLEAK_PARTITION_H_

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "fedleak/corpus.h"

namespace fedleak {

enum class PartitionStrategy {
  // Groups are the documents' task_tag values (missing tag = its own group).
  kByLabelSkew,
  // Groups are k-means clusters over feature-hashed token counts.
  kByCluster,
};

PartitionStrategy ParsePartitionStrategy(std::string_view name);
std::string_view PartitionStrategyName(PartitionStrategy strategy);

struct PartitionSpec {
  int num_clients = 5;
  double skew_alpha = 0.5;
  std::uint64_t seed = 0;
  PartitionStrategy strategy = PartitionStrategy::kByLabelSkew;

  void Validate() const;
};

inline constexpr int kHashedFeatureDim = 256;
inline constexpr int kKMeansIterations = 20;

// Feature-hashed (FNV-1a) token counts, L2-normalized.
std::vector<double> HashedBagOfTokens(const TokenSeq& tokens,
                                      int dim = kHashedFeatureDim);

// Lloyd's k-means with seeded k-means++ initialisation. Returns one cluster id
// in [0, k) per row. The assignment step runs in parallel.
std::vector<int> KMeans(const std::vector<std::vector<double>>& rows, int k,
                        int iterations, std::uint64_t seed);

// Splits `global` into spec.num_clients disjoint shards whose union is
// `global`. Shard sizes differ by at most one document; each client's mix of
// groups follows its own Dirichlet(skew_alpha) draw. Shard i is owned by
// "client_i" and keeps documents in their global order.
std::vector<AnnotatedCorpus> Partition(const AnnotatedCorpus& global,
                                       const PartitionSpec& spec);

// Writes client_<i>.jsonl for each shard plus manifest.json.
void WritePartition(const std::vector<AnnotatedCorpus>& shards,
                    const PartitionSpec& spec,
                    const std::filesystem::path& dir);
std::vector<AnnotatedCorpus> ReadPartition(const std::filesystem::path& dir,
                                           TokenizerMode mode);

}  // namespace fedleak

#endif  // FEDLEAK_PARTITION_H_
