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

#include "fedleak/partition.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <unordered_map>

#include "fedleak/error.h"
#include "json.hpp"

namespace fedleak {
namespace {

std::uint64_t Fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

double SquaredDistance(const std::vector<double>& a,
                       const std::vector<double>& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    d += t * t;
  }
  return d;
}

std::vector<double> SampleDirichlet(std::size_t n, double alpha,
                                    std::mt19937_64& rng) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  std::vector<double> out(n);
  double sum = 0;
  for (auto& v : out) {
    v = gamma(rng);
    sum += v;
  }
  if (sum <= 0) {
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(n));
  } else {
    for (auto& v : out) v /= sum;
  }
  return out;
}

// Balanced skewed allocation over precomputed group ids.
std::vector<int> AllocateSkewed(const std::vector<int>& group_of_doc,
                                int num_groups, const PartitionSpec& spec,
                                std::mt19937_64& rng) {
  const std::size_t n = group_of_doc.size();
  const auto c = static_cast<std::size_t>(spec.num_clients);

  std::vector<std::vector<std::size_t>> pools(num_groups);
  for (std::size_t d = 0; d < n; ++d) pools[group_of_doc[d]].push_back(d);
  for (auto& pool : pools) std::shuffle(pool.begin(), pool.end(), rng);
  std::vector<std::size_t> cursor(num_groups, 0);

  std::vector<std::vector<double>> mix(c);
  for (auto& m : mix) m = SampleDirichlet(num_groups, spec.skew_alpha, rng);

  std::vector<std::size_t> capacity(c, n / c);
  for (std::size_t i = 0; i < n % c; ++i) ++capacity[i];

  std::vector<int> owner(n, -1);
  std::vector<std::size_t> filled(c, 0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::size_t assigned = 0;
  while (assigned < n) {
    for (std::size_t i = 0; i < c && assigned < n; ++i) {
      if (filled[i] == capacity[i]) continue;
      double mass = 0;
      for (int g = 0; g < num_groups; ++g) {
        if (cursor[g] < pools[g].size()) mass += mix[i][g];
      }
      int pick = -1;
      if (mass > 0) {
        double u = unit(rng) * mass;
        for (int g = 0; g < num_groups; ++g) {
          if (cursor[g] >= pools[g].size()) continue;
          pick = g;
          u -= mix[i][g];
          if (u < 0) break;
        }
      } else {
        // Remaining groups all have zero weight for this client.
        std::vector<int> open;
        for (int g = 0; g < num_groups; ++g) {
          if (cursor[g] < pools[g].size()) open.push_back(g);
        }
        std::uniform_int_distribution<std::size_t> idx(0, open.size() - 1);
        pick = open[idx(rng)];
      }
      owner[pools[pick][cursor[pick]++]] = static_cast<int>(i);
      ++filled[i];
      ++assigned;
    }
  }
  return owner;
}

}  // namespace

PartitionStrategy ParsePartitionStrategy(std::string_view name) {
  if (name == "by-label-skew") return PartitionStrategy::kByLabelSkew;
  if (name == "by-cluster") return PartitionStrategy::kByCluster;
  throw ConfigError("unknown partition strategy '" + std::string(name) + "'");
}

std::string_view PartitionStrategyName(PartitionStrategy strategy) {
  return strategy == PartitionStrategy::kByLabelSkew ? "by-label-skew"
                                                     : "by-cluster";
}

void PartitionSpec::Validate() const {
  if (num_clients < 2) {
    throw ConfigError("partition.num_clients must be >= 2, got " +
                      std::to_string(num_clients));
  }
  if (!(skew_alpha > 0)) throw ConfigError("partition.skew_alpha must be > 0");
}

std::vector<double> HashedBagOfTokens(const TokenSeq& tokens, int dim) {
  std::vector<double> v(dim, 0.0);
  for (const auto& t : tokens) v[Fnv1a(t) % static_cast<std::uint64_t>(dim)] += 1;
  double norm = 0;
  for (double x : v) norm += x * x;
  if (norm > 0) {
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
  }
  return v;
}

std::vector<int> KMeans(const std::vector<std::vector<double>>& rows, int k,
                        int iterations, std::uint64_t seed) {
  const std::size_t n = rows.size();
  if (k < 1 || n < static_cast<std::size_t>(k)) {
    throw ConfigError("k-means needs at least k rows");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<std::vector<double>> centers;
  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  centers.push_back(rows[first(rng)]);
  std::vector<double> d2(n, std::numeric_limits<double>::max());
  while (centers.size() < static_cast<std::size_t>(k)) {
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], SquaredDistance(rows[i], centers.back()));
      total += d2[i];
    }
    std::size_t pick = 0;
    if (total > 0) {
      double u = unit(rng) * total;
      for (pick = 0; pick + 1 < n; ++pick) {
        u -= d2[pick];
        if (u < 0) break;
      }
    } else {
      pick = first(rng);
    }
    centers.push_back(rows[pick]);
  }

  std::vector<int> assign(n, 0);
  const std::size_t dim = rows.front().size();
  for (int it = 0; it < iterations; ++it) {
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::max();
      for (int c = 0; c < k; ++c) {
        const double d = SquaredDistance(rows[i], centers[c]);
        if (d < best) {
          best = d;
          assign[i] = c;
        }
      }
    }
    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++counts[assign[i]];
      for (std::size_t j = 0; j < dim; ++j) sums[assign[i]][j] += rows[i][j];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;  // keep the old center for empty clusters
      for (std::size_t j = 0; j < dim; ++j) {
        centers[c][j] = sums[c][j] / static_cast<double>(counts[c]);
      }
    }
  }
  return assign;
}

std::vector<AnnotatedCorpus> Partition(const AnnotatedCorpus& global,
                                       const PartitionSpec& spec) {
  spec.Validate();
  const std::size_t n = global.documents.size();
  if (n < static_cast<std::size_t>(spec.num_clients)) {
    throw ConfigError("cannot partition " + std::to_string(n) +
                      " documents across " + std::to_string(spec.num_clients) +
                      " clients");
  }
  std::mt19937_64 rng(spec.seed);

  std::vector<int> group(n, 0);
  int num_groups = 0;
  if (spec.strategy == PartitionStrategy::kByLabelSkew) {
    // Sorted tag order keeps group ids independent of document order.
    std::map<std::optional<std::string>, int> ids;
    for (const auto& d : global.documents) ids.emplace(d.task_tag, 0);
    for (auto& [tag, id] : ids) id = num_groups++;
    for (std::size_t i = 0; i < n; ++i) group[i] = ids[global.documents[i].task_tag];
  } else {
    std::vector<std::vector<double>> rows;
    rows.reserve(n);
    for (const auto& d : global.documents) rows.push_back(HashedBagOfTokens(d.tokens));
    group = KMeans(rows, spec.num_clients, kKMeansIterations, rng());
    num_groups = spec.num_clients;
  }

  const std::vector<int> owner = AllocateSkewed(group, num_groups, spec, rng);

  std::vector<AnnotatedCorpus> shards(spec.num_clients);
  for (int i = 0; i < spec.num_clients; ++i) {
    shards[i].owner = "client_" + std::to_string(i);
    shards[i].tokenizer = global.tokenizer;
  }
  std::unordered_map<std::string_view, int> owner_of_doc;
  for (std::size_t d = 0; d < n; ++d) {
    shards[owner[d]].documents.push_back(global.documents[d]);
    owner_of_doc.emplace(global.documents[d].doc_id, owner[d]);
  }
  for (const auto& span : global.spans) {
    auto it = owner_of_doc.find(span.doc_id);
    if (it == owner_of_doc.end()) {
      throw AnnotationError("span references unknown doc '" + span.doc_id + "'");
    }
    shards[it->second].spans.push_back(span);
  }
  return shards;
}

void WritePartition(const std::vector<AnnotatedCorpus>& shards,
                    const PartitionSpec& spec,
                    const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["seed"] = spec.seed;
  manifest["strategy"] = PartitionStrategyName(spec.strategy);
  manifest["skew_alpha"] = spec.skew_alpha;
  manifest["clients"] = nlohmann::json::array();
  for (std::size_t i = 0; i < shards.size(); ++i) {
    const std::string file = "client_" + std::to_string(i) + ".jsonl";
    Emit(shards[i], dir / file);
    manifest["clients"].push_back({{"id", shards[i].owner},
                                   {"file", file},
                                   {"num_docs", shards[i].documents.size()},
                                   {"num_tokens", shards[i].NumTokens()}});
  }
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  out << manifest.dump(2) << '\n';
  if (!out) throw StorageError("cannot write partition manifest in " + dir.string());
}

std::vector<AnnotatedCorpus> ReadPartition(const std::filesystem::path& dir,
                                           TokenizerMode mode) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw StorageError("missing partition manifest in " + dir.string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw StorageError("corrupt partition manifest: " + std::string(e.what()));
  }
  std::vector<AnnotatedCorpus> shards;
  for (const auto& c : manifest.at("clients")) {
    shards.push_back(Ingest(dir / c.at("file").get<std::string>(), mode,
                            c.at("id").get<std::string>()));
  }
  return shards;
}

}  // namespace fedleak
