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

#ifndef FEDLEAK_ATTACK_H_
#define FEDLEAK_ATTACK_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "fedleak/corpus.h"
#include "fedleak/ngram_model.h"

namespace fedleak {

enum class PrefixProvenance {
  kContextual,   // one lambda-window per PII occurrence
  kGeneralized,  // every window of length 1..lambda ending at a PII
};

std::string_view PrefixProvenanceName(PrefixProvenance p);
PrefixProvenance ParsePrefixProvenance(std::string_view name);

struct AttackConfig {
  int lambda = 50;
  int samples_per_prefix = 15;  // n
  int max_new_tokens = 10;      // m
  std::optional<std::int64_t> budget;          // B
  std::optional<std::int64_t> freq_threshold;  // sigma_a
  double temperature = 1.0;  // 0 = greedy
  std::uint64_t seed = 0;

  void Validate() const;
};

struct PrefixMultiset {
  std::map<TokenSeq, std::int64_t> entries;  // prefix -> occurrence count
  PrefixProvenance provenance = PrefixProvenance::kContextual;
  int lambda = 0;

  std::int64_t TotalCount() const;  // multiset cardinality
};

// Windows are clipped at the start of the PII's document, so a prefix never
// spans two documents. Occurrences at a document start are skipped.
PrefixMultiset BuildContextual(const ConcatenatedCorpus& corpus, int lambda);
PrefixMultiset BuildGeneralized(const ConcatenatedCorpus& corpus, int lambda);

struct RankedPrefix {
  TokenSeq tokens;
  std::int64_t count = 0;
  bool operator==(const RankedPrefix&) const = default;
};

// Unique prefixes with count >= sigma_a (default 1), by count descending, ties
// broken lexicographically; truncated to `budget` when given.
std::vector<RankedPrefix> FrequencySelect(
    const PrefixMultiset& ms, std::optional<std::int64_t> sigma_a = std::nullopt,
    std::optional<std::int64_t> budget = std::nullopt);

std::vector<TokenSeq> PrefixTokens(std::span<const RankedPrefix> ranked);

// Budgets 10^2, 10^3, ... strictly below `list_size`, followed by
// `list_size` itself.
std::vector<std::int64_t> DefaultBudgetSweep(std::size_t list_size);

// Latent-association fine-tuning set: the first min(k_prefixes, |prefixes|)
// prefixes, each paired positionally with one of k_pii attacker PII surfaces
// (drawn without replacement when k_pii <= |attacker_pii|, with replacement
// otherwise, then shuffled), cycling through the PII sample if it is shorter.
std::vector<PrefixTargetPair> BuildLaftDataset(
    std::span<const TokenSeq> prefixes, std::span<const TokenSeq> attacker_pii,
    std::size_t k_prefixes, std::size_t k_pii, std::uint64_t seed);

}  // namespace fedleak

#endif  // FEDLEAK_ATTACK_H_
