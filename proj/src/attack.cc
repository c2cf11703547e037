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

#include "fedleak/attack.h"

#include <algorithm>
#include <random>
#include <string>

#include "fedleak/error.h"

namespace fedleak {

std::string_view PrefixProvenanceName(PrefixProvenance p) {
  return p == PrefixProvenance::kContextual ? "contextual" : "generalized";
}

PrefixProvenance ParsePrefixProvenance(std::string_view name) {
  if (name == "contextual") return PrefixProvenance::kContextual;
  if (name == "generalized") return PrefixProvenance::kGeneralized;
  throw ConfigError("unknown prefix set '" + std::string(name) +
                    "' (expected contextual or generalized)");
}

void AttackConfig::Validate() const {
  if (lambda < 1) throw ConfigError("attack.lambda must be >= 1");
  if (samples_per_prefix < 1) throw ConfigError("attack.samples_per_prefix must be >= 1");
  if (max_new_tokens < 1) throw ConfigError("attack.max_new_tokens must be >= 1");
  if (budget && *budget < 1) throw ConfigError("attack.budget must be >= 1");
  if (freq_threshold && *freq_threshold < 1) {
    throw ConfigError("attack.freq_threshold must be >= 1");
  }
  if (!(temperature >= 0)) throw ConfigError("attack.temperature must be >= 0");
}

std::int64_t PrefixMultiset::TotalCount() const {
  std::int64_t n = 0;
  for (const auto& [p, c] : entries) n += c;
  return n;
}

PrefixMultiset BuildContextual(const ConcatenatedCorpus& corpus, int lambda) {
  if (lambda < 1) throw ConfigError("lambda must be >= 1");
  PrefixMultiset out;
  out.provenance = PrefixProvenance::kContextual;
  out.lambda = lambda;
  for (const PiiLocation& loc : corpus.locations) {
    const std::size_t doc_start = corpus.DocumentStart(loc.loc);
    if (loc.loc == doc_start) continue;
    const std::size_t begin =
        std::max(doc_start, loc.loc - std::min<std::size_t>(loc.loc, lambda));
    TokenSeq prefix(corpus.tokens.begin() + static_cast<long>(begin),
                    corpus.tokens.begin() + static_cast<long>(loc.loc));
    ++out.entries[std::move(prefix)];
  }
  return out;
}

PrefixMultiset BuildGeneralized(const ConcatenatedCorpus& corpus, int lambda) {
  if (lambda < 1) throw ConfigError("lambda must be >= 1");
  PrefixMultiset out;
  out.provenance = PrefixProvenance::kGeneralized;
  out.lambda = lambda;
  for (const PiiLocation& loc : corpus.locations) {
    const std::size_t doc_start = corpus.DocumentStart(loc.loc);
    const std::size_t available = loc.loc - doc_start;
    const std::size_t longest = std::min<std::size_t>(available, lambda);
    for (std::size_t len = 1; len <= longest; ++len) {
      TokenSeq prefix(corpus.tokens.begin() + static_cast<long>(loc.loc - len),
                      corpus.tokens.begin() + static_cast<long>(loc.loc));
      ++out.entries[std::move(prefix)];
    }
  }
  return out;
}

std::vector<RankedPrefix> FrequencySelect(const PrefixMultiset& ms,
                                          std::optional<std::int64_t> sigma_a,
                                          std::optional<std::int64_t> budget) {
  const std::int64_t threshold = sigma_a.value_or(1);
  if (threshold < 1) throw ConfigError("freq_threshold must be >= 1");
  if (budget && *budget < 1) throw ConfigError("budget must be >= 1");
  std::vector<RankedPrefix> out;
  for (const auto& [prefix, count] : ms.entries) {
    if (count >= threshold) out.push_back({prefix, count});
  }
  // entries are already lexicographic, so a stable sort on count suffices.
  std::stable_sort(out.begin(), out.end(),
                   [](const RankedPrefix& a, const RankedPrefix& b) {
                     return a.count > b.count;
                   });
  if (budget && out.size() > static_cast<std::size_t>(*budget)) {
    out.resize(static_cast<std::size_t>(*budget));
  }
  return out;
}

std::vector<TokenSeq> PrefixTokens(std::span<const RankedPrefix> ranked) {
  std::vector<TokenSeq> out;
  out.reserve(ranked.size());
  for (const auto& r : ranked) out.push_back(r.tokens);
  return out;
}

std::vector<std::int64_t> DefaultBudgetSweep(std::size_t list_size) {
  std::vector<std::int64_t> out;
  for (std::int64_t b = 100; b < static_cast<std::int64_t>(list_size); b *= 10) {
    out.push_back(b);
  }
  if (list_size > 0) out.push_back(static_cast<std::int64_t>(list_size));
  return out;
}

std::vector<PrefixTargetPair> BuildLaftDataset(
    std::span<const TokenSeq> prefixes, std::span<const TokenSeq> attacker_pii,
    std::size_t k_prefixes, std::size_t k_pii, std::uint64_t seed) {
  if (prefixes.empty()) throw ConfigError("LAFt needs at least one prefix");
  if (attacker_pii.empty()) throw ConfigError("LAFt needs attacker PII");
  if (k_prefixes == 0 || k_pii == 0) {
    throw ConfigError("LAFt k_prefixes and k_pii must be >= 1");
  }
  std::mt19937_64 rng(seed);
  std::vector<TokenSeq> sample;
  sample.reserve(k_pii);
  if (k_pii <= attacker_pii.size()) {
    std::vector<std::size_t> idx(attacker_pii.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t i = 0; i < k_pii; ++i) sample.push_back(attacker_pii[idx[i]]);
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, attacker_pii.size() - 1);
    for (std::size_t i = 0; i < k_pii; ++i) sample.push_back(attacker_pii[pick(rng)]);
    std::shuffle(sample.begin(), sample.end(), rng);
  }
  const std::size_t n = std::min(k_prefixes, prefixes.size());
  std::vector<PrefixTargetPair> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.emplace_back(prefixes[i], sample[i % sample.size()]);
  }
  return out;
}

}  // namespace fedleak
