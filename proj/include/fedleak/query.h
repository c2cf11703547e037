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

#ifndef FEDLEAK_QUERY_H_
#define FEDLEAK_QUERY_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "fedleak/attack.h"
#include "fedleak/backend.h"
#include "fedleak/tokenizer.h"

namespace fedleak {

struct GenerationRecord {
  std::size_t prefix_idx = 0;
  int sample_idx = 0;
  TokenSeq prefix;
  TokenSeq output;
  bool operator==(const GenerationRecord&) const = default;
};

// Y together with its query cost Q (= n x prefixes actually queried).
struct GenerationSet {
  std::vector<GenerationRecord> records;  // sorted by (prefix_idx, sample_idx)
  std::int64_t total_queries = 0;
  bool operator==(const GenerationSet&) const = default;
};

struct QueryFailure {
  std::size_t prefix_idx = 0;
  std::string message;
};

struct QueryOutcome {
  GenerationSet generations;
  std::vector<QueryFailure> failures;  // prefixes left unqueried
  bool complete() const { return failures.empty(); }
};

// Append-only record of finished prefixes, one JSON line each:
//   {"prefix_idx": i, "prefix": "...", "outputs": ["...", ...]}
// Safe to append from several threads.
class QueryJournal {
 public:
  QueryJournal(std::filesystem::path path, TokenizerMode mode);

  // Completed prefixes. Throws StorageError if a journaled prefix disagrees
  // with `prefixes` (journal from a different run).
  std::map<std::size_t, std::vector<TokenSeq>> Load(
      std::span<const TokenSeq> prefixes) const;
  void Append(std::size_t prefix_idx, const TokenSeq& prefix,
              const std::vector<TokenSeq>& outputs);

 private:
  std::filesystem::path path_;
  TokenizerMode mode_;
  std::mutex mu_;
};

// One request of n samples and m new tokens per prefix, seeded by
// DeriveSeed(cfg.seed, prefix index). Prefixes already in `journal` are not
// re-queried. Failed prefixes are reported, not retried here (backends retry).
QueryOutcome ExecuteQueries(const GenerationBackend& backend,
                            std::span<const TokenSeq> prefixes,
                            const AttackConfig& cfg,
                            QueryJournal* journal = nullptr);

// Same contract, one prefix at a time.
QueryOutcome ExecuteQueriesSerial(const GenerationBackend& backend,
                                  std::span<const TokenSeq> prefixes,
                                  const AttackConfig& cfg);

// JSONL: {"prefix_idx", "sample_idx", "prefix", "output"} per record.
void WriteGenerationSet(const GenerationSet& set, TokenizerMode mode,
                        const std::filesystem::path& path);
GenerationSet ReadGenerationSet(const std::filesystem::path& path,
                                TokenizerMode mode);

}  // namespace fedleak

#endif  // FEDLEAK_QUERY_H_
