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

#ifndef FEDLEAK_KERNELS_H_
#define FEDLEAK_KERNELS_H_

// Data-parallel inner loops of the attack and evaluation pipeline. Each
// kernel has an OpenMP implementation (fedleak::kernels) and a plain serial
// reference (fedleak::kernels::serial) with identical results; the reference
// is kept for tests and for the benchmark.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedleak/backend.h"
#include "fedleak/tokenizer.h"

namespace fedleak::kernels {

// For each output, the index of the item it begins with. Items must not share
// a first token; an output matching two items throws std::logic_error.
std::vector<std::optional<std::size_t>> MatchPrefixes(
    std::span<const TokenSeq> outputs, std::span<const TokenSeq> items);

// Number of documents containing each surface as a contiguous subsequence.
std::vector<std::int64_t> DocumentFrequency(std::span<const TokenSeq> surfaces,
                                            std::span<const TokenSeq> documents);

// Whether each needle occurs contiguously in `haystack` (1) or not (0).
std::vector<char> OccursIn(std::span<const TokenSeq> needles,
                           std::span<const Token> haystack);

struct QueryResult {
  bool ok = false;
  std::vector<TokenSeq> outputs;
  std::string error;
};

using QueryCallback = std::function<void(std::size_t, const QueryResult&)>;

// Issues every request against `backend` with at most `workers` concurrent
// calls (0 = OpenMP default). `on_done` may be called from worker threads.
std::vector<QueryResult> RunQueries(const GenerationBackend& backend,
                                    std::span<const GenerationRequest> requests,
                                    int workers, const QueryCallback& on_done);

namespace serial {

std::vector<std::optional<std::size_t>> MatchPrefixes(
    std::span<const TokenSeq> outputs, std::span<const TokenSeq> items);
std::vector<std::int64_t> DocumentFrequency(std::span<const TokenSeq> surfaces,
                                            std::span<const TokenSeq> documents);
std::vector<char> OccursIn(std::span<const TokenSeq> needles,
                           std::span<const Token> haystack);
std::vector<QueryResult> RunQueries(const GenerationBackend& backend,
                                    std::span<const GenerationRequest> requests,
                                    const QueryCallback& on_done);

}  // namespace serial
}  // namespace fedleak::kernels

#endif  // FEDLEAK_KERNELS_H_
