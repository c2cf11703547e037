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

#ifndef FEDLEAK_GENERATION_H_
#define FEDLEAK_GENERATION_H_

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "fedleak/ngram_model.h"
#include "fedleak/tokenizer.h"

namespace fedleak {

enum class DecodeMode { kSample, kGreedy };

struct GenerationRequest {
  TokenSeq prefix;
  int max_new_tokens = 10;
  int num_samples = 1;
  // 0 means greedy regardless of `mode`.
  double temperature = 1.0;
  std::uint64_t seed = 0;
  DecodeMode mode = DecodeMode::kSample;

  bool greedy() const { return mode == DecodeMode::kGreedy || temperature == 0; }
  void Validate() const;
};

// SplitMix64 finalizer over (a, b); used for per-prefix and per-sample seeds.
std::uint64_t DeriveSeed(std::uint64_t a, std::uint64_t b);

// Next-token distribution after `history`. The highest-order context with a
// nonzero total wins; each level backed off multiplies `backoff_score` by the
// model's backoff factor. Probabilities are count^(1/T), normalized. With
// temperature 0 the result is the one-hot greedy choice.
struct NextTokenDistribution {
  int context_length = 0;
  double backoff_score = 1.0;
  std::vector<std::pair<Token, double>> probs;  // token order
};

NextTokenDistribution NextDistribution(const NGramModel& model,
                                       std::span<const Token> history,
                                       double temperature);

// Argmax of the winning context; ties go to the lexicographically smallest
// token. Throws GenerationError on an empty model.
Token GreedyNext(const NGramModel& model, std::span<const Token> history);

// Returns exactly req.num_samples continuations (prefix excluded). A sequence
// ends early when the boundary token is drawn; the boundary is not returned.
std::vector<TokenSeq> Generate(const NGramModel& model,
                               const GenerationRequest& req);

}  // namespace fedleak

#endif  // FEDLEAK_GENERATION_H_
