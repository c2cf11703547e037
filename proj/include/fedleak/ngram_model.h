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

#ifndef FEDLEAK_NGRAM_MODEL_H_
#define FEDLEAK_NGRAM_MODEL_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fedleak/corpus.h"
#include "fedleak/tokenizer.h"

namespace fedleak {

// Appended after every training document. Generation stops when it is drawn.
inline const Token kBoundaryToken = "\x1e";

inline constexpr int kDefaultOrder = 5;
inline constexpr double kDefaultBackoffFactor = 0.4;

// Joins context tokens with U+001F; the empty context maps to "".
std::string ContextKey(std::span<const Token> context);

class NGramModel;
NGramModel FedAvg(std::span<const NGramModel> models,
                  std::span<const double> weights);

// Backoff n-gram count model. `order` is the n-gram order k: tables exist for
// context lengths 0..k-1. Counts are real-valued so that weighted averages of
// models (FedAVG) stay in the same representation.
class NGramModel {
 public:
  struct ContextStats {
    std::map<Token, double> next;  // ordered: fixes iteration and tie-breaks
    double total = 0;
    bool operator==(const ContextStats&) const = default;
  };
  using Table = std::unordered_map<std::string, ContextStats>;

  explicit NGramModel(int order = kDefaultOrder,
                      double backoff_factor = kDefaultBackoffFactor);

  int order() const { return order_; }
  double backoff_factor() const { return backoff_factor_; }
  const std::set<Token>& vocab() const { return vocab_; }
  const Table& table(int context_length) const { return tables_.at(context_length); }

  // nullptr when the context was never observed.
  const ContextStats* Find(std::span<const Token> context) const;
  double Count(std::span<const Token> context, const Token& next) const;

  // Adds `weight` to count(context -> next). Context length must be < order.
  void Add(std::span<const Token> context, const Token& next, double weight);

  // Sets every total to the sum of its counts (in token order).
  void RecomputeTotals();

  NGramModel Scaled(double factor) const;

  std::size_t NumEntries() const;

  // Structural equality: same order, factor, vocab and every count bit-equal.
  bool operator==(const NGramModel&) const = default;

  // Versioned JSON dump. Entries are sorted so equal models serialize to equal
  // bytes.
  std::string Serialize() const;
  static NGramModel Deserialize(std::string_view text);
  void Save(const std::filesystem::path& path) const;
  static NGramModel Load(const std::filesystem::path& path);

 private:
  friend NGramModel FedAvg(std::span<const NGramModel> models,
                           std::span<const double> weights);

  int order_;
  double backoff_factor_;
  std::vector<Table> tables_;
  std::set<Token> vocab_;
};

// Exact n-gram counts of every document followed by kBoundaryToken. N-grams
// never span two documents. Throws TrainingError on an empty corpus.
NGramModel Train(const AnnotatedCorpus& corpus, int order,
                 double backoff_factor = kDefaultBackoffFactor);
NGramModel TrainOnSequences(std::span<const TokenSeq> documents, int order,
                            double backoff_factor = kDefaultBackoffFactor);

// Weighted mean of counts; weights are normalized to sum to one. Throws
// AggregationError when orders differ or weights are invalid.
NGramModel FedAvg(std::span<const NGramModel> models,
                  std::span<const double> weights);

using PrefixTargetPair = std::pair<TokenSeq, TokenSeq>;

// Functional count injection: for each (prefix, target) every n-gram of
// prefix ++ target whose final token lies in target gains `weight`.
NGramModel FinetunePairs(const NGramModel& model,
                         std::span<const PrefixTargetPair> pairs,
                         double weight);

}  // namespace fedleak

#endif  // FEDLEAK_NGRAM_MODEL_H_
