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

#ifndef FEDLEAK_JUDGE_H_
#define FEDLEAK_JUDGE_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "fedleak/attack.h"
#include "fedleak/backend.h"
#include "fedleak/corpus.h"
#include "fedleak/query.h"
#include "json.hpp"

namespace fedleak {

inline constexpr char kDropInAttackerPii[] = "in-attacker-pii";
inline constexpr char kDropInAttackerCorpus[] = "in-attacker-corpus";
inline constexpr char kDropLcpConflict[] = "lcp-conflict";

struct DroppedItem {
  TokenSeq surface;
  std::string reason;
  bool operator==(const DroppedItem&) const = default;
};

// Victim-exclusive PII targets. Items are deduplicated, absent from the
// attacker's PII and corpus, and pairwise share no first token.
struct EvaluationSet {
  std::vector<TokenSeq> items;  // sorted
  bool dedup = true;
  bool not_in_attacker_corpus = true;
  bool lcp_disjoint = true;
  std::vector<DroppedItem> dropped;
};

// Within a first-token conflict group the surface with the highest document
// frequency in `victim_documents` is kept (ties: lexicographically smallest).
EvaluationSet BuildEvaluationSet(std::span<const TokenSeq> victim_pii,
                                 std::span<const TokenSeq> attacker_pii,
                                 std::span<const Token> attacker_corpus,
                                 std::span<const TokenSeq> victim_documents);

struct ExtractionRecord {
  TokenSeq pii;
  std::size_t prefix_idx = 0;
  int sample_idx = 0;
  TokenSeq output;
  bool operator==(const ExtractionRecord&) const = default;
};

// One record per output that begins with an evaluation item, in generation
// order.
std::vector<ExtractionRecord> MatchExtractions(const GenerationSet& gens,
                                               const EvaluationSet& eval_set);
std::vector<ExtractionRecord> MatchExtractionsSerial(const GenerationSet& gens,
                                                     const EvaluationSet& eval_set);

std::set<TokenSeq> VxPii(std::span<const ExtractionRecord> records);

// Exact ratio; percent strings are rounded half-up from the rational value.
struct Rate {
  std::int64_t numerator = 0;
  std::int64_t denominator = 1;

  double value() const;
  std::string Percent(int decimals) const;  // e.g. "22.93%"
  bool operator==(const Rate&) const = default;
};

inline constexpr int kCrPercentDecimals = 2;
inline constexpr int kEfPercentDecimals = 4;

struct AttackReport {
  std::optional<Rate> cr;  // nullopt: evaluation set empty, CR undefined
  Rate ef;
  std::set<TokenSeq> vxpii;
  std::int64_t total_queries = 0;
  std::size_t eval_size = 0;
  // Per minor label; a surface carrying several labels counts once for each.
  std::map<std::string, std::int64_t> per_label_counts;
  nlohmann::json config_snapshot = nlohmann::json::object();
};

// CR = |VxPII| / |eval|, EF = |VxPII| / Q. Labels come from `label_spans`
// (normally the victim's spans). Throws ConfigError when Q < 1.
AttackReport ComputeMetrics(std::span<const ExtractionRecord> records,
                            const EvaluationSet& eval_set,
                            std::int64_t total_queries,
                            std::span<const PiiSpan> label_spans = {});

nlohmann::json ReportToJson(const AttackReport& report, TokenizerMode mode);

struct SetDifference {
  std::size_t a_only = 0;
  std::size_t b_only = 0;
  std::size_t both = 0;
  bool operator==(const SetDifference&) const = default;
};

SetDifference SetDifferenceAnalysis(const std::set<TokenSeq>& a,
                                    const std::set<TokenSeq>& b);

// Deduplicated surfaces per minor label; unlabeled surfaces go to
// "unlabeled".
std::map<std::string, std::int64_t> LabelDistribution(
    const std::set<TokenSeq>& vxpii, std::span<const PiiSpan> spans);

// Number of documents containing each surface contiguously.
std::map<TokenSeq, std::int64_t> DocFrequency(const std::set<TokenSeq>& vxpii,
                                              const AnnotatedCorpus& corpus);

// Everything one prefix attack produces, from prefix set to report.
struct AttackOutcome {
  std::vector<RankedPrefix> prefixes;
  QueryOutcome queries;
  EvaluationSet eval_set;
  std::vector<ExtractionRecord> extractions;
  AttackReport report;
};

// Prefixes come from `attacker_prefix_source` (normally the attacker's own
// raw shard); the evaluation set from the unmasked `attacker` and `victim`.
AttackOutcome RunPrefixAttack(const GenerationBackend& backend,
                              const AnnotatedCorpus& attacker,
                              const AnnotatedCorpus& victim,
                              const AttackConfig& cfg,
                              PrefixProvenance provenance,
                              QueryJournal* journal = nullptr,
                              const AnnotatedCorpus* attacker_prefix_source = nullptr);

nlohmann::json AttackConfigToJson(const AttackConfig& cfg);

struct SweepRow {
  std::int64_t budget = 0;
  std::size_t prefixes_used = 0;
  std::int64_t total_queries = 0;
  std::size_t vxpii = 0;
  std::optional<Rate> cr;
  Rate ef;
};

// Scores the top-B prefixes of `full` for each budget B without new queries.
// Generations are seeded per prefix index, so each row equals a fresh attack
// with budget B. Budgets beyond the prefix list are capped at its length.
std::vector<SweepRow> BudgetSweep(const AttackOutcome& full,
                                  std::span<const std::int64_t> budgets);

// RFC 4180: budget,prefixes_used,Q,vxpii,cr,ef (CRLF rows).
std::string SweepToCsv(std::span<const SweepRow> rows);

struct CrossClientCell {
  bool applicable = false;  // false on the diagonal
  std::optional<Rate> cr;   // nullopt: undefined or failed
  std::size_t eval_size = 0;
  std::size_t vxpii = 0;
  std::string error;
};

struct CrossClientMatrix {
  std::vector<std::vector<CrossClientCell>> cells;  // [attacker][victim]
};

// Runs the prefix attack for every ordered (attacker, victim) pair. A failing
// cell records its error and the remaining cells still run.
CrossClientMatrix RunCrossClientMatrix(const std::vector<AnnotatedCorpus>& shards,
                                       const GenerationBackend& backend,
                                       const AttackConfig& cfg,
                                       PrefixProvenance provenance =
                                           PrefixProvenance::kContextual);

nlohmann::json CrossClientToJson(const CrossClientMatrix& m);

std::size_t EditDistance(std::span<const Token> a, std::span<const Token> b);

// Verbatim-extraction baseline: greedy-generate |b| tokens from a; a sample
// counts when 1 - edit(g, b) / max(|g|, |b|) >= threshold.
double VerbatimScore(const GenerationBackend& backend,
                     std::span<const PrefixTargetPair> samples,
                     double threshold);

}  // namespace fedleak

#endif  // FEDLEAK_JUDGE_H_
