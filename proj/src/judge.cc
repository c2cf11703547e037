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

#include "fedleak/judge.h"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "fedleak/error.h"
#include "fedleak/kernels.h"

namespace fedleak {
namespace {

using nlohmann::json;

std::vector<TokenSeq> Outputs(const GenerationSet& gens) {
  std::vector<TokenSeq> out;
  out.reserve(gens.records.size());
  for (const auto& r : gens.records) out.push_back(r.output);
  return out;
}

std::vector<ExtractionRecord> ToRecords(
    const GenerationSet& gens, const EvaluationSet& eval_set,
    const std::vector<std::optional<std::size_t>>& matches) {
  std::vector<ExtractionRecord> out;
  for (std::size_t i = 0; i < matches.size(); ++i) {
    if (!matches[i]) continue;
    const GenerationRecord& g = gens.records[i];
    out.push_back({eval_set.items[*matches[i]], g.prefix_idx, g.sample_idx, g.output});
  }
  return out;
}

json RateToJson(const Rate& r, int decimals) {
  return {{"numerator", r.numerator},
          {"denominator", r.denominator},
          {"value", r.value()},
          {"percent", r.Percent(decimals)}};
}

std::map<TokenSeq, std::set<std::string>> LabelsBySurface(
    std::span<const PiiSpan> spans) {
  std::map<TokenSeq, std::set<std::string>> out;
  for (const auto& s : spans) out[s.surface].insert(s.minor);
  return out;
}

}  // namespace

EvaluationSet BuildEvaluationSet(std::span<const TokenSeq> victim_pii,
                                 std::span<const TokenSeq> attacker_pii,
                                 std::span<const Token> attacker_corpus,
                                 std::span<const TokenSeq> victim_documents) {
  EvaluationSet out;
  const std::set<TokenSeq> victim(victim_pii.begin(), victim_pii.end());
  const std::set<TokenSeq> attacker(attacker_pii.begin(), attacker_pii.end());

  std::vector<TokenSeq> remaining;
  for (const auto& s : victim) {
    if (s.empty()) continue;
    if (attacker.contains(s)) {
      out.dropped.push_back({s, kDropInAttackerPii});
    } else {
      remaining.push_back(s);
    }
  }
  const std::vector<char> in_corpus = kernels::OccursIn(remaining, attacker_corpus);
  std::vector<TokenSeq> candidates;
  for (std::size_t i = 0; i < remaining.size(); ++i) {
    if (in_corpus[i]) {
      out.dropped.push_back({remaining[i], kDropInAttackerCorpus});
    } else {
      candidates.push_back(remaining[i]);
    }
  }

  const std::vector<std::int64_t> df =
      kernels::DocumentFrequency(candidates, victim_documents);
  // candidates are sorted, so equal first tokens are adjacent.
  std::size_t g = 0;
  while (g < candidates.size()) {
    std::size_t end = g;
    std::size_t keep = g;
    while (end < candidates.size() && candidates[end].front() == candidates[g].front()) {
      if (df[end] > df[keep]) keep = end;
      ++end;
    }
    for (std::size_t i = g; i < end; ++i) {
      if (i == keep) {
        out.items.push_back(candidates[i]);
      } else {
        out.dropped.push_back({candidates[i], kDropLcpConflict});
      }
    }
    g = end;
  }
  return out;
}

std::vector<ExtractionRecord> MatchExtractions(const GenerationSet& gens,
                                               const EvaluationSet& eval_set) {
  return ToRecords(gens, eval_set,
                   kernels::MatchPrefixes(Outputs(gens), eval_set.items));
}

std::vector<ExtractionRecord> MatchExtractionsSerial(const GenerationSet& gens,
                                                     const EvaluationSet& eval_set) {
  return ToRecords(gens, eval_set,
                   kernels::serial::MatchPrefixes(Outputs(gens), eval_set.items));
}

std::set<TokenSeq> VxPii(std::span<const ExtractionRecord> records) {
  std::set<TokenSeq> out;
  for (const auto& r : records) out.insert(r.pii);
  return out;
}

double Rate::value() const {
  return static_cast<double>(numerator) / static_cast<double>(denominator);
}

std::string Rate::Percent(int decimals) const {
  std::int64_t scale = 100;
  for (int i = 0; i < decimals; ++i) scale *= 10;
  // round half up on the exact rational numerator * scale / denominator
  const __int128 scaled =
      (static_cast<__int128>(numerator) * scale * 2 + denominator) /
      (static_cast<__int128>(denominator) * 2);
  std::int64_t unit = 1;
  for (int i = 0; i < decimals; ++i) unit *= 10;
  const auto v = static_cast<std::int64_t>(scaled);
  std::string out = std::to_string(v / unit);
  if (decimals > 0) {
    std::string frac = std::to_string(v % unit);
    out += "." + std::string(static_cast<std::size_t>(decimals) - frac.size(), '0') + frac;
  }
  return out + "%";
}

AttackReport ComputeMetrics(std::span<const ExtractionRecord> records,
                            const EvaluationSet& eval_set,
                            std::int64_t total_queries,
                            std::span<const PiiSpan> label_spans) {
  if (total_queries < 1) throw ConfigError("total_queries must be >= 1");
  AttackReport report;
  report.vxpii = VxPii(records);
  report.total_queries = total_queries;
  report.eval_size = eval_set.items.size();
  const auto vx = static_cast<std::int64_t>(report.vxpii.size());
  if (!eval_set.items.empty()) {
    report.cr = Rate{vx, static_cast<std::int64_t>(eval_set.items.size())};
  }
  report.ef = Rate{vx, total_queries};
  report.per_label_counts = LabelDistribution(report.vxpii, label_spans);
  return report;
}

json ReportToJson(const AttackReport& report, TokenizerMode mode) {
  json j;
  if (report.cr) {
    j["cr"] = RateToJson(*report.cr, kCrPercentDecimals);
  } else {
    j["cr"] = {{"undefined", true}, {"reason", "evaluation set is empty"}};
  }
  j["ef"] = RateToJson(report.ef, kEfPercentDecimals);
  j["vxpii_count"] = report.vxpii.size();
  j["eval_size"] = report.eval_size;
  j["total_queries"] = report.total_queries;
  json vx = json::array();
  for (const auto& s : report.vxpii) vx.push_back(Detokenize(s, mode));
  j["vxpii"] = std::move(vx);
  j["per_label_counts"] = report.per_label_counts;
  j["per_label_note"] =
      "a surface with several labels counts once per label; totals may exceed vxpii_count";
  j["config"] = report.config_snapshot;
  return j;
}

SetDifference SetDifferenceAnalysis(const std::set<TokenSeq>& a,
                                    const std::set<TokenSeq>& b) {
  SetDifference d;
  for (const auto& s : a) {
    if (b.contains(s)) {
      ++d.both;
    } else {
      ++d.a_only;
    }
  }
  d.b_only = b.size() - d.both;
  return d;
}

std::map<std::string, std::int64_t> LabelDistribution(
    const std::set<TokenSeq>& vxpii, std::span<const PiiSpan> spans) {
  const auto labels = LabelsBySurface(spans);
  std::map<std::string, std::int64_t> out;
  for (const auto& s : vxpii) {
    auto it = labels.find(s);
    if (it == labels.end()) {
      ++out["unlabeled"];
      continue;
    }
    for (const auto& l : it->second) ++out[l];
  }
  return out;
}

std::map<TokenSeq, std::int64_t> DocFrequency(const std::set<TokenSeq>& vxpii,
                                              const AnnotatedCorpus& corpus) {
  const std::vector<TokenSeq> surfaces(vxpii.begin(), vxpii.end());
  const std::vector<std::int64_t> df =
      kernels::DocumentFrequency(surfaces, DocumentTokenLists(corpus));
  std::map<TokenSeq, std::int64_t> out;
  for (std::size_t i = 0; i < surfaces.size(); ++i) out[surfaces[i]] = df[i];
  return out;
}

json AttackConfigToJson(const AttackConfig& cfg) {
  json j;
  j["lambda"] = cfg.lambda;
  j["samples_per_prefix"] = cfg.samples_per_prefix;
  j["max_new_tokens"] = cfg.max_new_tokens;
  j["budget"] = cfg.budget ? json(*cfg.budget) : json(nullptr);
  j["freq_threshold"] = cfg.freq_threshold ? json(*cfg.freq_threshold) : json(nullptr);
  j["temperature"] = cfg.temperature;
  j["seed"] = cfg.seed;
  return j;
}

AttackOutcome RunPrefixAttack(const GenerationBackend& backend,
                              const AnnotatedCorpus& attacker,
                              const AnnotatedCorpus& victim,
                              const AttackConfig& cfg,
                              PrefixProvenance provenance,
                              QueryJournal* journal,
                              const AnnotatedCorpus* attacker_prefix_source) {
  cfg.Validate();
  const AnnotatedCorpus& source =
      attacker_prefix_source != nullptr ? *attacker_prefix_source : attacker;
  const ConcatenatedCorpus u = Concatenate(source);
  const PrefixMultiset ms = provenance == PrefixProvenance::kContextual
                                ? BuildContextual(u, cfg.lambda)
                                : BuildGeneralized(u, cfg.lambda);
  AttackOutcome out;
  out.prefixes = FrequencySelect(ms, cfg.freq_threshold, cfg.budget);
  if (out.prefixes.empty()) {
    throw ConfigError("attacker '" + attacker.owner + "' has no usable prefixes");
  }
  out.queries = ExecuteQueries(backend, PrefixTokens(out.prefixes), cfg, journal);
  if (out.queries.generations.total_queries == 0) {
    throw BackendError("every query failed; first error: " +
                       out.queries.failures.front().message);
  }

  const std::vector<TokenSeq> victim_pii = UniqueSurfaces(victim);
  const std::vector<TokenSeq> attacker_pii = UniqueSurfaces(attacker);
  const ConcatenatedCorpus u_a = &source == &attacker ? u : Concatenate(attacker);
  out.eval_set = BuildEvaluationSet(victim_pii, attacker_pii, u_a.tokens,
                                    DocumentTokenLists(victim));
  out.extractions = MatchExtractions(out.queries.generations, out.eval_set);
  out.report = ComputeMetrics(out.extractions, out.eval_set,
                              out.queries.generations.total_queries, victim.spans);
  json snap;
  snap["attack"] = AttackConfigToJson(cfg);
  snap["prefix_set"] = PrefixProvenanceName(provenance);
  snap["attacker"] = attacker.owner;
  snap["victim"] = victim.owner;
  snap["backend"] = backend.name();
  snap["prefixes_queried"] = out.prefixes.size() - out.queries.failures.size();
  snap["prefixes_failed"] = out.queries.failures.size();
  out.report.config_snapshot = std::move(snap);
  return out;
}

std::vector<SweepRow> BudgetSweep(const AttackOutcome& full,
                                  std::span<const std::int64_t> budgets) {
  const std::int64_t n = full.queries.generations.records.empty()
                             ? 0
                             : full.queries.generations.total_queries /
                                   static_cast<std::int64_t>(
                                       full.prefixes.size() - full.queries.failures.size());
  std::set<std::size_t> failed;
  for (const auto& f : full.queries.failures) failed.insert(f.prefix_idx);
  std::vector<SweepRow> rows;
  for (std::int64_t b : budgets) {
    if (b < 1) throw ConfigError("budgets must be >= 1");
    SweepRow row;
    row.budget = b;
    row.prefixes_used =
        std::min(full.prefixes.size(), static_cast<std::size_t>(b));
    std::size_t queried = row.prefixes_used;
    for (std::size_t f : failed) queried -= f < row.prefixes_used ? 1 : 0;
    row.total_queries = n * static_cast<std::int64_t>(queried);
    std::vector<ExtractionRecord> kept;
    for (const auto& r : full.extractions) {
      if (r.prefix_idx < row.prefixes_used) kept.push_back(r);
    }
    const auto vx = VxPii(kept);
    row.vxpii = vx.size();
    const auto vxn = static_cast<std::int64_t>(vx.size());
    if (!full.eval_set.items.empty()) {
      row.cr = Rate{vxn, static_cast<std::int64_t>(full.eval_set.items.size())};
    }
    if (row.total_queries < 1) throw ConfigError("budget row has no successful queries");
    row.ef = Rate{vxn, row.total_queries};
    rows.push_back(row);
  }
  return rows;
}

std::string SweepToCsv(std::span<const SweepRow> rows) {
  std::string out = "budget,prefixes_used,Q,vxpii,cr,ef\r\n";
  for (const auto& r : rows) {
    out += std::to_string(r.budget) + "," + std::to_string(r.prefixes_used) + "," +
           std::to_string(r.total_queries) + "," + std::to_string(r.vxpii) + "," +
           (r.cr ? r.cr->Percent(kCrPercentDecimals) : std::string()) + "," +
           r.ef.Percent(kEfPercentDecimals) + "\r\n";
  }
  return out;
}

CrossClientMatrix RunCrossClientMatrix(const std::vector<AnnotatedCorpus>& shards,
                                       const GenerationBackend& backend,
                                       const AttackConfig& cfg,
                                       PrefixProvenance provenance) {
  if (shards.size() < 2) throw ConfigError("cross-client matrix needs >= 2 shards");
  CrossClientMatrix m;
  m.cells.assign(shards.size(), std::vector<CrossClientCell>(shards.size()));
  for (std::size_t a = 0; a < shards.size(); ++a) {
    for (std::size_t v = 0; v < shards.size(); ++v) {
      if (a == v) continue;
      CrossClientCell& cell = m.cells[a][v];
      cell.applicable = true;
      try {
        const AttackOutcome o =
            RunPrefixAttack(backend, shards[a], shards[v], cfg, provenance);
        cell.cr = o.report.cr;
        cell.eval_size = o.report.eval_size;
        cell.vxpii = o.report.vxpii.size();
      } catch (const Error& e) {
        cell.error = e.what();
      }
    }
  }
  return m;
}

json CrossClientToJson(const CrossClientMatrix& m) {
  json rows = json::array();
  for (const auto& row : m.cells) {
    json r = json::array();
    for (const auto& c : row) {
      if (!c.applicable) {
        r.push_back("N/A");
        continue;
      }
      json cell;
      cell["cr"] = c.cr ? RateToJson(*c.cr, kCrPercentDecimals) : json(nullptr);
      cell["eval_size"] = c.eval_size;
      cell["vxpii"] = c.vxpii;
      if (!c.error.empty()) cell["error"] = c.error;
      r.push_back(std::move(cell));
    }
    rows.push_back(std::move(r));
  }
  return {{"rows_are", "attacker"}, {"columns_are", "victim"}, {"cells", rows}};
}

std::size_t EditDistance(std::span<const Token> a, std::span<const Token> b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1,
                         prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double VerbatimScore(const GenerationBackend& backend,
                     std::span<const PrefixTargetPair> samples,
                     double threshold) {
  if (samples.empty()) throw ConfigError("verbatim score needs at least one sample");
  if (!(threshold >= 0 && threshold <= 1)) {
    throw ConfigError("verbatim threshold must be in [0, 1]");
  }
  std::vector<GenerationRequest> reqs;
  std::vector<std::size_t> req_of_sample(samples.size(), static_cast<std::size_t>(-1));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].second.empty()) continue;
    GenerationRequest r;
    r.prefix = samples[i].first;
    r.max_new_tokens = static_cast<int>(samples[i].second.size());
    r.num_samples = 1;
    r.temperature = 0;
    r.mode = DecodeMode::kGreedy;
    req_of_sample[i] = reqs.size();
    reqs.push_back(std::move(r));
  }
  const auto results =
      kernels::RunQueries(backend, reqs, backend.max_concurrency(), nullptr);
  std::size_t extracted = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const TokenSeq& b = samples[i].second;
    double similarity = 1.0;
    if (!b.empty()) {
      const auto& r = results[req_of_sample[i]];
      if (!r.ok) throw BackendError("verbatim generation failed: " + r.error);
      const TokenSeq& g = r.outputs.front();
      similarity = 1.0 - static_cast<double>(EditDistance(g, b)) /
                             static_cast<double>(std::max(g.size(), b.size()));
    }
    if (similarity >= threshold) ++extracted;
  }
  return static_cast<double>(extracted) / static_cast<double>(samples.size());
}

}  // namespace fedleak
