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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Oracles here deliberately avoid the library's own
// prefix, evaluation-set and decoding code paths.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fedleak/attack.h"
#include "fedleak/defense.h"
#include "fedleak/experiment.h"
#include "fedleak/federation.h"
#include "fedleak/judge.h"
#include "fedleak/partition.h"
#include "fedleak/synthetic.h"

namespace fedleak {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

int g_failures = 0;

void Report(const std::string& name, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
  if (!ok) ++g_failures;
}

// Runs `body`, turning an exception into a FAIL line.
void Criterion(const std::string& name, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    Report(name, false, std::string("exception: ") + e.what());
  }
}

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

// ---------------------------------------------------------------------------
// Shared synthetic setup.

constexpr int kClients = 5;
constexpr int kOrder = 5;
constexpr int kRounds = 10;
constexpr int kLambda = 10;
constexpr int kSamples = 5;
constexpr int kMaxNew = 10;

SyntheticSpec E2eCorpusSpec() {
  SyntheticSpec spec;
  spec.num_docs = 2000;
  spec.seed = 2024;
  return spec;
}

PartitionSpec E2ePartition() {
  PartitionSpec p;
  p.num_clients = kClients;
  p.seed = 7;
  return p;
}

FlConfig E2eFl() {
  FlConfig fl;
  fl.num_clients = kClients;
  fl.rounds = kRounds;
  fl.learner_order = kOrder;
  fl.seed = 7;
  return fl;
}

AttackConfig GreedyAttack() {
  AttackConfig a;
  a.lambda = kLambda;
  a.samples_per_prefix = kSamples;
  a.max_new_tokens = kMaxNew;
  a.temperature = 0;
  a.seed = 11;
  return a;
}

bool StartsWith(const TokenSeq& y, const TokenSeq& s) {
  return y.size() >= s.size() && std::equal(s.begin(), s.end(), y.begin());
}

bool Contains(const TokenSeq& hay, const TokenSeq& needle) {
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

// Contextual windows computed per document from the span metadata.
std::set<TokenSeq> OraclePrefixes(const AnnotatedCorpus& attacker, int lambda) {
  std::set<TokenSeq> out;
  for (const auto& span : attacker.spans) {
    const auto& toks = attacker.documents[*attacker.FindDocument(span.doc_id)].tokens;
    const std::size_t len = std::min<std::size_t>(span.start, lambda);
    if (len == 0) continue;
    out.emplace(toks.begin() + (span.start - len), toks.begin() + span.start);
  }
  return out;
}

// Victim-exclusive, LCP-disjoint evaluation set by brute force.
std::set<TokenSeq> OracleEvalSet(const AnnotatedCorpus& attacker,
                                 const AnnotatedCorpus& victim) {
  std::set<TokenSeq> attacker_pii, victim_pii;
  for (const auto& s : attacker.spans) attacker_pii.insert(s.surface);
  for (const auto& s : victim.spans) victim_pii.insert(s.surface);
  TokenSeq ua;
  for (const auto& d : attacker.documents) ua.insert(ua.end(), d.tokens.begin(), d.tokens.end());
  std::map<Token, std::vector<TokenSeq>> groups;
  for (const auto& s : victim_pii) {
    if (attacker_pii.contains(s) || Contains(ua, s)) continue;
    groups[s[0]].push_back(s);
  }
  std::set<TokenSeq> out;
  for (auto& [first, members] : groups) {
    const TokenSeq* best = nullptr;
    long best_df = -1;
    for (const auto& s : members) {  // members are in lexicographic order
      long df = 0;
      for (const auto& d : victim.documents) df += Contains(d.tokens, s);
      if (df > best_df) {
        best = &s;
        best_df = df;
      }
    }
    out.insert(*best);
  }
  return out;
}

// Greedy decoding straight from the count tables.
TokenSeq OracleGreedy(const NGramModel& model, const TokenSeq& prefix, int m) {
  TokenSeq hist = prefix;
  TokenSeq out;
  for (int step = 0; step < m; ++step) {
    const Token* pick = nullptr;
    const std::size_t longest = std::min<std::size_t>(hist.size(), model.order() - 1);
    for (std::size_t len = longest + 1; len-- > 0 && pick == nullptr;) {
      std::string key;
      for (std::size_t i = hist.size() - len; i < hist.size(); ++i) {
        if (i > hist.size() - len) key += '\x1f';
        key += hist[i];
      }
      const auto& table = model.table(static_cast<int>(len));
      auto it = table.find(key);
      if (it == table.end()) continue;
      double best = 0;
      for (const auto& [tok, c] : it->second.next) {
        if (c > best) {
          best = c;
          pick = &tok;
        }
      }
    }
    if (pick == nullptr || *pick == kBoundaryToken) break;
    out.push_back(*pick);
    hist.push_back(*pick);
  }
  return out;
}

std::string Str(std::size_t n) { return std::to_string(n); }

std::string RateStr(const std::optional<Rate>& r, int decimals) {
  if (!r) return "undefined";
  return std::to_string(r->numerator) + "/" + std::to_string(r->denominator) + " = " +
         r->Percent(decimals);
}

// ---------------------------------------------------------------------------

void ReferenceArithmetic() {
  Criterion("metric-arithmetic", [] {
    struct Row {
      std::int64_t vx, eval, q;
      const char* cr;
      const char* ef;
    };
    const std::int64_t q_pc = 15 * std::int64_t{71006};
    const std::int64_t q_sup = 15 * std::int64_t{3013161};
    const Row rows[] = {{2034, 8870, q_pc, "22.93%", "0.1910%"},
                        {2510, 8870, q_pc, "28.30%", "0.2357%"},
                        {4985, 8870, q_sup, "56.20%", "0.0110%"},
                        {2568, 8870, q_pc, "28.95%", "0.2411%"}};
    bool ok = q_pc == 1065090;
    std::string detail;
    for (const auto& r : rows) {
      std::vector<ExtractionRecord> recs;
      EvaluationSet es;
      for (std::int64_t i = 0; i < r.eval; ++i) es.items.push_back({"s" + std::to_string(i)});
      std::sort(es.items.begin(), es.items.end());
      for (std::int64_t i = 0; i < r.vx; ++i) recs.push_back({es.items[i], 0, 0, es.items[i]});
      const AttackReport rep = ComputeMetrics(recs, es, r.q);
      const std::string cr = rep.cr->Percent(kCrPercentDecimals);
      const std::string ef = rep.ef.Percent(kEfPercentDecimals);
      ok = ok && cr == r.cr && ef == r.ef;
      detail += "(" + std::to_string(r.vx) + ": " + cr + ", " + ef + ") ";
    }
    Report("metric-arithmetic", ok, detail + "Q=15x71006=" + std::to_string(q_pc));
  });

  Criterion("defense-arithmetic", [] {
    const Rate cr{2017, 8870};
    const Rate ef{2017, 15 * 71006};
    const bool ok = cr.Percent(kCrPercentDecimals) == "22.74%" &&
                    ef.Percent(kEfPercentDecimals) == "0.1894%";
    Report("defense-arithmetic", ok,
           "CR " + cr.Percent(kCrPercentDecimals) + ", EF " + ef.Percent(kEfPercentDecimals));
  });

  Criterion("differencing-triples", [] {
    bool ok = true;
    std::string detail;
    for (auto [a_only, b_only, both] : {std::array<std::size_t, 3>{682, 518, 1801},
                                        std::array<std::size_t, 3>{554, 308, 4611},
                                        std::array<std::size_t, 3>{407, 405, 2161}}) {
      std::set<TokenSeq> f, b;
      for (std::size_t i = 0; i < a_only + both; ++i) f.insert({"p" + std::to_string(i)});
      for (std::size_t i = a_only; i < a_only + both + b_only; ++i) {
        b.insert({"p" + std::to_string(i)});
      }
      const SetDifference d = SetDifferenceAnalysis(f, b);
      ok = ok && d == SetDifference{a_only, b_only, both};
      detail += "(" + Str(d.a_only) + ", " + Str(d.b_only) + ", " + Str(d.both) + ") ";
    }
    Report("differencing-triples", ok, detail);
  });
}

struct E2eState {
  std::vector<AnnotatedCorpus> shards;
  NGramModel global;
};

void EndToEnd(E2eState& st) {
  Criterion("e2e-greedy-oracle", [&] {
    const auto t0 = Clock::now();
    const AnnotatedCorpus corpus = GenerateSyntheticCorpus(E2eCorpusSpec());
    st.shards = Partition(corpus, E2ePartition());
    st.global = RunFederation(st.shards, E2eFl()).global;
    const NGramBackend backend(st.global);
    const AttackOutcome out = RunPrefixAttack(backend, st.shards[0], st.shards[1],
                                              GreedyAttack(), PrefixProvenance::kContextual);
    const double secs = Seconds(t0);

    const auto prefixes = OraclePrefixes(st.shards[0], kLambda);
    const auto eval = OracleEvalSet(st.shards[0], st.shards[1]);
    std::set<TokenSeq> reachable;
    for (const auto& p : prefixes) {
      const TokenSeq y = OracleGreedy(st.global, p, kMaxNew);
      for (const auto& s : eval) {
        if (StartsWith(y, s)) reachable.insert(s);
      }
    }
    const std::set<TokenSeq> lib_prefixes = [&] {
      std::set<TokenSeq> s;
      for (const auto& r : out.prefixes) s.insert(r.tokens);
      return s;
    }();
    const std::set<TokenSeq> lib_eval(out.eval_set.items.begin(), out.eval_set.items.end());
    const Rate oracle_cr{static_cast<std::int64_t>(reachable.size()),
                         static_cast<std::int64_t>(eval.size())};
    const bool ok = out.report.cr && *out.report.cr == oracle_cr &&
                    out.report.vxpii == reachable && lib_prefixes == prefixes &&
                    lib_eval == eval && !eval.empty() && secs < 120;
    Report("e2e-greedy-oracle", ok,
           "attack CR " + RateStr(out.report.cr, 2) + ", oracle CR " +
               RateStr(oracle_cr, 2) + ", |P_c|=" + Str(prefixes.size()) +
               ", Q=" + std::to_string(out.report.total_queries) + ", " +
               std::to_string(secs) + "s (limit 120s)");
  });
}

void BudgetTradeoff(const E2eState& st) {
  Criterion("budget-tradeoff", [&] {
    if (st.shards.empty()) throw std::runtime_error("end-to-end setup failed");
    const NGramBackend backend(st.global);
    AttackConfig cfg = GreedyAttack();
    std::size_t unique = FrequencySelect(
        BuildGeneralized(Concatenate(st.shards[0]), cfg.lambda)).size();
    if (unique < 10000) {
      cfg.lambda = 50;
      unique = FrequencySelect(BuildGeneralized(Concatenate(st.shards[0]), cfg.lambda)).size();
    }
    const std::int64_t budgets[] = {100, 1000, 10000};
    std::vector<AttackReport> reps;
    for (std::int64_t b : budgets) {
      AttackConfig c = cfg;
      c.budget = b;
      reps.push_back(RunPrefixAttack(backend, st.shards[0], st.shards[1], c,
                                     PrefixProvenance::kGeneralized)
                         .report);
    }
    bool ok = unique >= 10000;
    for (std::size_t i = 1; i < reps.size(); ++i) {
      ok = ok && std::includes(reps[i].vxpii.begin(), reps[i].vxpii.end(),
                               reps[i - 1].vxpii.begin(), reps[i - 1].vxpii.end());
      ok = ok && reps[i].cr && reps[i - 1].cr &&
           reps[i].cr->numerator >= reps[i - 1].cr->numerator;
    }
    const std::size_t v2 = reps[0].vxpii.size();
    const std::size_t v4 = reps[2].vxpii.size();
    const bool growth_below_100 = v4 < 100 * v2;
    const bool ef_drop = reps[2].ef.value() <= reps[0].ef.value();
    ok = ok && (!growth_below_100 || ef_drop);
    std::string detail = "lambda=" + std::to_string(cfg.lambda) + ", unique prefixes " +
                         Str(unique) + "; ";
    for (std::size_t i = 0; i < reps.size(); ++i) {
      detail += "B=" + std::to_string(budgets[i]) + " CR " +
                reps[i].cr->Percent(kCrPercentDecimals) + " EF " +
                reps[i].ef.Percent(kEfPercentDecimals) + "; ";
    }
    detail += std::string("growth<100x=") + (growth_below_100 ? "yes" : "no") +
              ", EF(1e4)<=EF(1e2)=" + (ef_drop ? "yes" : "no");
    Report("budget-tradeoff", ok, detail);
  });
}

void Masking(const E2eState& st) {
  Criterion("masking-defense", [&] {
    if (st.shards.empty()) throw std::runtime_error("end-to-end setup failed");
    AnnotatedCorpus all;
    for (const auto& s : st.shards) {
      all.documents.insert(all.documents.end(), s.documents.begin(), s.documents.end());
      all.spans.insert(all.spans.end(), s.spans.begin(), s.spans.end());
    }
    const bool tight = IsLeakTight(all);
    const DefenseComparison cmp =
        DefendedRun(st.shards, E2eFl(), GreedyAttack(), MaskingPolicy{});
    const auto& d = cmp.defended.report.cr;
    const auto& u = cmp.undefended.report.cr;
    const bool ok = tight && d && u && d->numerator == 0 && u->numerator > 0;
    Report("masking-defense", ok,
           std::string("leak-tight=") + (tight ? "yes" : "no") + ", defended CR " +
               RateStr(d, 2) + ", undefended CR " + RateStr(u, 2));
  });
}

TokenSeq RandomSeq(std::mt19937_64& rng, std::size_t lo, std::size_t hi, int alphabet) {
  TokenSeq s(lo + rng() % (hi - lo + 1));
  for (auto& t : s) t = "t" + std::to_string(rng() % alphabet);
  return s;
}

void OracleEquivalence() {
  Criterion("oracle-equivalence", [] {
    std::mt19937_64 rng(99);
    std::size_t match_mismatch = 0, df_mismatch = 0;
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<TokenSeq> raw;
      const int n_items = static_cast<int>(rng() % 51);
      for (int i = 0; i < n_items; ++i) raw.push_back(RandomSeq(rng, 1, 3, 10));
      const EvaluationSet es = BuildEvaluationSet(raw, {}, {}, {});
      GenerationSet g;
      const int n_out = static_cast<int>(rng() % 51);
      for (int i = 0; i < n_out; ++i) {
        g.records.push_back({static_cast<std::size_t>(i), 0, {}, RandomSeq(rng, 0, 5, 10)});
      }
      std::vector<ExtractionRecord> naive;
      for (const auto& r : g.records) {
        for (const auto& s : es.items) {
          if (StartsWith(r.output, s)) naive.push_back({s, r.prefix_idx, r.sample_idx, r.output});
        }
      }
      match_mismatch += MatchExtractions(g, es) != naive;
    }
    for (int trial = 0; trial < 50; ++trial) {
      AnnotatedCorpus c;
      c.tokenizer = TokenizerMode::kWhitespace;
      const int n_docs = 1 + static_cast<int>(rng() % 30);
      for (int d = 0; d < n_docs; ++d) {
        std::string text;
        for (const auto& t : RandomSeq(rng, 1, 15, 5)) text += (text.empty() ? "" : " ") + t;
        c.documents.push_back(MakeDocument("d" + std::to_string(d), text, std::nullopt,
                                           TokenizerMode::kWhitespace));
      }
      std::set<TokenSeq> surfaces;
      for (int i = 0; i < 20; ++i) surfaces.insert(RandomSeq(rng, 1, 3, 5));
      const auto df = DocFrequency(surfaces, c);
      for (const auto& s : surfaces) {
        std::int64_t naive = 0;
        for (const auto& d : c.documents) naive += Contains(d.tokens, s);
        df_mismatch += df.at(s) != naive;
      }
    }
    Report("oracle-equivalence", match_mismatch == 0 && df_mismatch == 0,
           "match mismatches " + Str(match_mismatch) + "/200, doc-frequency mismatches " +
               Str(df_mismatch) + " over 50 corpora");
  });
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ExperimentConfig PipelineConfig(const fs::path& out) {
  ExperimentConfig cfg;
  cfg.synthetic = E2eCorpusSpec();
  cfg.tokenizer = cfg.synthetic->tokenizer;
  cfg.partition = E2ePartition();
  cfg.fl = E2eFl();
  cfg.attack = GreedyAttack();
  cfg.attack.temperature = 1.0;  // exercise the seeded sampler too
  cfg.defense = DefenseConfig{};
  cfg.budget_sweep = {100, 1000};
  cfg.output_dir = out;
  return cfg;
}

void Determinism() {
  Criterion("determinism", [] {
    const fs::path root = fs::temp_directory_path() / "fedleak_acceptance_determinism";
    fs::remove_all(root);
    std::ostringstream log;
    for (const char* sub : {"run_a", "run_b"}) {
      Experiment exp(PipelineConfig(root / sub), log);
      exp.Evaluate(false, true);
      exp.Defend();
      exp.Sweep();
      exp.Report();
    }
    std::size_t files = 0, differing = 0;
    for (const auto& e : fs::recursive_directory_iterator(root / "run_a")) {
      if (!e.is_regular_file()) continue;
      const fs::path rel = fs::relative(e.path(), root / "run_a");
      if (rel == "manifest.json") continue;  // records its own output_dir
      ++files;
      if (Slurp(e.path()) != Slurp(root / "run_b" / rel)) {
        ++differing;
        std::cout << "  differs: " << rel.string() << "\n";
      }
    }
    const bool have_reports = fs::exists(root / "run_a/reports/summary.json");
    fs::remove_all(root);
    Report("determinism", differing == 0 && files > 0 && have_reports,
           Str(files) + " artifacts compared, " + Str(differing) + " differ");
  });
}

void CrossClient(const E2eState& st) {
  Criterion("cross-client-shape", [&] {
    if (st.shards.empty()) throw std::runtime_error("end-to-end setup failed");
    const auto t0 = Clock::now();
    const NGramBackend backend(st.global);
    const CrossClientMatrix m = RunCrossClientMatrix(st.shards, backend, GreedyAttack());
    const double secs = Seconds(t0);
    std::size_t populated = 0, diagonal_na = 0;
    std::string crs;
    for (std::size_t a = 0; a < m.cells.size(); ++a) {
      for (std::size_t v = 0; v < m.cells[a].size(); ++v) {
        const auto& c = m.cells[a][v];
        if (a == v) {
          diagonal_na += !c.applicable;
          continue;
        }
        if (c.applicable && c.cr && c.cr->value() >= 0 && c.cr->value() <= 1) ++populated;
        crs += c.cr ? c.cr->Percent(kCrPercentDecimals) + " " : "? ";
      }
    }
    const auto j = CrossClientToJson(m);
    const bool json_diag = j["cells"][0][0] == "N/A";
    Report("cross-client-shape",
           m.cells.size() == kClients && populated == 20 && diagonal_na == kClients &&
               json_diag && secs < 600,
           Str(populated) + "/20 cells in [0,1], diagonal N/A " + Str(diagonal_na) + "/5, " +
               std::to_string(secs) + "s; CRs " + crs);
  });
}

}  // namespace
}  // namespace fedleak

int main() {
  using namespace fedleak;
  ReferenceArithmetic();
  E2eState st;
  EndToEnd(st);
  BudgetTradeoff(st);
  Masking(st);
  OracleEquivalence();
  Determinism();
  CrossClient(st);
  std::cout << (g_failures == 0 ? "ALL PASS" : std::to_string(g_failures) + " FAILED")
            << std::endl;
  return g_failures == 0 ? 0 : 1;
}
