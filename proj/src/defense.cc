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

#include "fedleak/defense.h"

#include <string>
#include <vector>

#include "fedleak/backend.h"
#include "fedleak/error.h"
#include "fedleak/taxonomy.h"

namespace fedleak {

MaskScope ParseMaskScope(std::string_view name) {
  if (name == "all-labels") return MaskScope::kAllLabels;
  if (name == "label-subset") return MaskScope::kLabelSubset;
  throw ConfigError("unknown mask scope '" + std::string(name) +
                    "' (expected all-labels or label-subset)");
}

std::string_view MaskScopeName(MaskScope scope) {
  return scope == MaskScope::kAllLabels ? "all-labels" : "label-subset";
}

void MaskingPolicy::Validate() const {
  std::vector<std::string> cps;
  try {
    cps = SplitCodepoints(mask_char);
  } catch (const Error&) {
    throw ConfigError("mask_char is not valid UTF-8");
  }
  if (cps.size() != 1) throw ConfigError("mask_char must be exactly one codepoint");
  if (IsWhitespaceCodepoint(cps.front())) {
    throw ConfigError("mask_char must not be whitespace");
  }
  if (cps.front() == "\x1e" || cps.front() == "\x1f") {
    throw ConfigError("mask_char must not be a reserved control character");
  }
  if (scope == MaskScope::kLabelSubset && labels.empty()) {
    throw ConfigError("label-subset masking needs at least one label");
  }
}

bool MaskingPolicy::InScope(const PiiSpan& span) const {
  if (scope == MaskScope::kAllLabels) return true;
  if (labels.contains(span.minor) || labels.contains(span.major)) return true;
  for (const auto& l : labels) {
    auto key = CanonicalMajor(l);
    if (key && *key == span.major) return true;
  }
  return false;
}

AnnotatedCorpus MaskCorpus(const AnnotatedCorpus& corpus,
                           const MaskingPolicy& policy) {
  policy.Validate();
  AnnotatedCorpus out = corpus;
  std::vector<std::vector<char>> masked(out.documents.size());
  for (std::size_t d = 0; d < out.documents.size(); ++d) {
    masked[d].assign(out.documents[d].tokens.size(), 0);
  }
  for (auto& span : out.spans) {
    if (!policy.InScope(span)) continue;
    auto d = out.FindDocument(span.doc_id);
    if (!d) throw AnnotationError("span refers to unknown document " + span.doc_id);
    for (std::size_t t = span.start; t < span.end; ++t) masked[*d][t] = 1;
    span.masked = true;
  }

#pragma omp parallel for schedule(dynamic)
  for (std::size_t d = 0; d < out.documents.size(); ++d) {
    Document& doc = out.documents[d];
    bool any = false;
    for (char m : masked[d]) any = any || m;
    if (!any) continue;
    std::vector<std::string> cps = SplitCodepoints(doc.text);
    for (std::size_t t = 0; t < doc.tokens.size(); ++t) {
      if (!masked[d][t]) continue;
      std::string repl;
      for (std::size_t c = doc.chars[t].begin; c < doc.chars[t].end; ++c) {
        cps[c] = policy.mask_char;
        repl += policy.mask_char;
      }
      doc.tokens[t] = std::move(repl);
    }
    std::string text;
    for (const auto& cp : cps) text += cp;
    doc.text = std::move(text);
  }
  return out;
}

DefenseComparison DefendedRun(const std::vector<AnnotatedCorpus>& shards,
                              const FlConfig& fl_cfg,
                              const AttackConfig& attack_cfg,
                              const MaskingPolicy& policy,
                              const DefenseOptions& options) {
  policy.Validate();
  if (options.attacker >= shards.size() || options.victim >= shards.size()) {
    throw ConfigError("attacker/victim index out of range");
  }
  if (options.attacker == options.victim) {
    throw ConfigError("attacker and victim must differ");
  }
  std::vector<AnnotatedCorpus> masked;
  masked.reserve(shards.size());
  for (const auto& s : shards) masked.push_back(MaskCorpus(s, policy));

  DefenseComparison cmp;
  const AnnotatedCorpus& attacker = shards[options.attacker];
  const AnnotatedCorpus& victim = shards[options.victim];
  {
    const FederationResult fed = RunFederation(shards, fl_cfg);
    const NGramBackend backend(fed.global);
    cmp.undefended = RunPrefixAttack(backend, attacker, victim, attack_cfg,
                                     options.provenance);
  }
  {
    const FederationResult fed = RunFederation(masked, fl_cfg);
    const NGramBackend backend(fed.global);
    const AnnotatedCorpus* source =
        options.prefixes_from_masked ? &masked[options.attacker] : &attacker;
    cmp.defended = RunPrefixAttack(backend, attacker, victim, attack_cfg,
                                   options.provenance, nullptr, source);
  }
  cmp.diff = SetDifferenceAnalysis(cmp.defended.report.vxpii,
                                   cmp.undefended.report.vxpii);
  return cmp;
}

nlohmann::json DefenseToJson(const DefenseComparison& cmp, TokenizerMode mode) {
  nlohmann::json j;
  j["defended"] = ReportToJson(cmp.defended.report, mode);
  j["undefended"] = ReportToJson(cmp.undefended.report, mode);
  j["difference"] = {{"defended_only", cmp.diff.a_only},
                     {"undefended_only", cmp.diff.b_only},
                     {"both", cmp.diff.both}};
  return j;
}

}  // namespace fedleak
