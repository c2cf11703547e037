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

#ifndef FEDLEAK_DEFENSE_H_
#define FEDLEAK_DEFENSE_H_

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "fedleak/attack.h"
#include "fedleak/corpus.h"
#include "fedleak/federation.h"
#include "fedleak/judge.h"
#include "json.hpp"

namespace fedleak {

enum class MaskScope {
  kAllLabels,
  kLabelSubset,
};

MaskScope ParseMaskScope(std::string_view name);  // "all-labels", "label-subset"
std::string_view MaskScopeName(MaskScope scope);

struct MaskingPolicy {
  std::string mask_char = "*";
  MaskScope scope = MaskScope::kAllLabels;
  // For kLabelSubset: major keys, major full names or minor labels.
  std::set<std::string> labels;

  // mask_char must be one non-whitespace, non-reserved codepoint.
  void Validate() const;
  bool InScope(const PiiSpan& span) const;
};

// Replaces every token of every in-scope span with mask_char repeated to the
// token's codepoint length. Token counts, character offsets and span
// metadata are preserved; masked spans keep their original surface.
AnnotatedCorpus MaskCorpus(const AnnotatedCorpus& corpus,
                           const MaskingPolicy& policy);

struct DefenseOptions {
  std::size_t attacker = 0;
  std::size_t victim = 1;
  PrefixProvenance provenance = PrefixProvenance::kContextual;
  // Build the attacker's prefixes from its masked shard instead of its raw
  // local copy.
  bool prefixes_from_masked = false;
};

struct DefenseComparison {
  AttackOutcome defended;
  AttackOutcome undefended;
  // a = defended VxPII, b = undefended VxPII.
  SetDifference diff;
};

// Trains and attacks twice with identical seeds: once on the raw shards and
// once on shards masked under `policy` (every client sanitizes). Both runs
// share the evaluation set built from the raw attacker and victim shards.
DefenseComparison DefendedRun(const std::vector<AnnotatedCorpus>& shards,
                              const FlConfig& fl_cfg,
                              const AttackConfig& attack_cfg,
                              const MaskingPolicy& policy,
                              const DefenseOptions& options = {});

nlohmann::json DefenseToJson(const DefenseComparison& cmp, TokenizerMode mode);

}  // namespace fedleak

#endif  // FEDLEAK_DEFENSE_H_
