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

#ifndef FEDLEAK_SYNTHETIC_H_
#define FEDLEAK_SYNTHETIC_H_

#include <cstddef>
#include <cstdint>
#include <set>

#include "fedleak/corpus.h"

namespace fedleak {

// Parameters of the synthetic court-record generator. Each document belongs
// to one task tag and mentions two people drawn from that tag's person pool
// with Zipf-distributed popularity, so frequent people recur across many
// documents. Names are drawn from a small space and collide across tags.
struct SyntheticSpec {
  std::size_t num_docs = 2000;
  int num_tags = 5;
  int persons_per_tag = 80;
  double zipf_exponent = 1.1;
  std::uint64_t seed = 0;
  // Text is space-delimited, so either mode works. Whitespace mode makes
  // each PII value a single token.
  TokenizerMode tokenizer = TokenizerMode::kWhitespace;

  void Validate() const;
};

// Corpus with owner "synthetic". Template text and PII values use disjoint
// character sets, and every PII value is annotated, so PII tokens occur only
// inside spans.
AnnotatedCorpus GenerateSyntheticCorpus(const SyntheticSpec& spec);

// Characters that may appear in template text and in PII values.
std::set<Token> SyntheticTemplateAlphabet();
std::set<Token> SyntheticPiiAlphabet();

// True when no token that occurs inside a span also occurs outside every
// span.
bool IsLeakTight(const AnnotatedCorpus& corpus);

}  // namespace fedleak

#endif  // FEDLEAK_SYNTHETIC_H_
