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

#include <gtest/gtest.h>

#include "fedleak/error.h"
#include "fedleak/partition.h"
#include "fedleak/synthetic.h"
#include "test_util.h"

namespace fedleak {
namespace {

using testing::BracketCorpus;
using testing::Toks;

MaskingPolicy WithChar(std::string c) {
  MaskingPolicy p;
  p.mask_char = std::move(c);
  return p;
}

AnnotatedCorpus OneDoc(const std::string& text, std::size_t b, std::size_t e,
                       TokenizerMode mode = TokenizerMode::kCodepoint) {
  AnnotatedCorpus c;
  c.tokenizer = mode;
  Document d = MakeDocument("d0", text, std::nullopt, mode);
  c.spans.push_back(MakeSpan(d, b, e, "Basic", "Name"));
  c.documents.push_back(std::move(d));
  return c;
}

TEST(MaskCorpusTest, EqualLengthReplacement) {
  const auto masked = MaskCorpus(OneDoc("张三出生", 0, 2), {});
  EXPECT_EQ(masked.documents[0].text, "**出生");
  EXPECT_EQ(masked.documents[0].tokens, testing::Cps("**出生"));
  ASSERT_EQ(masked.spans.size(), 1u);
  EXPECT_TRUE(masked.spans[0].masked);
  EXPECT_EQ(masked.spans[0].surface, testing::Cps("张三"));
}

TEST(MaskCorpusTest, WhitespaceTokensKeepTheirCodepointLength) {
  const auto masked = MaskCorpus(OneDoc("ab 张三丰 cd", 3, 6, TokenizerMode::kWhitespace),
                                 WithChar("#"));
  EXPECT_EQ(masked.documents[0].text, "ab ### cd");
  EXPECT_EQ(masked.documents[0].tokens, Toks("ab ### cd"));
}

TEST(MaskCorpusTest, IdempotentAndNoOpWithoutSpans) {
  const auto c = BracketCorpus({"x [A] y [B]", "[C] z", "plain text"});
  const auto once = MaskCorpus(c, {});
  EXPECT_EQ(MaskCorpus(once, {}), once);
  const auto plain = testing::PlainCorpus({"a b", "c"});
  EXPECT_EQ(MaskCorpus(plain, {}), plain);
}

TEST(MaskCorpusTest, OverlappingSpansMaskTheUnion) {
  AnnotatedCorpus c = OneDoc("abcdef", 1, 3);
  c.spans.push_back(MakeSpan(c.documents[0], 2, 5, "Basic", "Address"));
  EXPECT_EQ(MaskCorpus(c, {}).documents[0].text, "a****f");
}

TEST(MaskCorpusTest, LabelSubsetScope) {
  AnnotatedCorpus c = OneDoc("abcdef", 0, 2);
  c.spans.push_back(MakeSpan(c.documents[0], 3, 5, "Property", "Bank Account"));
  MaskingPolicy p{.scope = MaskScope::kLabelSubset, .labels = {"Bank Account"}};
  EXPECT_EQ(MaskCorpus(c, p).documents[0].text, "abc**f");
  p.labels = {"Personal Basic Information"};
  EXPECT_EQ(MaskCorpus(c, p).documents[0].text, "**cdef");
  p.labels = {"Basic", "Property"};
  EXPECT_EQ(MaskCorpus(c, p).documents[0].text, "**c**f");
}

TEST(MaskingPolicyTest, Validation) {
  EXPECT_NO_THROW(MaskingPolicy{}.Validate());
  EXPECT_NO_THROW(WithChar("＊").Validate());
  for (std::string bad : {"", "**", " ", "\x1e", "\xff"}) {
    EXPECT_THROW(WithChar(bad).Validate(), ConfigError) << bad;
  }
  MaskingPolicy subset;
  subset.scope = MaskScope::kLabelSubset;
  EXPECT_THROW(subset.Validate(), ConfigError);
  EXPECT_EQ(ParseMaskScope(MaskScopeName(MaskScope::kLabelSubset)),
            MaskScope::kLabelSubset);
  EXPECT_THROW(ParseMaskScope("some"), ConfigError);
}

TEST(MaskCorpusTest, PreservesTokenCountsAndHidesSurfaces) {
  SyntheticSpec spec;
  spec.num_docs = 200;
  const auto corpus = GenerateSyntheticCorpus(spec);
  const auto masked = MaskCorpus(corpus, {});
  ASSERT_EQ(masked.documents.size(), corpus.documents.size());
  for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
    EXPECT_EQ(masked.documents[d].tokens.size(), corpus.documents[d].tokens.size());
  }
  std::set<TokenSeq> surfaces;
  for (const auto& s : corpus.spans) surfaces.insert(s.surface);
  for (const auto& [surface, df] : DocFrequency(surfaces, masked)) {
    EXPECT_EQ(df, 0) << Detokenize(surface, TokenizerMode::kWhitespace);
  }
  // Round trip through the JSONL schema keeps the masked flag.
  std::ostringstream out;
  WriteCorpus(masked, out);
  std::istringstream in(out.str());
  EXPECT_EQ(ParseCorpus(in, masked.tokenizer, masked.owner).spans, masked.spans);
}

TEST(DefendedRunTest, LeakTightCorpusLeaksNothingWhenMasked) {
  SyntheticSpec spec;
  spec.num_docs = 400;
  spec.persons_per_tag = 30;
  spec.seed = 3;
  const auto corpus = GenerateSyntheticCorpus(spec);
  ASSERT_TRUE(IsLeakTight(corpus));
  PartitionSpec ps;
  ps.num_clients = 3;
  const auto shards = Partition(corpus, ps);
  FlConfig fl;
  fl.num_clients = 3;
  fl.rounds = 2;
  fl.learner_order = 4;
  AttackConfig attack;
  attack.lambda = 6;
  attack.samples_per_prefix = 2;
  attack.max_new_tokens = 4;
  attack.temperature = 0;
  const auto cmp = DefendedRun(shards, fl, attack, {}, {.attacker = 0, .victim = 1});

  EXPECT_TRUE(cmp.defended.report.vxpii.empty());
  EXPECT_GT(cmp.undefended.report.vxpii.size(), 0u);
  EXPECT_EQ(cmp.defended.prefixes, cmp.undefended.prefixes);
  EXPECT_EQ(cmp.diff, SetDifferenceAnalysis(cmp.defended.report.vxpii,
                                            cmp.undefended.report.vxpii));
  const auto j = DefenseToJson(cmp, TokenizerMode::kWhitespace);
  EXPECT_EQ(j["difference"]["undefended_only"], cmp.undefended.report.vxpii.size());

  // The defended global model never saw a span-only token.
  const NGramModel defended =
      RunFederation(
          [&] {
            std::vector<AnnotatedCorpus> m;
            for (const auto& s : shards) m.push_back(MaskCorpus(s, {}));
            return m;
          }(),
          fl)
          .global;
  for (const auto& s : corpus.spans) {
    for (const auto& tok : s.surface) EXPECT_FALSE(defended.vocab().contains(tok));
  }
}

}  // namespace
}  // namespace fedleak
