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

#include "fedleak/tokenizer.h"

#include <gtest/gtest.h>

#include "fedleak/error.h"

namespace fedleak {
namespace {

TEST(TokenizerTest, CodepointModeSplitsEveryCodepoint) {
  const TokenizedText t = Tokenize("张三 a", TokenizerMode::kCodepoint);
  EXPECT_EQ(t.tokens, (TokenSeq{"张", "三", " ", "a"}));
  ASSERT_EQ(t.chars.size(), 4u);
  for (std::size_t i = 0; i < t.chars.size(); ++i) {
    EXPECT_EQ(t.chars[i].begin, i);
    EXPECT_EQ(t.chars[i].end, i + 1);
  }
}

TEST(TokenizerTest, WhitespaceModeKeepsCharacterRanges) {
  const TokenizedText t = Tokenize("  ab\tcd　张三 ", TokenizerMode::kWhitespace);
  EXPECT_EQ(t.tokens, (TokenSeq{"ab", "cd", "张三"}));
  EXPECT_EQ(t.chars[0], (CharRange{2, 4}));
  EXPECT_EQ(t.chars[1], (CharRange{5, 7}));
  // U+3000 ideographic space separates tokens
  EXPECT_EQ(t.chars[2], (CharRange{8, 10}));
}

TEST(TokenizerTest, EmptyText) {
  EXPECT_TRUE(Tokenize("", TokenizerMode::kCodepoint).tokens.empty());
  EXPECT_TRUE(Tokenize("   ", TokenizerMode::kWhitespace).tokens.empty());
}

TEST(TokenizerTest, InvalidUtf8IsRejected) {
  EXPECT_THROW(SplitCodepoints("\xff"), ParseError);
  EXPECT_THROW(SplitCodepoints("\xe5\xbc"), ParseError);  // truncated
  EXPECT_THROW(Tokenize("a\xc0\x80", TokenizerMode::kCodepoint), ParseError);
  EXPECT_THROW(SplitCodepoints("\xed\xa0\x80"), ParseError);  // surrogate
  EXPECT_THROW(SplitCodepoints("\xf4\x90\x80\x80"), ParseError);  // > U+10FFFF
  EXPECT_EQ(SplitCodepoints("\xf0\x9f\x98\x80").size(), 1u);
}

TEST(TokenizerTest, CodepointLength) {
  EXPECT_EQ(CodepointLength("张三"), 2u);
  EXPECT_EQ(CodepointLength("ab"), 2u);
  EXPECT_EQ(CodepointLength(""), 0u);
}

TEST(TokenizerTest, DetokenizeInvertsTokenize) {
  const std::string cjk = "张三，出生于 1990 年";
  EXPECT_EQ(Detokenize(Tokenize(cjk, TokenizerMode::kCodepoint).tokens,
                       TokenizerMode::kCodepoint),
            cjk);
  EXPECT_EQ(Detokenize(Tokenize("a  b\tc", TokenizerMode::kWhitespace).tokens,
                       TokenizerMode::kWhitespace),
            "a b c");
}

TEST(TokenizerTest, ModeNamesRoundTrip) {
  for (auto m : {TokenizerMode::kCodepoint, TokenizerMode::kWhitespace}) {
    EXPECT_EQ(ParseTokenizerMode(TokenizerModeName(m)), m);
  }
  EXPECT_THROW(ParseTokenizerMode("bpe"), ConfigError);
}

}  // namespace
}  // namespace fedleak
