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

#ifndef FEDLEAK_TOKENIZER_H_
#define FEDLEAK_TOKENIZER_H_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fedleak {

using Token = std::string;
using TokenSeq = std::vector<Token>;

enum class TokenizerMode {
  // Every Unicode codepoint (whitespace included) is one token, so token
  // indices and character offsets coincide.
  kCodepoint,
  // Maximal runs of non-whitespace codepoints.
  kWhitespace,
};

// Half-open range of codepoint offsets into the source text.
struct CharRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool operator==(const CharRange&) const = default;
};

struct TokenizedText {
  TokenSeq tokens;
  std::vector<CharRange> chars;  // parallel to `tokens`
};

// Splits UTF-8 text into codepoints (each returned as its byte string).
// Throws ParseError on invalid UTF-8.
std::vector<std::string> SplitCodepoints(std::string_view text);

std::size_t CodepointLength(std::string_view text);

bool IsWhitespaceCodepoint(std::string_view codepoint);

TokenizedText Tokenize(std::string_view text, TokenizerMode mode);

// Inverse of Tokenize up to whitespace normalization: codepoint tokens are
// concatenated, whitespace tokens are joined by a single space.
std::string Detokenize(std::span<const Token> tokens, TokenizerMode mode);

TokenizerMode ParseTokenizerMode(std::string_view name);
std::string_view TokenizerModeName(TokenizerMode mode);

}  // namespace fedleak

#endif  // FEDLEAK_TOKENIZER_H_
