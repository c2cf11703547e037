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

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fedleak/error.h"

namespace fedleak {

std::vector<std::string> SplitCodepoints(std::string_view text) {
  std::vector<std::string> out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const auto lead = static_cast<unsigned char>(text[i]);
    std::size_t len = 0;
    if (lead < 0x80) {
      len = 1;
    } else if ((lead & 0xE0) == 0xC0) {
      len = 2;
    } else if ((lead & 0xF0) == 0xE0) {
      len = 3;
    } else if ((lead & 0xF8) == 0xF0) {
      len = 4;
    } else {
      throw ParseError("invalid UTF-8 lead byte at offset " +
                       std::to_string(i));
    }
    if (i + len > text.size()) {
      throw ParseError("truncated UTF-8 sequence at offset " +
                       std::to_string(i));
    }
    for (std::size_t j = 1; j < len; ++j) {
      if ((static_cast<unsigned char>(text[i + j]) & 0xC0) != 0x80) {
        throw ParseError("invalid UTF-8 continuation byte at offset " +
                         std::to_string(i + j));
      }
    }
    std::uint32_t cp = len == 1 ? lead : lead & (0x7F >> len);
    for (std::size_t j = 1; j < len; ++j) {
      cp = (cp << 6) | (static_cast<unsigned char>(text[i + j]) & 0x3F);
    }
    static constexpr std::uint32_t kMinForLength[] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMinForLength[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      throw ParseError("invalid UTF-8 code point at offset " + std::to_string(i));
    }
    out.emplace_back(text.substr(i, len));
    i += len;
  }
  return out;
}

std::size_t CodepointLength(std::string_view text) {
  std::size_t n = 0;
  for (char c : text) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  }
  return n;
}

bool IsWhitespaceCodepoint(std::string_view cp) {
  if (cp.size() == 1) {
    const char c = cp[0];
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
           c == '\f';
  }
  // U+00A0 no-break space, U+3000 ideographic space.
  return cp == "\xC2\xA0" || cp == "\xE3\x80\x80";
}

TokenizedText Tokenize(std::string_view text, TokenizerMode mode) {
  const std::vector<std::string> cps = SplitCodepoints(text);
  TokenizedText out;
  if (mode == TokenizerMode::kCodepoint) {
    out.tokens.reserve(cps.size());
    out.chars.reserve(cps.size());
    for (std::size_t i = 0; i < cps.size(); ++i) {
      out.tokens.push_back(cps[i]);
      out.chars.push_back({i, i + 1});
    }
    return out;
  }
  std::size_t i = 0;
  while (i < cps.size()) {
    if (IsWhitespaceCodepoint(cps[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    std::string token;
    while (j < cps.size() && !IsWhitespaceCodepoint(cps[j])) {
      token += cps[j];
      ++j;
    }
    out.tokens.push_back(std::move(token));
    out.chars.push_back({i, j});
    i = j;
  }
  return out;
}

std::string Detokenize(std::span<const Token> tokens, TokenizerMode mode) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (mode == TokenizerMode::kWhitespace && i > 0) out += ' ';
    out += tokens[i];
  }
  return out;
}

TokenizerMode ParseTokenizerMode(std::string_view name) {
  if (name == "codepoint") return TokenizerMode::kCodepoint;
  if (name == "whitespace") return TokenizerMode::kWhitespace;
  throw ConfigError("unknown tokenizer '" + std::string(name) +
                    "' (expected codepoint or whitespace)");
}

std::string_view TokenizerModeName(TokenizerMode mode) {
  return mode == TokenizerMode::kCodepoint ? "codepoint" : "whitespace";
}

}  // namespace fedleak
