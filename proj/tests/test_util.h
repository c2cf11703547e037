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

#ifndef FEDLEAK_TESTS_TEST_UTIL_H_
#define FEDLEAK_TESTS_TEST_UTIL_H_

#include <unistd.h>

#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fedleak/corpus.h"
#include "fedleak/tokenizer.h"

namespace fedleak::testing {

// "a b c" -> {"a", "b", "c"}
inline TokenSeq Toks(std::string_view text) {
  return Tokenize(text, TokenizerMode::kWhitespace).tokens;
}

// Codepoint tokens of `text`.
inline TokenSeq Cps(std::string_view text) {
  return Tokenize(text, TokenizerMode::kCodepoint).tokens;
}

inline AnnotatedCorpus ParseString(const std::string& jsonl,
                                   TokenizerMode mode = TokenizerMode::kCodepoint,
                                   std::string owner = "") {
  std::istringstream in(jsonl);
  return ParseCorpus(in, mode, std::move(owner));
}

// Corpus of whitespace-tokenized documents without spans.
inline AnnotatedCorpus PlainCorpus(const std::vector<std::string>& texts,
                                   std::string owner = "c") {
  AnnotatedCorpus c;
  c.owner = std::move(owner);
  c.tokenizer = TokenizerMode::kWhitespace;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    c.documents.push_back(MakeDocument("d" + std::to_string(i), texts[i],
                                       std::nullopt, TokenizerMode::kWhitespace));
  }
  return c;
}

// Whitespace corpus where each document is a list of words and words written
// as "[word]" are annotated as (Basic, Name).
inline AnnotatedCorpus BracketCorpus(const std::vector<std::string>& docs,
                                     std::string owner = "c") {
  AnnotatedCorpus c;
  c.owner = std::move(owner);
  c.tokenizer = TokenizerMode::kWhitespace;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    std::string text;
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    std::size_t chars = 0;
    for (auto& w : Toks(docs[i])) {
      if (!text.empty()) {
        text += ' ';
        ++chars;
      }
      std::string word = w;
      const bool pii = word.size() > 2 && word.front() == '[' && word.back() == ']';
      if (pii) word = word.substr(1, word.size() - 2);
      const std::size_t len = CodepointLength(word);
      if (pii) spans.emplace_back(chars, chars + len);
      text += word;
      chars += len;
    }
    Document d = MakeDocument("d" + std::to_string(i), text, std::nullopt,
                              TokenizerMode::kWhitespace);
    for (auto [b, e] : spans) c.spans.push_back(MakeSpan(d, b, e, "Basic", "Name"));
    c.documents.push_back(std::move(d));
  }
  return c;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path TempDir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("fedleak_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Random token sequence over a small alphabet "t0".."t{alphabet-1}".
inline TokenSeq RandomSeq(std::mt19937_64& rng, std::size_t max_len, int alphabet,
                          std::size_t min_len = 0) {
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::uniform_int_distribution<int> tok(0, alphabet - 1);
  TokenSeq s(len(rng));
  for (auto& t : s) t = "t" + std::to_string(tok(rng));
  return s;
}

}  // namespace fedleak::testing

#endif  // FEDLEAK_TESTS_TEST_UTIL_H_
