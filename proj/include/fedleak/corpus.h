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

#ifndef FEDLEAK_CORPUS_H_
#define FEDLEAK_CORPUS_H_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fedleak/tokenizer.h"

namespace fedleak {

// An annotated PII occurrence. Offsets are token indices into the owning
// document; `surface` is tokens[start, end) unless the span was masked, in
// which case it keeps the original (pre-mask) tokens.
struct PiiSpan {
  std::string doc_id;
  std::size_t start = 0;
  std::size_t end = 0;
  std::string major;
  std::string minor;
  TokenSeq surface;
  bool masked = false;

  bool operator==(const PiiSpan&) const = default;
};

struct Document {
  std::string doc_id;
  std::string text;
  TokenSeq tokens;
  std::vector<CharRange> chars;  // codepoint range of each token in `text`
  std::optional<std::string> task_tag;

  bool operator==(const Document&) const = default;
};

struct AnnotatedCorpus {
  std::string owner;
  TokenizerMode tokenizer = TokenizerMode::kCodepoint;
  std::vector<Document> documents;
  std::vector<PiiSpan> spans;

  std::size_t NumTokens() const;
  // Index into `documents`, or nullopt.
  std::optional<std::size_t> FindDocument(std::string_view doc_id) const;

  bool operator==(const AnnotatedCorpus&) const = default;
};

// Control characters U+001E and U+001F are reserved for the language model's
// document boundary and context keys; text containing them is rejected.
Document MakeDocument(std::string doc_id, std::string text,
                      std::optional<std::string> task_tag,
                      TokenizerMode mode);

// Builds a span from codepoint offsets, which must fall on token boundaries.
// Throws AnnotationError on misalignment or an invalid label.
PiiSpan MakeSpan(const Document& doc, std::size_t start_char,
                 std::size_t end_char, std::string_view major,
                 std::string_view minor);

// Reads the JSONL interchange format (one document per line). Blank lines are
// skipped. Throws ParseError (with line number) or AnnotationError.
AnnotatedCorpus ParseCorpus(std::istream& in, TokenizerMode mode,
                            std::string owner = "");
AnnotatedCorpus Ingest(const std::filesystem::path& path,
                       TokenizerMode mode = TokenizerMode::kCodepoint,
                       std::string owner = "");

// Writes the JSONL format. Spans are emitted under their document in corpus
// order; masked spans carry "masked": true and their original "surface".
void WriteCorpus(const AnnotatedCorpus& corpus, std::ostream& out);
void Emit(const AnnotatedCorpus& corpus, const std::filesystem::path& path);

struct PiiLocation {
  std::size_t loc = 0;     // index of the first PII token in the concatenation
  std::size_t length = 0;  // surface length in tokens
  std::size_t span_index = 0;
};

// U = t_0 t_1 ... over all documents in list order.
struct ConcatenatedCorpus {
  TokenSeq tokens;
  std::vector<std::size_t> doc_offsets;  // documents.size() + 1 entries
  std::vector<PiiLocation> locations;    // one per span, multiset semantics

  // First token index of the document containing `pos`.
  std::size_t DocumentStart(std::size_t pos) const;
};

ConcatenatedCorpus Concatenate(const AnnotatedCorpus& corpus);

// Distinct span surfaces, sorted.
std::vector<TokenSeq> UniqueSurfaces(const AnnotatedCorpus& corpus);

std::vector<TokenSeq> DocumentTokenLists(const AnnotatedCorpus& corpus);

}  // namespace fedleak

#endif  // FEDLEAK_CORPUS_H_
