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

#include "fedleak/corpus.h"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "fedleak/error.h"
#include "fedleak/taxonomy.h"
#include "json.hpp"

namespace fedleak {
namespace {

using nlohmann::json;

std::string Where(std::string_view doc_id, std::size_t start_char,
                  std::size_t end_char) {
  return "doc '" + std::string(doc_id) + "' span [" +
         std::to_string(start_char) + "," + std::to_string(end_char) + ")";
}

template <typename T>
T Field(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ParseError(std::string("missing field '") + key + "'", line);
  }
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(std::string("field '") + key + "' has the wrong type",
                     line);
  }
}

}  // namespace

std::size_t AnnotatedCorpus::NumTokens() const {
  std::size_t n = 0;
  for (const auto& d : documents) n += d.tokens.size();
  return n;
}

std::optional<std::size_t> AnnotatedCorpus::FindDocument(
    std::string_view doc_id) const {
  for (std::size_t i = 0; i < documents.size(); ++i) {
    if (documents[i].doc_id == doc_id) return i;
  }
  return std::nullopt;
}

Document MakeDocument(std::string doc_id, std::string text,
                      std::optional<std::string> task_tag,
                      TokenizerMode mode) {
  if (text.find('\x1e') != std::string::npos ||
      text.find('\x1f') != std::string::npos) {
    throw ParseError("doc '" + doc_id +
                     "' contains reserved control character U+001E/U+001F");
  }
  TokenizedText tok = Tokenize(text, mode);
  Document doc;
  doc.doc_id = std::move(doc_id);
  doc.text = std::move(text);
  doc.tokens = std::move(tok.tokens);
  doc.chars = std::move(tok.chars);
  doc.task_tag = std::move(task_tag);
  return doc;
}

PiiSpan MakeSpan(const Document& doc, std::size_t start_char,
                 std::size_t end_char, std::string_view major,
                 std::string_view minor) {
  if (start_char >= end_char) {
    throw AnnotationError(Where(doc.doc_id, start_char, end_char) +
                          " is empty or reversed");
  }
  auto canonical = CanonicalMajor(major);
  if (!canonical || !IsValidLabel(major, minor)) {
    throw AnnotationError(Where(doc.doc_id, start_char, end_char) +
                          " has invalid label (" + std::string(major) + ", " +
                          std::string(minor) + ")");
  }
  auto first = std::find_if(doc.chars.begin(), doc.chars.end(),
                            [&](const CharRange& r) {
                              return r.begin == start_char;
                            });
  auto last = std::find_if(doc.chars.begin(), doc.chars.end(),
                           [&](const CharRange& r) { return r.end == end_char; });
  if (first == doc.chars.end() || last == doc.chars.end() || last < first) {
    throw AnnotationError(Where(doc.doc_id, start_char, end_char) +
                          " does not align with token boundaries");
  }
  PiiSpan span;
  span.doc_id = doc.doc_id;
  span.start = static_cast<std::size_t>(first - doc.chars.begin());
  span.end = static_cast<std::size_t>(last - doc.chars.begin()) + 1;
  span.major = *canonical;
  span.minor = std::string(minor);
  span.surface.assign(doc.tokens.begin() + static_cast<long>(span.start),
                      doc.tokens.begin() + static_cast<long>(span.end));
  return span;
}

AnnotatedCorpus ParseCorpus(std::istream& in, TokenizerMode mode,
                            std::string owner) {
  AnnotatedCorpus corpus;
  corpus.owner = std::move(owner);
  corpus.tokenizer = mode;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    if (!rec.is_object()) throw ParseError("record is not an object", line_no);

    auto doc_id = Field<std::string>(rec, "doc_id", line_no);
    auto text = Field<std::string>(rec, "text", line_no);
    std::optional<std::string> tag;
    if (auto it = rec.find("task_tag"); it != rec.end() && !it->is_null()) {
      if (!it->is_string()) {
        throw ParseError("field 'task_tag' must be a string or null", line_no);
      }
      tag = it->get<std::string>();
    }
    if (!seen_ids.insert(doc_id).second) {
      throw ParseError("duplicate doc_id '" + doc_id + "'", line_no);
    }
    Document doc;
    try {
      doc = MakeDocument(doc_id, std::move(text), std::move(tag), mode);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    }
    const std::vector<std::string> cps = SplitCodepoints(doc.text);

    json pii = json::array();
    if (auto it = rec.find("pii"); it != rec.end() && !it->is_null()) {
      if (!it->is_array()) throw ParseError("field 'pii' must be an array", line_no);
      pii = *it;
    }
    for (const json& p : pii) {
      if (!p.is_object()) throw ParseError("pii entry is not an object", line_no);
      const auto start_char = Field<std::size_t>(p, "start_char", line_no);
      const auto end_char = Field<std::size_t>(p, "end_char", line_no);
      const auto major = Field<std::string>(p, "major", line_no);
      const auto minor = Field<std::string>(p, "minor", line_no);
      const bool masked = p.value("masked", false);
      if (end_char > cps.size()) {
        throw AnnotationError(Where(doc_id, start_char, end_char) +
                              " exceeds text length " +
                              std::to_string(cps.size()));
      }
      PiiSpan span = MakeSpan(doc, start_char, end_char, major, minor);
      if (auto s = p.find("surface"); s != p.end()) {
        if (!s->is_string()) throw ParseError("field 'surface' must be a string", line_no);
        const std::string declared = s->get<std::string>();
        if (masked) {
          TokenSeq original = Tokenize(declared, mode).tokens;
          if (original.size() != span.end - span.start) {
            throw AnnotationError(Where(doc_id, start_char, end_char) +
                                  " masked surface has wrong token length");
          }
          span.surface = std::move(original);
        } else {
          std::string actual;
          for (std::size_t c = start_char; c < end_char; ++c) actual += cps[c];
          if (actual != declared) {
            throw AnnotationError(Where(doc_id, start_char, end_char) +
                                  " surface '" + declared +
                                  "' disagrees with text '" + actual + "'");
          }
        }
      } else if (masked) {
        throw AnnotationError(Where(doc_id, start_char, end_char) +
                              " is masked but has no original surface");
      }
      span.masked = masked;
      corpus.spans.push_back(std::move(span));
    }
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

AnnotatedCorpus Ingest(const std::filesystem::path& path, TokenizerMode mode,
                       std::string owner) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open corpus file " + path.string());
  return ParseCorpus(in, mode, std::move(owner));
}

void WriteCorpus(const AnnotatedCorpus& corpus, std::ostream& out) {
  std::vector<std::vector<const PiiSpan*>> by_doc(corpus.documents.size());
  for (const auto& span : corpus.spans) {
    auto idx = corpus.FindDocument(span.doc_id);
    if (!idx) {
      throw AnnotationError("span references unknown doc '" + span.doc_id + "'");
    }
    by_doc[*idx].push_back(&span);
  }
  for (std::size_t i = 0; i < corpus.documents.size(); ++i) {
    const Document& doc = corpus.documents[i];
    json rec;
    rec["doc_id"] = doc.doc_id;
    rec["text"] = doc.text;
    rec["task_tag"] = doc.task_tag ? json(*doc.task_tag) : json(nullptr);
    json pii = json::array();
    for (const PiiSpan* s : by_doc[i]) {
      json p;
      p["start_char"] = doc.chars[s->start].begin;
      p["end_char"] = doc.chars[s->end - 1].end;
      p["major"] = s->major;
      p["minor"] = s->minor;
      if (s->masked) {
        p["masked"] = true;
        p["surface"] = Detokenize(s->surface, corpus.tokenizer);
      }
      pii.push_back(std::move(p));
    }
    rec["pii"] = std::move(pii);
    out << rec.dump() << '\n';
  }
}

void Emit(const AnnotatedCorpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StorageError("cannot write corpus file " + path.string());
  WriteCorpus(corpus, out);
  if (!out) throw StorageError("write failed for " + path.string());
}

std::size_t ConcatenatedCorpus::DocumentStart(std::size_t pos) const {
  auto it = std::upper_bound(doc_offsets.begin(), doc_offsets.end(), pos);
  return it == doc_offsets.begin() ? 0 : *(it - 1);
}

ConcatenatedCorpus Concatenate(const AnnotatedCorpus& corpus) {
  if (corpus.documents.empty()) {
    throw ConfigError("cannot concatenate an empty corpus");
  }
  ConcatenatedCorpus out;
  out.tokens.reserve(corpus.NumTokens());
  std::vector<std::size_t> doc_start;
  doc_start.reserve(corpus.documents.size());
  for (const auto& doc : corpus.documents) {
    out.doc_offsets.push_back(out.tokens.size());
    doc_start.push_back(out.tokens.size());
    out.tokens.insert(out.tokens.end(), doc.tokens.begin(), doc.tokens.end());
  }
  out.doc_offsets.push_back(out.tokens.size());

  std::unordered_map<std::string_view, std::size_t> doc_index;
  for (std::size_t i = 0; i < corpus.documents.size(); ++i) {
    doc_index.emplace(corpus.documents[i].doc_id, i);
  }
  out.locations.reserve(corpus.spans.size());
  for (std::size_t s = 0; s < corpus.spans.size(); ++s) {
    const PiiSpan& span = corpus.spans[s];
    auto it = doc_index.find(span.doc_id);
    if (it == doc_index.end()) {
      throw AnnotationError("span references unknown doc '" + span.doc_id + "'");
    }
    out.locations.push_back(
        {doc_start[it->second] + span.start, span.end - span.start, s});
  }
  return out;
}

std::vector<TokenSeq> UniqueSurfaces(const AnnotatedCorpus& corpus) {
  std::set<TokenSeq> unique;
  for (const auto& s : corpus.spans) unique.insert(s.surface);
  return {unique.begin(), unique.end()};
}

std::vector<TokenSeq> DocumentTokenLists(const AnnotatedCorpus& corpus) {
  std::vector<TokenSeq> out;
  out.reserve(corpus.documents.size());
  for (const auto& d : corpus.documents) out.push_back(d.tokens);
  return out;
}

}  // namespace fedleak
