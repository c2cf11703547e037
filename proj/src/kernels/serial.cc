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

#include <algorithm>
#include <stdexcept>

#include "fedleak/kernels.h"

namespace fedleak::kernels::serial {
namespace {

bool StartsWith(const TokenSeq& seq, const TokenSeq& head) {
  return seq.size() >= head.size() &&
         std::equal(head.begin(), head.end(), seq.begin());
}

bool Contains(std::span<const Token> haystack, const TokenSeq& needle) {
  return std::search(haystack.begin(), haystack.end(), needle.begin(),
                     needle.end()) != haystack.end();
}

}  // namespace

std::vector<std::optional<std::size_t>> MatchPrefixes(
    std::span<const TokenSeq> outputs, std::span<const TokenSeq> items) {
  std::vector<std::optional<std::size_t>> out(outputs.size());
  for (std::size_t o = 0; o < outputs.size(); ++o) {
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (!StartsWith(outputs[o], items[i])) continue;
      if (out[o]) throw std::logic_error("output matches two evaluation items");
      out[o] = i;
    }
  }
  return out;
}

std::vector<std::int64_t> DocumentFrequency(std::span<const TokenSeq> surfaces,
                                            std::span<const TokenSeq> documents) {
  std::vector<std::int64_t> out(surfaces.size(), 0);
  for (std::size_t s = 0; s < surfaces.size(); ++s) {
    if (surfaces[s].empty()) continue;
    for (const auto& doc : documents) {
      if (Contains(doc, surfaces[s])) ++out[s];
    }
  }
  return out;
}

std::vector<char> OccursIn(std::span<const TokenSeq> needles,
                           std::span<const Token> haystack) {
  std::vector<char> out(needles.size(), 0);
  for (std::size_t n = 0; n < needles.size(); ++n) {
    out[n] = !needles[n].empty() && Contains(haystack, needles[n]);
  }
  return out;
}

std::vector<QueryResult> RunQueries(const GenerationBackend& backend,
                                    std::span<const GenerationRequest> requests,
                                    const QueryCallback& on_done) {
  std::vector<QueryResult> out(requests.size());
  for (std::size_t i = 0; i < requests.size(); ++i) {
    try {
      out[i].outputs = backend.Generate(requests[i]);
      out[i].ok = true;
    } catch (const std::exception& e) {
      out[i].error = e.what();
    }
    if (on_done) on_done(i, out[i]);
  }
  return out;
}

}  // namespace fedleak::kernels::serial
