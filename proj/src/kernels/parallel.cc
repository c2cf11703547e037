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

#include <omp.h>

#include <algorithm>
#include <stdexcept>
#include <string_view>
#include <unordered_map>

#include "fedleak/kernels.h"

namespace fedleak::kernels {
namespace {

bool MatchesAt(std::span<const Token> haystack, std::size_t pos,
               const TokenSeq& needle) {
  if (pos + needle.size() > haystack.size()) return false;
  return std::equal(needle.begin(), needle.end(), haystack.begin() + static_cast<long>(pos));
}

}  // namespace

std::vector<std::optional<std::size_t>> MatchPrefixes(
    std::span<const TokenSeq> outputs, std::span<const TokenSeq> items) {
  std::unordered_map<std::string_view, std::vector<std::size_t>> by_first;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!items[i].empty()) by_first[items[i].front()].push_back(i);
  }
  std::vector<std::optional<std::size_t>> out(outputs.size());
  bool conflict = false;
#pragma omp parallel for schedule(static) reduction(|| : conflict)
  for (std::size_t o = 0; o < outputs.size(); ++o) {
    const TokenSeq& y = outputs[o];
    if (y.empty()) continue;
    auto it = by_first.find(y.front());
    if (it == by_first.end()) continue;
    for (std::size_t i : it->second) {
      if (!MatchesAt(y, 0, items[i])) continue;
      if (out[o]) conflict = true;
      out[o] = i;
    }
  }
  if (conflict) throw std::logic_error("output matches two evaluation items");
  return out;
}

std::vector<std::int64_t> DocumentFrequency(std::span<const TokenSeq> surfaces,
                                            std::span<const TokenSeq> documents) {
  // token -> (doc, position) in document order
  std::unordered_map<std::string_view, std::vector<std::pair<std::size_t, std::size_t>>> index;
  for (std::size_t d = 0; d < documents.size(); ++d) {
    for (std::size_t p = 0; p < documents[d].size(); ++p) {
      index[documents[d][p]].emplace_back(d, p);
    }
  }
  std::vector<std::int64_t> out(surfaces.size(), 0);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t s = 0; s < surfaces.size(); ++s) {
    const TokenSeq& needle = surfaces[s];
    if (needle.empty()) continue;
    auto it = index.find(needle.front());
    if (it == index.end()) continue;
    std::size_t last_doc = static_cast<std::size_t>(-1);
    for (const auto& [d, p] : it->second) {
      if (d == last_doc) continue;
      if (MatchesAt(documents[d], p, needle)) {
        ++out[s];
        last_doc = d;
      }
    }
  }
  return out;
}

std::vector<char> OccursIn(std::span<const TokenSeq> needles,
                           std::span<const Token> haystack) {
  std::unordered_map<std::string_view, std::vector<std::size_t>> index;
  for (std::size_t p = 0; p < haystack.size(); ++p) index[haystack[p]].push_back(p);
  std::vector<char> out(needles.size(), 0);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t n = 0; n < needles.size(); ++n) {
    if (needles[n].empty()) continue;
    auto it = index.find(needles[n].front());
    if (it == index.end()) continue;
    for (std::size_t p : it->second) {
      if (MatchesAt(haystack, p, needles[n])) {
        out[n] = 1;
        break;
      }
    }
  }
  return out;
}

std::vector<QueryResult> RunQueries(const GenerationBackend& backend,
                                    std::span<const GenerationRequest> requests,
                                    int workers, const QueryCallback& on_done) {
  std::vector<QueryResult> out(requests.size());
  const int threads = workers > 0 ? workers : omp_get_max_threads();
  const auto n = static_cast<std::int64_t>(requests.size());
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::int64_t i = 0; i < n; ++i) {
    QueryResult& r = out[i];
    try {
      r.outputs = backend.Generate(requests[i]);
      r.ok = true;
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    if (on_done) on_done(static_cast<std::size_t>(i), r);
  }
  return out;
}

}  // namespace fedleak::kernels
