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

#include "fedleak/kernels.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <map>
#include <random>

#include "test_util.h"

namespace fedleak {
namespace {

using testing::RandomSeq;

std::vector<TokenSeq> Seqs(std::mt19937_64& rng, int n, std::size_t max_len,
                           int alphabet, std::size_t min_len = 0) {
  std::vector<TokenSeq> out;
  for (int i = 0; i < n; ++i) out.push_back(RandomSeq(rng, max_len, alphabet, min_len));
  return out;
}

// Random LCP-disjoint item set: at most one item per first token.
std::vector<TokenSeq> DisjointItems(std::mt19937_64& rng, int alphabet) {
  std::map<Token, TokenSeq> by_first;
  for (const auto& s : Seqs(rng, 40, 3, alphabet, 1)) by_first.emplace(s[0], s);
  std::vector<TokenSeq> out;
  for (auto& [k, v] : by_first) out.push_back(v);
  return out;
}

TEST(KernelsTest, MatchPrefixesParallelEqualsSerial) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const auto items = DisjointItems(rng, 12);
    const auto outputs = Seqs(rng, 300, 5, 12);
    const auto par = kernels::MatchPrefixes(outputs, items);
    ASSERT_EQ(par, kernels::serial::MatchPrefixes(outputs, items));
    for (std::size_t i = 0; i < outputs.size(); ++i) {
      if (!par[i]) continue;
      const auto& s = items[*par[i]];
      ASSERT_TRUE(std::equal(s.begin(), s.end(), outputs[i].begin()));
    }
  }
}

TEST(KernelsTest, DocumentFrequencyParallelEqualsSerial) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const auto surfaces = Seqs(rng, 60, 3, 5, 1);
    const auto docs = Seqs(rng, 80, 20, 5);
    ASSERT_EQ(kernels::DocumentFrequency(surfaces, docs),
              kernels::serial::DocumentFrequency(surfaces, docs));
  }
}

TEST(KernelsTest, OccursInParallelEqualsSerial) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto needles = Seqs(rng, 100, 4, 6, 1);
    const auto hay = RandomSeq(rng, 500, 6);
    const auto par = kernels::OccursIn(needles, hay);
    ASSERT_EQ(par, kernels::serial::OccursIn(needles, hay));
    for (std::size_t i = 0; i < needles.size(); ++i) {
      const bool naive = std::search(hay.begin(), hay.end(), needles[i].begin(),
                                     needles[i].end()) != hay.end();
      ASSERT_EQ(static_cast<bool>(par[i]), naive);
    }
  }
}

TEST(KernelsTest, EmptyInputs) {
  EXPECT_TRUE(kernels::MatchPrefixes({}, {}).empty());
  const std::vector<TokenSeq> outs = {{"a"}};
  EXPECT_EQ(kernels::MatchPrefixes(outs, {}),
            (std::vector<std::optional<std::size_t>>{std::nullopt}));
  const std::vector<TokenSeq> needle = {{"a"}};
  EXPECT_EQ(kernels::OccursIn(needle, {}), std::vector<char>{0});
  EXPECT_EQ(kernels::DocumentFrequency(needle, {}), std::vector<std::int64_t>{0});
}

TEST(KernelsTest, RunQueriesParallelEqualsSerial) {
  const auto corpus = testing::PlainCorpus({"a b c a b d", "b d a c", "c a b b"});
  const NGramBackend backend(Train(corpus, 3));
  std::vector<GenerationRequest> reqs;
  for (int i = 0; i < 40; ++i) {
    GenerationRequest r;
    r.prefix = {std::string(1, static_cast<char>('a' + i % 4))};
    r.num_samples = 3;
    r.max_new_tokens = 4;
    r.seed = static_cast<std::uint64_t>(i);
    reqs.push_back(r);
  }
  std::atomic<int> callbacks{0};
  const auto par =
      kernels::RunQueries(backend, reqs, 4, [&](std::size_t, const auto&) { ++callbacks; });
  const auto ser = kernels::serial::RunQueries(backend, reqs, nullptr);
  ASSERT_EQ(par.size(), ser.size());
  EXPECT_EQ(callbacks.load(), 40);
  for (std::size_t i = 0; i < par.size(); ++i) {
    EXPECT_TRUE(par[i].ok);
    EXPECT_EQ(par[i].outputs, ser[i].outputs);
  }
}

}  // namespace
}  // namespace fedleak
