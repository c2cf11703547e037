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

#include "fedleak/federation.h"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numeric>

#include "fedleak/error.h"
#include "fedleak/partition.h"
#include "fedleak/synthetic.h"
#include "json.hpp"
#include "test_util.h"

namespace fedleak {
namespace {

using testing::PlainCorpus;

FlConfig Config(int rounds, int clients) {
  FlConfig cfg;
  cfg.rounds = rounds;
  cfg.num_clients = clients;
  cfg.learner_order = 3;
  return cfg;
}

std::vector<AnnotatedCorpus> TwoShards() {
  return {PlainCorpus({"a b c", "a b d"}, "client_0"), PlainCorpus({"b c a a"}, "client_1")};
}

TEST(FederationTest, OneRoundIsFedAvgOfLocalModels) {
  const auto shards = TwoShards();
  const FederationResult r = RunFederation(shards, Config(1, 2));
  const NGramModel local[] = {Train(shards[0], 3), Train(shards[1], 3)};
  const double w[] = {6.0 / 10.0, 4.0 / 10.0};
  EXPECT_EQ(r.global, FedAvg(local, w));
  ASSERT_EQ(r.logs.size(), 1u);
  EXPECT_EQ(r.logs[0].round, 1);
  EXPECT_EQ(r.logs[0].per_client_token_counts, (std::vector<std::size_t>{6, 4}));
  EXPECT_TRUE(r.logs[0].global_checkpoint_ref.empty());
}

TEST(FederationTest, StatelessRoundsReachFixedPointAfterOne) {
  const auto shards = TwoShards();
  const auto dir = testing::TempDir("fed_fixed");
  const CheckpointStore store(dir);
  const FederationResult r = RunFederation(shards, Config(3, 2), &store);
  EXPECT_EQ(store.Load(r.logs[0].global_checkpoint_ref),
            store.Load(r.logs[2].global_checkpoint_ref));
  EXPECT_EQ(r.global, RunFederation(shards, Config(1, 2)).global);
  std::filesystem::remove_all(dir);
}

TEST(FederationTest, WeightsSumToOneEveryRound) {
  const auto shards = TwoShards();
  for (auto agg : {Aggregator::kFedAvgWeighted, Aggregator::kFedAvgUniform}) {
    FlConfig cfg = Config(4, 2);
    cfg.aggregator = agg;
    for (const auto& log : RunFederation(shards, cfg).logs) {
      EXPECT_NEAR(std::accumulate(log.weights.begin(), log.weights.end(), 0.0), 1.0, 1e-12);
      if (agg == Aggregator::kFedAvgUniform) {
        EXPECT_EQ(log.weights[0], log.weights[1]);
      }
    }
  }
}

TEST(FederationTest, SingleClientEqualsLocalTraining) {
  const std::vector<AnnotatedCorpus> one = {PlainCorpus({"x y z", "y y x"}, "client_0")};
  for (int rounds : {1, 2, 5}) {
    EXPECT_EQ(RunFederation(one, Config(rounds, 1)).global, Train(one[0], 3));
  }
}

TEST(FederationTest, IncrementalModeCarriesScaledGlobal) {
  const auto shards = TwoShards();
  FlConfig cfg = Config(2, 2);
  cfg.local_step = LocalStep::kIncremental;
  const auto dir = testing::TempDir("fed_incr");
  const CheckpointStore store(dir);
  const FederationResult r = RunFederation(shards, cfg, &store);
  const NGramModel theta1 = store.Load(r.logs[0].global_checkpoint_ref);
  // theta_2 = sum_i w_i (own_i + theta_1 / c) = theta_1 (1 + 1/c)
  const NGramModel expected = theta1.Scaled(1.5);
  for (int len = 0; len < 3; ++len) {
    ASSERT_EQ(r.global.table(len).size(), expected.table(len).size());
    for (const auto& [key, stats] : expected.table(len)) {
      for (const auto& [tok, c] : stats.next) {
        EXPECT_NEAR(r.global.table(len).at(key).next.at(tok), c, 1e-12);
      }
    }
  }
  std::filesystem::remove_all(dir);
}

TEST(FederationTest, Errors) {
  auto shards = TwoShards();
  EXPECT_THROW(RunFederation(shards, Config(1, 3)), ConfigError);
  shards[1].documents.clear();
  try {
    RunFederation(shards, Config(1, 2));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("client_1"), std::string::npos);
  }
  EXPECT_THROW(RunFederation(TwoShards(), Config(0, 2)), ConfigError);
  EXPECT_THROW(ParseAggregator("fedprox"), ConfigError);
  EXPECT_THROW(ParseLocalStep("lazy"), ConfigError);
}

TEST(FederationTest, CheckpointsRoundTripAndManifest) {
  const auto shards = TwoShards();
  const auto dir = testing::TempDir("fed_ckpt");
  const CheckpointStore store(dir);
  const FederationResult ten = RunFederation(shards, Config(10, 2), &store);
  EXPECT_EQ(ten.logs[9].global_checkpoint_ref, "round_10/global.model");
  EXPECT_EQ(LoadCheckpoint(store, ten.logs[9].global_checkpoint_ref), ten.global);
  EXPECT_EQ(LoadCheckpoint(store, "round_1/global.model"),
            RunFederation(shards, Config(1, 2)).global);
  EXPECT_THROW(LoadCheckpoint(store, "round_11/global.model"), StorageError);
  EXPECT_THROW(LoadCheckpoint(store, ""), StorageError);
  {
    std::ofstream corrupt(dir / "round_2" / "global.model");
    corrupt << "{";
  }
  EXPECT_THROW(LoadCheckpoint(store, "round_2/global.model"), StorageError);

  std::ifstream in(dir / "manifest.json");
  const auto m = nlohmann::json::parse(in);
  EXPECT_EQ(m["fl_config"]["rounds"], 10);
  EXPECT_EQ(m["shards"].size(), 2u);
  EXPECT_EQ(m["shards"][1]["num_tokens"], 4);
  std::filesystem::remove_all(dir);
}

TEST(FederationTest, ServerAggregatesMessagesOnly) {
  // The server side sees parameters and sizes, never documents.
  NGramModel a(2), b(2);
  a.Add(testing::Toks("p"), "q", 1);
  b.Add(testing::Toks("p"), "q", 3);
  a.RecomputeTotals();
  b.RecomputeTotals();
  const std::vector<ClientUpdateMessage> msgs = {{a, 1}, {b, 3}};
  std::vector<double> w;
  const NGramModel g = ServerAggregate(msgs, Aggregator::kFedAvgWeighted, &w);
  EXPECT_EQ(w, (std::vector<double>{0.25, 0.75}));
  EXPECT_DOUBLE_EQ(g.Count(testing::Toks("p"), "q"), 2.5);
}

TEST(FederationTest, PartitionedSyntheticRunIsByteIdentical) {
  SyntheticSpec spec;
  spec.num_docs = 300;
  PartitionSpec ps;
  ps.seed = 4;
  const auto shards = Partition(GenerateSyntheticCorpus(spec), ps);
  FlConfig cfg = Config(3, 5);
  cfg.learner_order = 5;
  EXPECT_EQ(RunFederation(shards, cfg).global.Serialize(),
            RunFederation(shards, cfg).global.Serialize());
}

}  // namespace
}  // namespace fedleak
