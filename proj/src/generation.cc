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

#include "fedleak/generation.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "fedleak/error.h"

namespace fedleak {
namespace {

struct Winner {
  const NGramModel::ContextStats* stats = nullptr;
  int context_length = 0;
  int levels = 0;
};

Winner FindContext(const NGramModel& model, std::span<const Token> history) {
  if (model.vocab().empty()) throw GenerationError("model has an empty vocabulary");
  const std::size_t longest =
      std::min<std::size_t>(history.size(), model.order() - 1);
  for (std::size_t len = longest + 1; len-- > 0;) {
    const auto* stats = model.Find(history.subspan(history.size() - len, len));
    if (stats != nullptr && stats->total > 0) {
      return {stats, static_cast<int>(len), static_cast<int>(longest - len)};
    }
  }
  throw GenerationError("model has no unigram counts");
}

const Token& Argmax(const NGramModel::ContextStats& stats) {
  const Token* best = nullptr;
  double best_count = -1;
  for (const auto& [tok, c] : stats.next) {
    if (c > best_count) {  // strict: the first (smallest) token wins ties
      best = &tok;
      best_count = c;
    }
  }
  return *best;
}

double Uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

void GenerationRequest::Validate() const {
  if (max_new_tokens < 1) throw ConfigError("max_new_tokens must be >= 1");
  if (num_samples < 1) throw ConfigError("num_samples must be >= 1");
  if (!(temperature >= 0)) throw ConfigError("temperature must be >= 0");
}

std::uint64_t DeriveSeed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

NextTokenDistribution NextDistribution(const NGramModel& model,
                                       std::span<const Token> history,
                                       double temperature) {
  if (!(temperature >= 0)) throw ConfigError("temperature must be >= 0");
  const Winner w = FindContext(model, history);
  NextTokenDistribution out;
  out.context_length = w.context_length;
  out.backoff_score = std::pow(model.backoff_factor(), w.levels);
  if (temperature == 0) {
    const Token& best = Argmax(*w.stats);
    for (const auto& [tok, c] : w.stats->next) {
      if (c > 0) out.probs.emplace_back(tok, &tok == &best ? 1.0 : 0.0);
    }
    return out;
  }
  // log-space keeps count^(1/T) finite for small temperatures.
  double max_log = -INFINITY;
  for (const auto& [tok, c] : w.stats->next) {
    if (c > 0) max_log = std::max(max_log, std::log(c) / temperature);
  }
  double sum = 0;
  for (const auto& [tok, c] : w.stats->next) {
    if (c <= 0) continue;
    const double v = std::exp(std::log(c) / temperature - max_log);
    out.probs.emplace_back(tok, v);
    sum += v;
  }
  for (auto& [tok, p] : out.probs) p /= sum;
  return out;
}

Token GreedyNext(const NGramModel& model, std::span<const Token> history) {
  return Argmax(*FindContext(model, history).stats);
}

std::vector<TokenSeq> Generate(const NGramModel& model,
                               const GenerationRequest& req) {
  req.Validate();
  if (model.vocab().empty()) throw GenerationError("model has an empty vocabulary");
  TokenSeq history = req.prefix;
  history.reserve(req.prefix.size() + req.max_new_tokens);
  const std::size_t start = history.size();

  if (req.greedy()) {
    for (int step = 0; step < req.max_new_tokens; ++step) {
      Token next = GreedyNext(model, history);
      if (next == kBoundaryToken) break;
      history.push_back(std::move(next));
    }
    TokenSeq out(history.begin() + static_cast<long>(start), history.end());
    return std::vector<TokenSeq>(req.num_samples, out);
  }

  std::vector<TokenSeq> samples;
  samples.reserve(req.num_samples);
  for (int s = 0; s < req.num_samples; ++s) {
    std::mt19937_64 rng(DeriveSeed(req.seed, static_cast<std::uint64_t>(s)));
    history.resize(start);
    for (int step = 0; step < req.max_new_tokens; ++step) {
      const NextTokenDistribution dist =
          NextDistribution(model, history, req.temperature);
      double u = Uniform01(rng);
      const Token* pick = &dist.probs.back().first;
      for (const auto& [tok, p] : dist.probs) {
        u -= p;
        if (u < 0) {
          pick = &tok;
          break;
        }
      }
      if (*pick == kBoundaryToken) break;
      history.push_back(*pick);
    }
    samples.emplace_back(history.begin() + static_cast<long>(start), history.end());
  }
  return samples;
}

}  // namespace fedleak
