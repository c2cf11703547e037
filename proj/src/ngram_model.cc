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

#include "fedleak/ngram_model.h"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>

#include "fedleak/error.h"
#include "json.hpp"

namespace fedleak {
namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

std::vector<const NGramModel::Table::value_type*> SortedEntries(
    const NGramModel::Table& table) {
  std::vector<const NGramModel::Table::value_type*> out;
  out.reserve(table.size());
  for (const auto& e : table) out.push_back(&e);
  std::sort(out.begin(), out.end(),
            [](const auto* a, const auto* b) { return a->first < b->first; });
  return out;
}

TokenSeq SplitKey(const std::string& key) {
  TokenSeq out;
  if (key.empty()) return out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = key.find('\x1f', pos);
    out.push_back(key.substr(pos, next - pos));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

}  // namespace

std::string ContextKey(std::span<const Token> context) {
  std::string key;
  for (std::size_t i = 0; i < context.size(); ++i) {
    if (i > 0) key += '\x1f';
    key += context[i];
  }
  return key;
}

NGramModel::NGramModel(int order, double backoff_factor)
    : order_(order), backoff_factor_(backoff_factor) {
  if (order < 1) throw ConfigError("n-gram order must be >= 1");
  if (!(backoff_factor > 0) || backoff_factor > 1) {
    throw ConfigError("backoff_factor must be in (0, 1]");
  }
  tables_.resize(order);
}

const NGramModel::ContextStats* NGramModel::Find(
    std::span<const Token> context) const {
  if (context.size() >= static_cast<std::size_t>(order_)) return nullptr;
  const Table& t = tables_[context.size()];
  auto it = t.find(ContextKey(context));
  return it == t.end() ? nullptr : &it->second;
}

double NGramModel::Count(std::span<const Token> context,
                         const Token& next) const {
  const ContextStats* s = Find(context);
  if (s == nullptr) return 0;
  auto it = s->next.find(next);
  return it == s->next.end() ? 0 : it->second;
}

void NGramModel::Add(std::span<const Token> context, const Token& next,
                     double weight) {
  if (context.size() >= static_cast<std::size_t>(order_)) {
    throw ConfigError("context longer than order - 1");
  }
  ContextStats& s = tables_[context.size()][ContextKey(context)];
  s.next[next] += weight;
  s.total += weight;
  for (const auto& t : context) vocab_.insert(t);
  vocab_.insert(next);
}

void NGramModel::RecomputeTotals() {
  for (auto& table : tables_) {
    for (auto& [key, stats] : table) {
      double sum = 0;
      for (const auto& [tok, c] : stats.next) sum += c;
      stats.total = sum;
    }
  }
}

NGramModel NGramModel::Scaled(double factor) const {
  NGramModel out = *this;
  for (auto& table : out.tables_) {
    for (auto& [key, stats] : table) {
      for (auto& [tok, c] : stats.next) c *= factor;
    }
  }
  out.RecomputeTotals();
  return out;
}

std::size_t NGramModel::NumEntries() const {
  std::size_t n = 0;
  for (const auto& table : tables_) {
    for (const auto& [key, stats] : table) n += stats.next.size();
  }
  return n;
}

std::string NGramModel::Serialize() const {
  json j;
  j["format_version"] = kFormatVersion;
  j["order"] = order_;
  j["backoff_factor"] = backoff_factor_;
  j["vocab"] = vocab_;
  json tables = json::array();
  for (const auto& table : tables_) {
    json entries = json::array();
    for (const auto* e : SortedEntries(table)) {
      json next = json::array();
      for (const auto& [tok, c] : e->second.next) next.push_back({tok, c});
      entries.push_back({{"context", SplitKey(e->first)}, {"next", std::move(next)}});
    }
    tables.push_back(std::move(entries));
  }
  j["tables"] = std::move(tables);
  return j.dump();
}

NGramModel NGramModel::Deserialize(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (j.at("format_version").get<int>() != kFormatVersion) {
      throw StorageError("unsupported model format_version");
    }
    NGramModel model(j.at("order").get<int>(), j.at("backoff_factor").get<double>());
    const json& tables = j.at("tables");
    if (tables.size() != static_cast<std::size_t>(model.order_)) {
      throw StorageError("model has wrong number of tables");
    }
    for (std::size_t len = 0; len < tables.size(); ++len) {
      for (const json& e : tables[len]) {
        const auto context = e.at("context").get<TokenSeq>();
        if (context.size() != len) throw StorageError("context length mismatch");
        for (const json& n : e.at("next")) {
          model.Add(context, n.at(0).get<Token>(), n.at(1).get<double>());
        }
      }
    }
    model.RecomputeTotals();
    for (const auto& t : j.at("vocab").get<std::vector<Token>>()) model.vocab_.insert(t);
    return model;
  } catch (const json::exception& e) {
    throw StorageError(std::string("corrupt model: ") + e.what());
  } catch (const ConfigError& e) {
    throw StorageError(std::string("corrupt model: ") + e.what());
  }
}

void NGramModel::Save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StorageError("cannot write model " + path.string());
  out << Serialize();
  if (!out) throw StorageError("write failed for " + path.string());
}

NGramModel NGramModel::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StorageError("cannot read model " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return Deserialize(buf.str());
}

NGramModel TrainOnSequences(std::span<const TokenSeq> documents, int order,
                            double backoff_factor) {
  if (documents.empty()) throw TrainingError("cannot train on an empty corpus");
  NGramModel model(order, backoff_factor);
  for (const TokenSeq& doc : documents) {
    const std::span<const Token> toks(doc);
    for (std::size_t i = 0; i <= doc.size(); ++i) {
      const Token& next = i < doc.size() ? doc[i] : kBoundaryToken;
      const std::size_t max_len = std::min<std::size_t>(i, order - 1);
      for (std::size_t len = 0; len <= max_len; ++len) {
        model.Add(toks.subspan(i - len, len), next, 1.0);
      }
    }
  }
  model.RecomputeTotals();
  return model;
}

NGramModel Train(const AnnotatedCorpus& corpus, int order,
                 double backoff_factor) {
  if (corpus.documents.empty()) {
    throw TrainingError("cannot train on an empty corpus");
  }
  return TrainOnSequences(DocumentTokenLists(corpus), order, backoff_factor);
}

NGramModel FedAvg(std::span<const NGramModel> models,
                  std::span<const double> weights) {
  if (models.empty()) throw AggregationError("no models to aggregate");
  if (models.size() != weights.size()) {
    throw AggregationError("got " + std::to_string(models.size()) +
                           " models but " + std::to_string(weights.size()) +
                           " weights");
  }
  double sum = 0;
  for (double w : weights) {
    if (!(w >= 0)) throw AggregationError("aggregation weights must be >= 0");
    sum += w;
  }
  if (!(sum > 0)) throw AggregationError("aggregation weights sum to zero");
  const int order = models.front().order();
  for (const auto& m : models) {
    if (m.order() != order) {
      throw AggregationError("cannot aggregate models of order " +
                             std::to_string(order) + " and " +
                             std::to_string(m.order()));
    }
  }

  NGramModel result(order, models.front().backoff_factor());
  // Context lengths are independent tables.
#pragma omp parallel for schedule(dynamic)
  for (int len = 0; len < order; ++len) {
    NGramModel::Table& out = result.tables_[len];
    for (std::size_t m = 0; m < models.size(); ++m) {
      const double w = weights[m] / sum;
      if (w == 0) continue;
      for (const auto& [key, stats] : models[m].table(len)) {
        auto& dst = out[key].next;
        for (const auto& [tok, c] : stats.next) dst[tok] += w * c;
      }
    }
  }
  for (const auto& m : models) {
    result.vocab_.insert(m.vocab().begin(), m.vocab().end());
  }
  result.RecomputeTotals();
  return result;
}

NGramModel FinetunePairs(const NGramModel& model,
                         std::span<const PrefixTargetPair> pairs,
                         double weight) {
  if (!(weight >= 0)) throw ConfigError("fine-tune weight must be >= 0");
  NGramModel out = model;
  if (weight == 0) return out;
  const std::size_t k = static_cast<std::size_t>(model.order());
  for (const auto& [prefix, target] : pairs) {
    TokenSeq seq = prefix;
    seq.insert(seq.end(), target.begin(), target.end());
    const std::span<const Token> toks(seq);
    for (std::size_t i = prefix.size(); i < seq.size(); ++i) {
      const std::size_t max_len = std::min(i, k - 1);
      for (std::size_t len = 0; len <= max_len; ++len) {
        out.Add(toks.subspan(i - len, len), seq[i], weight);
      }
    }
  }
  out.RecomputeTotals();
  return out;
}

}  // namespace fedleak
