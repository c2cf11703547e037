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

#include "fedleak/query.h"

#include <algorithm>
#include <string>

#include "fedleak/error.h"
#include "fedleak/kernels.h"
#include "json.hpp"

namespace fedleak {
namespace {

using nlohmann::json;

std::vector<GenerationRequest> MakeRequests(std::span<const TokenSeq> prefixes,
                                            const AttackConfig& cfg) {
  std::vector<GenerationRequest> reqs;
  reqs.reserve(prefixes.size());
  for (std::size_t i = 0; i < prefixes.size(); ++i) {
    GenerationRequest r;
    r.prefix = prefixes[i];
    r.max_new_tokens = cfg.max_new_tokens;
    r.num_samples = cfg.samples_per_prefix;
    r.temperature = cfg.temperature;
    r.seed = DeriveSeed(cfg.seed, i);
    r.mode = cfg.temperature == 0 ? DecodeMode::kGreedy : DecodeMode::kSample;
    reqs.push_back(std::move(r));
  }
  return reqs;
}

QueryOutcome Assemble(std::span<const TokenSeq> prefixes,
                      const std::vector<std::optional<std::vector<TokenSeq>>>& outputs,
                      const std::vector<std::string>& errors,
                      const AttackConfig& cfg) {
  QueryOutcome out;
  std::int64_t queried = 0;
  for (std::size_t i = 0; i < prefixes.size(); ++i) {
    if (!outputs[i]) {
      out.failures.push_back({i, errors[i]});
      continue;
    }
    ++queried;
    for (std::size_t s = 0; s < outputs[i]->size(); ++s) {
      TokenSeq y = (*outputs[i])[s];
      if (y.size() > static_cast<std::size_t>(cfg.max_new_tokens)) {
        y.resize(cfg.max_new_tokens);
      }
      out.generations.records.push_back(
          {i, static_cast<int>(s), prefixes[i], std::move(y)});
    }
  }
  out.generations.total_queries = queried * cfg.samples_per_prefix;
  return out;
}

}  // namespace

QueryJournal::QueryJournal(std::filesystem::path path, TokenizerMode mode)
    : path_(std::move(path)), mode_(mode) {}

std::map<std::size_t, std::vector<TokenSeq>> QueryJournal::Load(
    std::span<const TokenSeq> prefixes) const {
  std::map<std::size_t, std::vector<TokenSeq>> done;
  std::ifstream in(path_);
  if (!in) return done;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception&) {
      break;  // torn final line from an interrupted run
    }
    const auto idx = rec.at("prefix_idx").get<std::size_t>();
    const auto prefix = rec.at("prefix").get<std::string>();
    if (idx >= prefixes.size() || Detokenize(prefixes[idx], mode_) != prefix) {
      throw StorageError("journal " + path_.string() +
                         " does not belong to this prefix list");
    }
    std::vector<TokenSeq> outputs;
    for (const auto& o : rec.at("outputs")) {
      outputs.push_back(Tokenize(o.get<std::string>(), mode_).tokens);
    }
    done[idx] = std::move(outputs);
  }
  return done;
}

void QueryJournal::Append(std::size_t prefix_idx, const TokenSeq& prefix,
                          const std::vector<TokenSeq>& outputs) {
  json rec;
  rec["prefix_idx"] = prefix_idx;
  rec["prefix"] = Detokenize(prefix, mode_);
  rec["outputs"] = json::array();
  for (const auto& o : outputs) rec["outputs"].push_back(Detokenize(o, mode_));
  const std::string line = rec.dump() + "\n";
  std::lock_guard<std::mutex> lock(mu_);
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  out << line;
  out.flush();
  if (!out) throw StorageError("cannot append to journal " + path_.string());
}

QueryOutcome ExecuteQueries(const GenerationBackend& backend,
                            std::span<const TokenSeq> prefixes,
                            const AttackConfig& cfg, QueryJournal* journal) {
  cfg.Validate();
  if (prefixes.empty()) throw ConfigError("no prefixes to query");
  std::vector<std::optional<std::vector<TokenSeq>>> outputs(prefixes.size());
  std::vector<std::string> errors(prefixes.size());

  std::vector<std::size_t> pending;
  if (journal != nullptr) {
    for (auto& [idx, outs] : journal->Load(prefixes)) outputs[idx] = std::move(outs);
  }
  for (std::size_t i = 0; i < prefixes.size(); ++i) {
    if (!outputs[i]) pending.push_back(i);
  }

  const std::vector<GenerationRequest> all = MakeRequests(prefixes, cfg);
  std::vector<GenerationRequest> reqs;
  reqs.reserve(pending.size());
  for (std::size_t i : pending) reqs.push_back(all[i]);

  kernels::QueryCallback on_done;
  if (journal != nullptr) {
    on_done = [&](std::size_t k, const kernels::QueryResult& r) {
      if (r.ok) journal->Append(pending[k], prefixes[pending[k]], r.outputs);
    };
  }
  std::vector<kernels::QueryResult> results =
      kernels::RunQueries(backend, reqs, backend.max_concurrency(), on_done);
  for (std::size_t k = 0; k < pending.size(); ++k) {
    if (results[k].ok) {
      outputs[pending[k]] = std::move(results[k].outputs);
    } else {
      errors[pending[k]] = std::move(results[k].error);
    }
  }
  return Assemble(prefixes, outputs, errors, cfg);
}

QueryOutcome ExecuteQueriesSerial(const GenerationBackend& backend,
                                  std::span<const TokenSeq> prefixes,
                                  const AttackConfig& cfg) {
  cfg.Validate();
  if (prefixes.empty()) throw ConfigError("no prefixes to query");
  const std::vector<GenerationRequest> reqs = MakeRequests(prefixes, cfg);
  std::vector<kernels::QueryResult> results =
      kernels::serial::RunQueries(backend, reqs, nullptr);
  std::vector<std::optional<std::vector<TokenSeq>>> outputs(prefixes.size());
  std::vector<std::string> errors(prefixes.size());
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i].ok) {
      outputs[i] = std::move(results[i].outputs);
    } else {
      errors[i] = std::move(results[i].error);
    }
  }
  return Assemble(prefixes, outputs, errors, cfg);
}

void WriteGenerationSet(const GenerationSet& set, TokenizerMode mode,
                        const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StorageError("cannot write " + path.string());
  for (const auto& r : set.records) {
    json rec;
    rec["prefix_idx"] = r.prefix_idx;
    rec["sample_idx"] = r.sample_idx;
    rec["prefix"] = Detokenize(r.prefix, mode);
    rec["output"] = Detokenize(r.output, mode);
    out << rec.dump() << '\n';
  }
  if (!out) throw StorageError("write failed for " + path.string());
}

GenerationSet ReadGenerationSet(const std::filesystem::path& path,
                                TokenizerMode mode) {
  std::ifstream in(path);
  if (!in) throw StorageError("cannot read " + path.string());
  GenerationSet set;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json rec = json::parse(line);
      set.records.push_back({rec.at("prefix_idx").get<std::size_t>(),
                             rec.at("sample_idx").get<int>(),
                             Tokenize(rec.at("prefix").get<std::string>(), mode).tokens,
                             Tokenize(rec.at("output").get<std::string>(), mode).tokens});
    } catch (const json::exception& e) {
      throw ParseError(std::string("bad generation record: ") + e.what(), line_no);
    }
  }
  set.total_queries = static_cast<std::int64_t>(set.records.size());
  return set;
}

}  // namespace fedleak
