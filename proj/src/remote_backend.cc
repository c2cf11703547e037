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

#include "fedleak/remote_backend.h"

#include <chrono>
#include <thread>

#include "fedleak/error.h"
#include "httplib.h"
#include "json.hpp"

namespace fedleak {
namespace {

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string base_path;
};

ParsedUrl ParseUrl(const std::string& url) {
  const std::string scheme = "http://";
  if (url.rfind(scheme, 0) != 0) {
    throw ConfigError("endpoint_url must start with http:// (got '" + url + "')");
  }
  const std::size_t slash = url.find('/', scheme.size());
  ParsedUrl out;
  out.origin = url.substr(0, slash);
  out.base_path = slash == std::string::npos ? "" : url.substr(slash);
  while (!out.base_path.empty() && out.base_path.back() == '/') {
    out.base_path.pop_back();
  }
  return out;
}

}  // namespace

void RemoteBackendConfig::Validate() const {
  ParseUrl(endpoint_url);
  if (!(timeout_seconds > 0)) throw ConfigError("remote timeout must be > 0");
  if (max_retries < 0) throw ConfigError("remote max_retries must be >= 0");
  if (max_concurrency < 1) throw ConfigError("remote max_concurrency must be >= 1");
}

std::vector<std::string> RemoteGenerateText(const RemoteBackendConfig& cfg,
                                            const std::string& prefix,
                                            const GenerationRequest& req) {
  cfg.Validate();
  req.Validate();
  const ParsedUrl url = ParseUrl(cfg.endpoint_url);
  httplib::Client client(url.origin);
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::duration<double>(cfg.timeout_seconds));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers;
  if (cfg.auth_token) headers.emplace("Authorization", "Bearer " + *cfg.auth_token);

  const nlohmann::json body = {
      {"prefix", prefix},
      {"max_new_tokens", req.max_new_tokens},
      {"num_samples", req.num_samples},
      {"temperature", req.greedy() ? 0.0 : req.temperature},
      {"seed", req.seed},
  };
  const std::string payload = body.dump();
  const std::string path = url.base_path + "/generate";

  int last_status = 0;
  std::string last_error;
  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(20 << std::min(attempt, 6)));
    }
    auto res = client.Post(path, headers, payload, "application/json");
    if (!res) {
      last_status = 0;
      last_error = httplib::to_string(res.error());
      continue;
    }
    last_status = res->status;
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw BackendError("remote backend answered HTTP " + std::to_string(res->status),
                         res->status);
    }
    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception&) {
      throw ProtocolError("remote backend returned invalid JSON");
    }
    auto it = reply.find("completions");
    if (it == reply.end() || !it->is_array()) {
      throw ProtocolError("remote reply lacks a 'completions' array");
    }
    std::vector<std::string> out;
    for (const auto& c : *it) {
      if (!c.is_string()) throw ProtocolError("completion is not a string");
      out.push_back(c.get<std::string>());
    }
    if (out.size() != static_cast<std::size_t>(req.num_samples)) {
      throw ProtocolError("expected " + std::to_string(req.num_samples) +
                          " completions, got " + std::to_string(out.size()));
    }
    return out;
  }
  throw BackendError("remote backend failed after " +
                         std::to_string(cfg.max_retries + 1) +
                         " attempts: " + last_error,
                     last_status);
}

std::vector<TokenSeq> RemoteGenerate(const RemoteBackendConfig& cfg,
                                     const GenerationRequest& req,
                                     TokenizerMode mode) {
  std::vector<TokenSeq> out;
  for (const auto& text :
       RemoteGenerateText(cfg, Detokenize(req.prefix, mode), req)) {
    TokenSeq toks = Tokenize(text, mode).tokens;
    if (toks.size() > static_cast<std::size_t>(req.max_new_tokens)) {
      toks.resize(req.max_new_tokens);
    }
    out.push_back(std::move(toks));
  }
  return out;
}

RemoteBackend::RemoteBackend(RemoteBackendConfig cfg, TokenizerMode mode)
    : cfg_(std::move(cfg)), mode_(mode) {
  cfg_.Validate();
  slots_ = std::make_unique<std::counting_semaphore<>>(cfg_.max_concurrency);
}

std::vector<TokenSeq> RemoteBackend::Generate(const GenerationRequest& req) const {
  slots_->acquire();
  try {
    auto out = RemoteGenerate(cfg_, req, mode_);
    slots_->release();
    return out;
  } catch (...) {
    slots_->release();
    throw;
  }
}

std::unique_ptr<GenerationBackend> RemoteBackend::FinetunePairs(
    std::span<const PrefixTargetPair>, double) const {
  throw UnsupportedError("remote backend does not support local fine-tuning");
}

}  // namespace fedleak
