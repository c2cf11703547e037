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

#ifndef FEDLEAK_REMOTE_BACKEND_H_
#define FEDLEAK_REMOTE_BACKEND_H_

#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

#include "fedleak/backend.h"
#include "fedleak/tokenizer.h"

namespace fedleak {

struct RemoteBackendConfig {
  std::string endpoint_url;  // http://host[:port][/base]
  std::optional<std::string> auth_token;
  double timeout_seconds = 30;
  int max_retries = 3;
  int max_concurrency = 4;

  void Validate() const;
};

// POST {endpoint_url}/generate
//   {"prefix", "max_new_tokens", "num_samples", "temperature", "seed"}
// -> 200 {"completions": [string x num_samples]}
// Transport failures and 5xx answers are retried up to max_retries times;
// 4xx answers are not. Returns the completions verbatim.
std::vector<std::string> RemoteGenerateText(const RemoteBackendConfig& cfg,
                                            const std::string& prefix,
                                            const GenerationRequest& req);

std::vector<TokenSeq> RemoteGenerate(const RemoteBackendConfig& cfg,
                                     const GenerationRequest& req,
                                     TokenizerMode mode);

// Caps in-flight requests at cfg.max_concurrency regardless of how many
// threads call Generate.
class RemoteBackend final : public GenerationBackend {
 public:
  RemoteBackend(RemoteBackendConfig cfg, TokenizerMode mode);

  std::vector<TokenSeq> Generate(const GenerationRequest& req) const override;
  int max_concurrency() const override { return cfg_.max_concurrency; }
  std::string name() const override { return "remote:" + cfg_.endpoint_url; }
  std::unique_ptr<GenerationBackend> FinetunePairs(
      std::span<const PrefixTargetPair> pairs, double weight) const override;

 private:
  RemoteBackendConfig cfg_;
  TokenizerMode mode_;
  std::unique_ptr<std::counting_semaphore<>> slots_;
};

}  // namespace fedleak

#endif  // FEDLEAK_REMOTE_BACKEND_H_
