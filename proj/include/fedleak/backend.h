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

#ifndef FEDLEAK_BACKEND_H_
#define FEDLEAK_BACKEND_H_

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fedleak/generation.h"
#include "fedleak/ngram_model.h"

namespace fedleak {

// A sampleable language model the attack can query.
class GenerationBackend {
 public:
  virtual ~GenerationBackend() = default;

  // Must be safe to call concurrently.
  virtual std::vector<TokenSeq> Generate(const GenerationRequest& req) const = 0;

  // Upper bound on concurrent Generate calls; 0 leaves it to the caller.
  virtual int max_concurrency() const { return 0; }

  virtual std::string name() const = 0;

  // Returns a fine-tuned copy; backends that cannot train throw
  // UnsupportedError.
  virtual std::unique_ptr<GenerationBackend> FinetunePairs(
      std::span<const PrefixTargetPair> pairs, double weight) const = 0;
};

class NGramBackend final : public GenerationBackend {
 public:
  explicit NGramBackend(NGramModel model) : model_(std::move(model)) {}

  std::vector<TokenSeq> Generate(const GenerationRequest& req) const override;
  std::string name() const override { return "builtin-ngram"; }
  std::unique_ptr<GenerationBackend> FinetunePairs(
      std::span<const PrefixTargetPair> pairs, double weight) const override;

  const NGramModel& model() const { return model_; }

 private:
  NGramModel model_;
};

}  // namespace fedleak

#endif  // FEDLEAK_BACKEND_H_
