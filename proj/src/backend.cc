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

#include "fedleak/backend.h"

namespace fedleak {

std::vector<TokenSeq> NGramBackend::Generate(const GenerationRequest& req) const {
  return fedleak::Generate(model_, req);
}

std::unique_ptr<GenerationBackend> NGramBackend::FinetunePairs(
    std::span<const PrefixTargetPair> pairs, double weight) const {
  return std::make_unique<NGramBackend>(fedleak::FinetunePairs(model_, pairs, weight));
}

}  // namespace fedleak
