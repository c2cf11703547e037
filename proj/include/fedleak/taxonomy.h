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

#ifndef FEDLEAK_TAXONOMY_H_
#define FEDLEAK_TAXONOMY_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace fedleak {

// PII labeling standard: 7 major categories, 36 minor categories.
struct MajorCategory {
  std::string_view key;        // canonical short name, e.g. "Basic"
  std::string_view full_name;  // e.g. "Personal Basic Information"
  std::span<const std::string_view> minors;
};

std::span<const MajorCategory> PiiTaxonomy();

// Accepts either the short key or the full name; returns the short key.
std::optional<std::string> CanonicalMajor(std::string_view major);

// True when `minor` is a subcategory of `major` (either spelling of major).
bool IsValidLabel(std::string_view major, std::string_view minor);

}  // namespace fedleak

#endif  // FEDLEAK_TAXONOMY_H_
