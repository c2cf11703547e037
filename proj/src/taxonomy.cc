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

#include "fedleak/taxonomy.h"

#include <algorithm>
#include <array>
#include <string>
#include <string_view>

namespace fedleak {
namespace {

constexpr std::array<std::string_view, 9> kBasic = {
    "Name",      "Birthday",    "Address",
    "Gender",    "Ethnicity",   "Family Relationship",
    "Age",       "Nationality", "Personal Phone Number"};
constexpr std::array<std::string_view, 5> kIdentity = {
    "ID Number", "Social Security Number", "Driver's License Number",
    "Employee Number", "License Plate Number"};
constexpr std::array<std::string_view, 5> kHealth = {
    "Physical Condition", "Fertility Information", "Current Medical History",
    "Diagnosis and Treatment Status", "Other Medication Record"};
constexpr std::array<std::string_view, 5> kWorkEducation = {
    "Workplace", "Position", "Work Experience", "Education Experience",
    "Grades"};
constexpr std::array<std::string_view, 5> kProperty = {
    "Bank Account", "Amount of Funds", "Fund Flow Records", "Virtual Assets",
    "Other Financial Records"};
constexpr std::array<std::string_view, 3> kLocation = {
    "Precise Location", "Accommodation Information", "Travel Trajectory"};
constexpr std::array<std::string_view, 4> kOthers = {
    "Marital History", "Religious or Philosophical Beliefs",
    "Sexual Orientation or Sex Life", "Unpublished Criminal Records"};

const std::array<MajorCategory, 7> kTaxonomy = {{
    {"Basic", "Personal Basic Information", kBasic},
    {"Identity", "Personal Identity Information", kIdentity},
    {"Health", "Health Related Information", kHealth},
    {"WorkEducation", "Work and Education Information", kWorkEducation},
    {"Property", "Personal Property Information", kProperty},
    {"Location", "Personal Location Information", kLocation},
    {"Others", "Others", kOthers},
}};

const MajorCategory* FindMajor(std::string_view major) {
  for (const auto& m : kTaxonomy) {
    if (m.key == major || m.full_name == major) return &m;
  }
  return nullptr;
}

}  // namespace

std::span<const MajorCategory> PiiTaxonomy() { return kTaxonomy; }

std::optional<std::string> CanonicalMajor(std::string_view major) {
  const MajorCategory* m = FindMajor(major);
  if (m == nullptr) return std::nullopt;
  return std::string(m->key);
}

bool IsValidLabel(std::string_view major, std::string_view minor) {
  const MajorCategory* m = FindMajor(major);
  if (m == nullptr) return false;
  return std::find(m->minors.begin(), m->minors.end(), minor) !=
         m->minors.end();
}

}  // namespace fedleak
