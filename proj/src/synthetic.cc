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

#include "fedleak/synthetic.h"

#include <array>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "fedleak/error.h"

namespace fedleak {
namespace {

constexpr std::array<std::string_view, 12> kSurnames = {
    "王", "李", "张", "刘", "陈", "杨", "赵", "黄", "周", "吴", "徐", "孙"};
constexpr std::array<std::string_view, 16> kGivenChars = {
    "伟", "芳", "娜", "敏", "静", "丽", "强", "磊",
    "军", "洋", "勇", "艳", "杰", "娟", "涛", "霞"};
constexpr std::array<std::string_view, 8> kCities = {
    "杭州", "苏州", "南京", "成都", "武汉", "长沙", "西安", "郑州"};
constexpr std::array<std::string_view, 8> kStreets = {
    "文晖", "解放", "中山", "建设", "和平", "胜利", "光华", "滨江"};
constexpr std::array<std::string_view, 4> kTrades = {"科技", "贸易", "物流", "机械"};

constexpr std::array<std::string_view, 5> kTags = {"civil", "criminal", "labor",
                                                   "contract", "family"};
// Party roles per tag; their last characters differ so the text right
// before a field names the tag.
constexpr std::array<std::string_view, 5> kRoles = {"原告", "被告人", "申请方",
                                                    "上诉者", "委托代理"};
constexpr std::array<std::string_view, 5> kOtherRoles = {"第三方", "证人", "担保方",
                                                         "见证者", "监护代理"};
constexpr std::array<std::string_view, 6> kFillers = {
    "本院 认为 ， 双方 当事人 均应 遵守 诚实 信用 原则 。",
    "经 审理 ， 对 上述 事实 本院 予以 确认 。",
    "庭审 时 ， 各方 对 证据 的 真实性 均无 异议 。",
    "综上 所述 ， 依照 相关 规定 ， 判决 如下 。",
    "案件 受理费 由 败诉 一方 负担 。",
    "如 不服 本 判决 ， 可 在 法定 期间 内 提起 上诉 。",
};

struct Person {
  std::string name;
  std::string birthday;
  std::string phone;
  std::string id_number;
  std::string address;
  std::string workplace;
  std::string bank;
};

std::string Digits(std::mt19937_64& rng, int n) {
  std::uniform_int_distribution<int> d(0, 9);
  std::string s;
  for (int i = 0; i < n; ++i) s += static_cast<char>('0' + d(rng));
  return s;
}

template <typename Array>
std::string_view Pick(std::mt19937_64& rng, const Array& a) {
  std::uniform_int_distribution<std::size_t> d(0, a.size() - 1);
  return a[d(rng)];
}

std::string TwoDigits(int v) {
  return (v < 10 ? "0" : "") + std::to_string(v);
}

Person MakePerson(std::mt19937_64& rng, std::unordered_set<std::string>& phones) {
  Person p;
  p.name = std::string(Pick(rng, kSurnames)) + std::string(Pick(rng, kGivenChars));
  if (std::bernoulli_distribution(0.5)(rng)) p.name += Pick(rng, kGivenChars);
  std::uniform_int_distribution<int> year(1950, 2005), month(1, 12), day(1, 28);
  p.birthday = std::to_string(year(rng)) + TwoDigits(month(rng)) + TwoDigits(day(rng));
  do {
    p.phone = "1" + Digits(rng, 10);
  } while (!phones.insert(p.phone).second);
  p.id_number = Digits(rng, 6) + p.birthday + Digits(rng, 4);
  std::uniform_int_distribution<int> house(1, 300);
  p.address = std::string(Pick(rng, kCities)) + std::string(Pick(rng, kStreets)) +
              "路" + std::to_string(house(rng)) + "号";
  p.workplace = std::string(Pick(rng, kCities)) + std::string(Pick(rng, kTrades)) +
                "有限公司";
  p.bank = "62" + Digits(rng, 14);
  return p;
}

// Appends text to a document under construction, tracking codepoint offsets
// of the PII fields.
class DocBuilder {
 public:
  // Words are separated by single spaces, so spans align with tokens in
  // both tokenizer modes.
  void Text(std::string_view s) {
    if (!text_.empty()) {
      text_ += ' ';
      ++length_;
    }
    text_ += s;
    length_ += CodepointLength(s);
  }
  void Field(std::string_view value, std::string_view major, std::string_view minor) {
    Text(value);
    const std::size_t start = length_ - CodepointLength(value);
    fields_.push_back({start, length_, std::string(major), std::string(minor)});
  }

  void Finish(AnnotatedCorpus& corpus, std::string doc_id, std::string tag,
              TokenizerMode mode) {
    Document doc = MakeDocument(std::move(doc_id), text_, std::move(tag), mode);
    for (const auto& f : fields_) {
      corpus.spans.push_back(MakeSpan(doc, f.start, f.end, f.major, f.minor));
    }
    corpus.documents.push_back(std::move(doc));
  }

 private:
  struct Pending {
    std::size_t start;
    std::size_t end;
    std::string major;
    std::string minor;
  };
  std::string text_;
  std::size_t length_ = 0;
  std::vector<Pending> fields_;
};

void WritePrimary(DocBuilder& b, std::string_view role, const Person& p,
                  std::mt19937_64& rng) {
  b.Text(role);
  b.Field(p.name, "Basic", "Name");
  b.Text("电话");
  b.Field(p.phone, "Basic", "Personal Phone Number");
  b.Text("，");
  b.Text("身份证");
  b.Field(p.id_number, "Identity", "ID Number");
  b.Text("，");
  if (std::bernoulli_distribution(0.5)(rng)) {
    b.Field(p.birthday, "Basic", "Birthday");
    b.Text("出生");
    b.Text("，");
    b.Text("住");
  } else {
    b.Text("住");
  }
  b.Field(p.address, "Basic", "Address");
  b.Text("。");
}

void WriteSecondary(DocBuilder& b, std::string_view role, const Person& p,
                    std::mt19937_64& rng) {
  b.Text(role);
  b.Field(p.name, "Basic", "Name");
  if (std::bernoulli_distribution(0.5)(rng)) {
    b.Text("就职于");
    b.Field(p.workplace, "WorkEducation", "Workplace");
    b.Text("，");
  }
  b.Text("账户");
  b.Field(p.bank, "Property", "Bank Account");
  b.Text("。");
}

std::set<Token> CharsOf(std::initializer_list<std::string_view> parts) {
  std::set<Token> out;
  for (auto p : parts) {
    for (auto& cp : SplitCodepoints(p)) out.insert(cp);
  }
  return out;
}

}  // namespace

void SyntheticSpec::Validate() const {
  if (num_docs < 1) throw ConfigError("synthetic num_docs must be >= 1");
  if (num_tags < 1 || num_tags > static_cast<int>(kTags.size())) {
    throw ConfigError("synthetic num_tags must be in [1, " +
                      std::to_string(kTags.size()) + "]");
  }
  if (persons_per_tag < 1) throw ConfigError("synthetic persons_per_tag must be >= 1");
  if (!(zipf_exponent >= 0)) throw ConfigError("synthetic zipf_exponent must be >= 0");
}

std::set<Token> SyntheticTemplateAlphabet() {
  std::set<Token> out = CharsOf({"电话，身份证出生住。就职于账户 "});
  for (auto a : {kRoles, kOtherRoles}) {
    for (auto r : a) out.merge(CharsOf({r}));
  }
  for (auto f : kFillers) out.merge(CharsOf({f}));
  return out;
}

std::set<Token> SyntheticPiiAlphabet() {
  std::set<Token> out = CharsOf({"0123456789路号有限公司"});
  for (auto s : kSurnames) out.merge(CharsOf({s}));
  for (auto s : kGivenChars) out.merge(CharsOf({s}));
  for (auto s : kCities) out.merge(CharsOf({s}));
  for (auto s : kStreets) out.merge(CharsOf({s}));
  for (auto s : kTrades) out.merge(CharsOf({s}));
  return out;
}

AnnotatedCorpus GenerateSyntheticCorpus(const SyntheticSpec& spec) {
  spec.Validate();
  std::mt19937_64 rng(spec.seed);
  std::unordered_set<std::string> phones;
  std::vector<std::vector<Person>> pools(static_cast<std::size_t>(spec.num_tags));
  for (auto& pool : pools) {
    for (int i = 0; i < spec.persons_per_tag; ++i) {
      pool.push_back(MakePerson(rng, phones));
    }
  }
  std::vector<double> zipf;
  for (int r = 0; r < spec.persons_per_tag; ++r) {
    zipf.push_back(1.0 / std::pow(r + 1.0, spec.zipf_exponent));
  }
  std::discrete_distribution<int> popularity(zipf.begin(), zipf.end());
  std::uniform_int_distribution<int> tag_dist(0, spec.num_tags - 1);
  std::uniform_int_distribution<std::size_t> filler(0, kFillers.size() - 1);

  AnnotatedCorpus corpus;
  corpus.owner = "synthetic";
  corpus.tokenizer = spec.tokenizer;
  for (std::size_t d = 0; d < spec.num_docs; ++d) {
    const int tag = tag_dist(rng);
    const auto& pool = pools[static_cast<std::size_t>(tag)];
    const Person& first = pool[static_cast<std::size_t>(popularity(rng))];
    const Person& second = pool[static_cast<std::size_t>(popularity(rng))];
    DocBuilder b;
    b.Text(kFillers[filler(rng)]);
    WritePrimary(b, kRoles[static_cast<std::size_t>(tag)], first, rng);
    WriteSecondary(b, kOtherRoles[static_cast<std::size_t>(tag)], second, rng);
    b.Text(kFillers[filler(rng)]);
    b.Finish(corpus, "doc-" + std::to_string(d),
             std::string(kTags[static_cast<std::size_t>(tag)]), spec.tokenizer);
  }
  return corpus;
}

bool IsLeakTight(const AnnotatedCorpus& corpus) {
  std::vector<std::vector<char>> inside(corpus.documents.size());
  for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
    inside[d].assign(corpus.documents[d].tokens.size(), 0);
  }
  std::set<Token> pii;
  for (const auto& s : corpus.spans) {
    const auto d = corpus.FindDocument(s.doc_id);
    if (!d) return false;
    for (std::size_t t = s.start; t < s.end; ++t) {
      inside[*d][t] = 1;
      pii.insert(corpus.documents[*d].tokens[t]);
    }
  }
  for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
    const auto& tokens = corpus.documents[d].tokens;
    for (std::size_t t = 0; t < tokens.size(); ++t) {
      if (!inside[d][t] && pii.contains(tokens[t])) return false;
    }
  }
  return true;
}

}  // namespace fedleak
