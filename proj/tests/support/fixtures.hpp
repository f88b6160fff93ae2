// Copyright 2026 The citeprint Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Readers for the hand-labeled fixture files under tests/fixtures.

#ifndef CITEPRINT_TESTS_SUPPORT_FIXTURES_HPP_
#define CITEPRINT_TESTS_SUPPORT_FIXTURES_HPP_

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "citeprint/text.hpp"

namespace citeprint::fixtures {

#ifndef CITEPRINT_FIXTURE_DIR
#error "CITEPRINT_FIXTURE_DIR must point at tests/fixtures"
#endif

inline std::string Dir(const std::string &sub) {
  return std::string(CITEPRINT_FIXTURE_DIR) + "/" + sub;
}

// One "=== name" section: raw lines up to "--- gold", then gold lines.
struct Section {
  std::string name;
  std::string body;
  std::vector<std::string> gold;
  bool has_gold = false;
};

inline std::vector<Section> ReadSections(const std::string &path) {
  std::vector<Section> out;
  const std::string text = ReadFile(path);
  bool in_gold = false;
  for (std::string_view line : SplitLines(text)) {
    if (StartsWith(line, "=== ")) {
      out.push_back({std::string(Trim(line.substr(4))), "", {}, false});
      in_gold = false;
      continue;
    }
    if (out.empty()) continue;  // file header comments
    if (line == "--- gold") {
      in_gold = true;
      out.back().has_gold = true;
      continue;
    }
    if (in_gold) {
      out.back().gold.emplace_back(line);
    } else {
      out.back().body += std::string(line) + "\n";
    }
  }
  return out;
}

// Gold line "a, b, c" -> {"a", "b", "c"}; "-" is an entry without surnames.
inline std::vector<std::string> SurnameList(const std::string &line) {
  std::vector<std::string> out;
  if (Trim(line) == "-") return out;
  size_t start = 0;
  while (start <= line.size()) {
    size_t comma = line.find(',', start);
    if (comma == std::string::npos) comma = line.size();
    std::string_view part = Trim(std::string_view(line).substr(start, comma - start));
    if (!part.empty()) out.emplace_back(part);
    start = comma + 1;
  }
  return out;
}

// Gold line "key: value" -> value; empty when the key is absent.
inline std::string GoldField(const Section &s, const std::string &key) {
  const std::string prefix = key + ":";
  for (const auto &g : s.gold) {
    if (StartsWith(g, prefix)) return std::string(Trim(std::string_view(g).substr(prefix.size())));
  }
  return "";
}

inline std::vector<std::string> FilesWithExtension(const std::string &dir,
                                                   const std::string &ext) {
  std::vector<std::string> out;
  for (const auto &e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() == ext) out.push_back(e.path().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace citeprint::fixtures

#endif  // CITEPRINT_TESTS_SUPPORT_FIXTURES_HPP_
