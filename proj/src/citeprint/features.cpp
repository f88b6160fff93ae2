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

#include "citeprint/features.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "citeprint/error.hpp"
#include "citeprint/text.hpp"

namespace citeprint::features {
namespace {

constexpr char kVocabMagic[] = "# citeprint citation vocabulary v1";

CitationVocab FromCounts(const std::map<std::string, int64_t> &counts,
                         int min_count) {
  std::vector<std::pair<std::string, int64_t>> kept;
  for (const auto &[s, n] : counts) {
    if (n > min_count) kept.emplace_back(s, n);
  }
  std::sort(kept.begin(), kept.end(), [](const auto &a, const auto &b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  CitationVocab vocab;
  vocab.min_count = min_count;
  for (auto &[s, n] : kept) {
    vocab.index[s] = static_cast<int>(vocab.surnames.size());
    vocab.surnames.push_back(s);
    vocab.counts.push_back(n);
  }
  return vocab;
}

}  // namespace

CitationVocab BuildVocab(const std::vector<const ParsedPaper *> &papers,
                         int min_count) {
  std::map<std::string, int64_t> counts;
  for (const ParsedPaper *p : papers) {
    for (const auto &ref : p->references) {
      for (const auto &s : ref.surnames) ++counts[s];
    }
  }
  return FromCounts(counts, min_count);
}

CitationVocab BuildTrainVocab(const DatasetBundle &bundle, int min_count) {
  std::set<std::string> test_ids;
  for (const auto &s : bundle.test) test_ids.insert(s.paper_id);
  std::vector<const ParsedPaper *> papers;
  for (const auto &s : bundle.train) {
    if (test_ids.count(s.paper_id)) {
      throw DataError("vocabulary leakage: " + s.paper_id + " is a test paper");
    }
    auto it = bundle.papers.find(s.paper_id);
    if (it == bundle.papers.end()) throw DataError("missing parsed paper " + s.paper_id);
    papers.push_back(&it->second);
  }
  return BuildVocab(papers, min_count);
}

ReferenceHistogram Histogram(const ParsedPaper &paper, const CitationVocab &vocab) {
  ReferenceHistogram h;
  h.counts.assign(vocab.surnames.size(), 0);
  for (const auto &ref : paper.references) {
    for (const auto &s : ref.surnames) {
      auto it = vocab.index.find(s);
      if (it != vocab.index.end()) ++h.counts[it->second];
    }
  }
  return h;
}

ParsedPaper StripSelfCitations(const ParsedPaper &paper, const AuthorLabel &author) {
  ParsedPaper out;
  out.id = paper.id;
  out.chunks = paper.chunks;
  const std::string surname = author.Surname();
  for (const auto &ref : paper.references) {
    if (std::find(ref.surnames.begin(), ref.surnames.end(), surname) ==
        ref.surnames.end()) {
      out.references.push_back(ref);
    }
  }
  return out;
}

int RheHiddenSize(int n_hist) {
  if (n_hist < 0) throw UsageError("negative histogram size");
  return (n_hist + kRheOutputSize) / 2;
}

std::string SerializeVocab(const CitationVocab &vocab) {
  std::ostringstream out;
  out << kVocabMagic << "\n# min_count=" << vocab.min_count << "\n";
  for (size_t i = 0; i < vocab.surnames.size(); ++i) {
    out << vocab.surnames[i] << '\t' << vocab.counts[i] << '\n';
  }
  return out.str();
}

CitationVocab ParseVocab(const std::string &text) {
  auto lines = SplitLines(text);
  if (lines.size() < 2 || lines[0] != kVocabMagic ||
      !StartsWith(lines[1], "# min_count=")) {
    throw DataError("not a citeprint vocabulary file");
  }
  CitationVocab vocab;
  vocab.min_count = std::stoi(std::string(lines[1].substr(12)));
  for (size_t i = 2; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    size_t tab = lines[i].find('\t');
    if (tab == std::string_view::npos) throw DataError("malformed vocabulary line");
    std::string s(lines[i].substr(0, tab));
    vocab.index[s] = static_cast<int>(vocab.surnames.size());
    vocab.surnames.push_back(s);
    vocab.counts.push_back(std::stoll(std::string(lines[i].substr(tab + 1))));
  }
  return vocab;
}

}  // namespace citeprint::features
