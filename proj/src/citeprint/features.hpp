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

// Reference Histogram Embedding inputs and the self-citation ablation.

#ifndef CITEPRINT_FEATURES_HPP_
#define CITEPRINT_FEATURES_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "citeprint/ingest.hpp"

namespace citeprint::features {

inline constexpr int kDefaultVocabMinCount = 50;
inline constexpr int kRheOutputSize = 128;

struct CitationVocab {
  std::vector<std::string> surnames;  // descending count, ties lexicographic
  std::vector<int64_t> counts;
  std::map<std::string, int> index;
  int min_count = kDefaultVocabMinCount;

  int size() const { return static_cast<int>(surnames.size()); }
};

struct ReferenceHistogram {
  std::vector<int> counts;
};

// Keeps surnames occurring strictly more than `min_count` times.
CitationVocab BuildVocab(const std::vector<const ParsedPaper *> &papers,
                         int min_count = kDefaultVocabMinCount);

// Vocabulary over the bundle's train split. Throws if a train id is also a
// test id or has no parsed paper.
CitationVocab BuildTrainVocab(const DatasetBundle &bundle,
                              int min_count = kDefaultVocabMinCount);

ReferenceHistogram Histogram(const ParsedPaper &paper, const CitationVocab &vocab);

// Drops every reference listing the author's surname.
ParsedPaper StripSelfCitations(const ParsedPaper &paper, const AuthorLabel &author);

// floor((n_hist + 128) / 2).
int RheHiddenSize(int n_hist);

// Header "# min_count=<n>", then "<surname>\t<count>" per line.
std::string SerializeVocab(const CitationVocab &vocab);
CitationVocab ParseVocab(const std::string &text);

}  // namespace citeprint::features

#endif  // CITEPRINT_FEATURES_HPP_
