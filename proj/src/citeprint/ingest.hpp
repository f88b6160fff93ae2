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

// Corpus records and labeled datasets.

#ifndef CITEPRINT_INGEST_HPP_
#define CITEPRINT_INGEST_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "citeprint/preprocess.hpp"
#include "citeprint/refparse.hpp"

namespace citeprint {

struct Manuscript {
  std::string id;
  std::string title;
  std::string abstract;
  std::vector<std::string> authors;
  std::string raw_text;
};

// Output of segmentation, chunking and reference parsing for one manuscript.
// `chunks` holds every chunk; the word-length filter is applied on use.
struct ParsedPaper {
  std::string id;
  std::vector<preprocess::ContentChunk> chunks;
  std::vector<refparse::CitedReference> references;
};

struct AuthorLabel {
  std::string canonical_name;
  int cluster_index = 0;
  int paper_count = 0;

  // Last whitespace-delimited token, lowercased.
  std::string Surname() const;
};

struct TrainSample {
  std::string paper_id;
  int label = 0;
  std::vector<int> authors;  // every candidate author of the paper
};

struct TestSample {
  std::string paper_id;
  std::vector<int> labels;
};

struct DatasetBundle {
  std::string name;
  std::vector<AuthorLabel> labels;
  std::vector<TrainSample> train;
  std::vector<TestSample> test;
  bool chunked = false;
  uint64_t seed = 0;
  double test_ratio = 0.2;
  std::map<std::string, ParsedPaper> papers;
  // Authors whose train/test balance could not be met exactly.
  std::vector<std::string> split_drift;
  std::vector<std::string> warnings;
};

namespace ingest {

// A paper and every candidate author on it (label indices, ascending).
struct LabeledPaper {
  std::string id;
  std::vector<int> labels;
};

struct Split {
  std::vector<TrainSample> train;  // sorted by paper id
  std::vector<TestSample> test;    // sorted by paper id
  std::vector<int> drift;          // label indices off their quota
  std::vector<int> train_only;     // authors with fewer than two papers
};

// True when the given-name part of `name` (all tokens but the last) is empty
// or made only of initials.
bool HasOnlyInitials(const std::string &name);

std::vector<Manuscript> FilterFullNames(const std::vector<Manuscript> &corpus);

// Authors on at least `min_papers` manuscripts, sorted by name.
std::vector<AuthorLabel> SelectAuthors(const std::vector<Manuscript> &corpus,
                                       int min_papers);

// Inclusive test-count bounds floor(r*n), ceil(r*n); {0,0} when n < 2.
std::pair<int, int> TestQuota(int n, double ratio);

Split SplitDataset(const std::vector<LabeledPaper> &papers, int n_labels,
                   double ratio, uint64_t seed);

DatasetBundle TrimDataset(const DatasetBundle &bundle, int max_papers_per_author,
                          uint64_t seed);

// "D<P>[T<xx>][-C]".
std::string DatasetName(int min_papers, std::optional<int> trim, bool chunked);
std::string TrimmedName(const std::string &name, int cap);

// Per-author totals over train author sets and test label sets.
std::vector<int> PaperCounts(const DatasetBundle &bundle);

// Human-readable violations of the three bundle invariants; empty when all
// hold.
std::vector<std::string> CheckInvariants(const DatasetBundle &bundle);

}  // namespace ingest
}  // namespace citeprint

#endif  // CITEPRINT_INGEST_HPP_
