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

// Chunk-averaged inference and multi-author attribution metrics.

#ifndef CITEPRINT_EVALUATE_HPP_
#define CITEPRINT_EVALUATE_HPP_

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace citeprint::evaluate {

inline constexpr double kDefaultRatio = 0.1;
inline constexpr int kDefaultTopK = 5;

struct PaperPrediction {
  std::string paper_id;
  Eigen::VectorXd logits;  // mean over chunks
  std::vector<double> probabilities;
  std::vector<int> ranked;  // descending probability, ties by label index
};

// Averages the per-chunk logits, then applies softmax. Throws when empty.
PaperPrediction FromChunkLogits(const std::string &paper_id,
                                const std::vector<Eigen::VectorXd> &chunk_logits);

// Top-1 is an author: M_1 subset of G.
bool Metric1(const PaperPrediction &pred, const std::vector<int> &gold);
// Top-|G| equals G.
bool Metric2(const PaperPrediction &pred, const std::vector<int> &gold);
// Number of labels with probability at least ratio * max; always >= 1.
int EstimateAuthorCount(const PaperPrediction &pred, double ratio = kDefaultRatio);
// Top-n_hat equals G.
bool Metric3(const PaperPrediction &pred, const std::vector<int> &gold,
             double ratio = kDefaultRatio);
// G subset of top-k. k is capped at the label-space size.
bool Metric4(const PaperPrediction &pred, const std::vector<int> &gold,
             int k = kDefaultTopK);

struct MetricRow {
  int papers = 0;
  double m1 = 0, m2 = 0, m3 = 0, m4 = 0;  // fractions in [0, 1]
};

struct AuthorRow {
  std::string name;
  int train_papers = 0;
  int test_papers = 0;
  double accuracy = 0;  // metric 1 over test papers listing the author
};

struct MetricReport {
  MetricRow single;  // |G| = 1
  MetricRow multi;   // |G| >= 2
  MetricRow overall;
  std::vector<AuthorRow> per_author;
  std::vector<std::string> excluded;  // papers without usable chunks
  double ratio = kDefaultRatio;
  int top_k = kDefaultTopK;
};

// Order-independent: predictions are keyed by paper id.
MetricReport Report(const std::vector<PaperPrediction> &predictions,
                    const std::vector<std::vector<int>> &gold,
                    const std::vector<std::string> &label_names,
                    const std::vector<int> &train_counts,
                    double ratio = kDefaultRatio, int top_k = kDefaultTopK);

// Ten equal-width accuracy bins over per-author accuracy; bin i covers
// [i/10, (i+1)/10), the last bin includes 1.0.
std::vector<int> AccuracyHistogram(const MetricReport &report);

}  // namespace citeprint::evaluate

#endif  // CITEPRINT_EVALUATE_HPP_
