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

#include "citeprint/evaluate.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "citeprint/error.hpp"
#include "citeprint/model.hpp"

namespace citeprint::evaluate {
namespace {

std::set<int> TopN(const PaperPrediction &pred, size_t n) {
  n = std::min(n, pred.ranked.size());
  return std::set<int>(pred.ranked.begin(), pred.ranked.begin() + static_cast<long>(n));
}

void Accumulate(MetricRow &row, bool m1, bool m2, bool m3, bool m4) {
  ++row.papers;
  row.m1 += m1;
  row.m2 += m2;
  row.m3 += m3;
  row.m4 += m4;
}

void Normalize(MetricRow &row) {
  if (row.papers == 0) return;
  double n = row.papers;
  row.m1 /= n;
  row.m2 /= n;
  row.m3 /= n;
  row.m4 /= n;
}

}  // namespace

PaperPrediction FromChunkLogits(const std::string &paper_id,
                                const std::vector<Eigen::VectorXd> &chunk_logits) {
  if (chunk_logits.empty()) throw DataError("paper " + paper_id + " has no chunks");
  PaperPrediction p;
  p.paper_id = paper_id;
  p.logits = Eigen::VectorXd::Zero(chunk_logits.front().size());
  for (const auto &l : chunk_logits) p.logits += l;
  p.logits /= static_cast<double>(chunk_logits.size());
  Eigen::VectorXd prob = model::Softmax(p.logits);
  p.probabilities.assign(prob.data(), prob.data() + prob.size());
  p.ranked.resize(prob.size());
  std::iota(p.ranked.begin(), p.ranked.end(), 0);
  std::stable_sort(p.ranked.begin(), p.ranked.end(), [&](int a, int b) {
    return p.logits[a] > p.logits[b];
  });
  return p;
}

bool Metric1(const PaperPrediction &pred, const std::vector<int> &gold) {
  if (pred.ranked.empty()) return false;
  return std::find(gold.begin(), gold.end(), pred.ranked[0]) != gold.end();
}

bool Metric2(const PaperPrediction &pred, const std::vector<int> &gold) {
  std::set<int> g(gold.begin(), gold.end());
  return TopN(pred, g.size()) == g;
}

int EstimateAuthorCount(const PaperPrediction &pred, double ratio) {
  if (pred.probabilities.empty()) return 0;
  double mx = *std::max_element(pred.probabilities.begin(), pred.probabilities.end());
  int n = 0;
  for (double p : pred.probabilities) {
    if (p >= ratio * mx) ++n;
  }
  return std::max(n, 1);
}

bool Metric3(const PaperPrediction &pred, const std::vector<int> &gold, double ratio) {
  std::set<int> g(gold.begin(), gold.end());
  return TopN(pred, static_cast<size_t>(EstimateAuthorCount(pred, ratio))) == g;
}

bool Metric4(const PaperPrediction &pred, const std::vector<int> &gold, int k) {
  if (k < 1) throw UsageError("top-k must be >= 1");
  std::set<int> top = TopN(pred, static_cast<size_t>(k));
  return std::all_of(gold.begin(), gold.end(), [&](int a) { return top.count(a) > 0; });
}

MetricReport Report(const std::vector<PaperPrediction> &predictions,
                    const std::vector<std::vector<int>> &gold,
                    const std::vector<std::string> &label_names,
                    const std::vector<int> &train_counts, double ratio, int top_k) {
  if (predictions.size() != gold.size()) {
    throw UsageError("predictions and gold sets differ in length");
  }
  std::vector<size_t> order(predictions.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return predictions[a].paper_id < predictions[b].paper_id;
  });

  MetricReport r;
  r.ratio = ratio;
  r.top_k = top_k;
  const size_t n_labels = label_names.size();
  std::vector<int> hits(n_labels, 0), seen(n_labels, 0);
  for (size_t i : order) {
    const auto &pred = predictions[i];
    const auto &g = gold[i];
    if (g.empty()) throw DataError("test paper " + pred.paper_id + " has no gold label");
    bool m1 = Metric1(pred, g), m2 = Metric2(pred, g), m3 = Metric3(pred, g, ratio),
         m4 = Metric4(pred, g, top_k);
    Accumulate(std::set<int>(g.begin(), g.end()).size() == 1 ? r.single : r.multi, m1, m2,
               m3, m4);
    Accumulate(r.overall, m1, m2, m3, m4);
    for (int a : g) {
      ++seen[a];
      hits[a] += m1;
    }
  }
  Normalize(r.single);
  Normalize(r.multi);
  Normalize(r.overall);
  for (size_t a = 0; a < n_labels; ++a) {
    AuthorRow row;
    row.name = label_names[a];
    row.train_papers = a < train_counts.size() ? train_counts[a] : 0;
    row.test_papers = seen[a];
    row.accuracy = seen[a] ? static_cast<double>(hits[a]) / seen[a] : 0.0;
    r.per_author.push_back(row);
  }
  return r;
}

std::vector<int> AccuracyHistogram(const MetricReport &report) {
  std::vector<int> bins(10, 0);
  for (const auto &row : report.per_author) {
    if (row.test_papers == 0) continue;
    int b = std::min(9, static_cast<int>(row.accuracy * 10.0));
    ++bins[b];
  }
  return bins;
}

}  // namespace citeprint::evaluate
