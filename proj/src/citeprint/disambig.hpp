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

// Author-name disambiguation: DBSCAN over abstract embeddings.

#ifndef CITEPRINT_DISAMBIG_HPP_
#define CITEPRINT_DISAMBIG_HPP_

#include <string>
#include <vector>

namespace citeprint::disambig {

using Point = std::vector<double>;

enum class Metric { kEuclidean, kCosine };

struct DbscanParams {
  double eps = 0.9;
  int min_pts = 3;
  Metric metric = Metric::kEuclidean;
};

struct DbscanResult {
  std::vector<int> labels;  // -1 = noise; clusters numbered by first occurrence
  int n_clusters = 0;
  int n_noise = 0;
};

struct ClusterVerdict {
  int n_clusters = 0;
  int n_noise = 0;
  bool unique_person = true;
};

double Distance(const Point &a, const Point &b, Metric metric);

// Neighborhoods include the point itself; a core point has at least min_pts
// points within eps (inclusive). A border point joins the cluster of its
// nearest core neighbor, ties resolved by the lexicographically smallest core
// coordinates, so the partition does not depend on input order.
DbscanResult Dbscan(const std::vector<Point> &points, const DbscanParams &params);

// Fewer than min_pts abstracts is not enough evidence to split a name.
ClusterVerdict Verdict(const std::vector<Point> &abstracts,
                       const DbscanParams &params);

struct CalibrationAuthor {
  std::vector<Point> abstracts;
  bool ambiguous = false;
};

struct TuningResult {
  DbscanParams params;
  int correct = 0;
  int total = 0;
};

// Grid search; among the best-scoring settings picks the min_pts with the
// widest eps plateau and the median eps on that plateau.
TuningResult Tune(const std::vector<CalibrationAuthor> &set,
                  const std::vector<double> &eps_grid,
                  const std::vector<int> &min_pts_grid, Metric metric);

}  // namespace citeprint::disambig

#endif  // CITEPRINT_DISAMBIG_HPP_
