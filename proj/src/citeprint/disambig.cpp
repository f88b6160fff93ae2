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

#include "citeprint/disambig.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>

#include "citeprint/error.hpp"

namespace citeprint::disambig {

double Distance(const Point &a, const Point &b, Metric metric) {
  if (a.size() != b.size()) throw DataError("embedding dimension mismatch");
  if (metric == Metric::kEuclidean) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
      double d = a[i] - b[i];
      s += d * d;
    }
    return std::sqrt(s);
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return (na == nb) ? 0.0 : 1.0;
  return 1.0 - dot / std::sqrt(na * nb);
}

DbscanResult Dbscan(const std::vector<Point> &points, const DbscanParams &params) {
  if (!(params.eps > 0.0)) throw UsageError("dbscan eps must be > 0");
  if (params.min_pts < 1) throw UsageError("dbscan min_pts must be >= 1");
  const size_t n = points.size();
  for (const auto &p : points) {
    for (double v : p) {
      if (!std::isfinite(v)) throw DataError("non-finite embedding entry");
    }
  }

  std::vector<std::vector<size_t>> neighbors(n);
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i; j < n; ++j) {
      double d = (i == j) ? 0.0 : Distance(points[i], points[j], params.metric);
      dist[i][j] = dist[j][i] = d;
    }
  }
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      if (dist[i][j] <= params.eps) neighbors[i].push_back(j);
    }
  }
  std::vector<bool> core(n);
  for (size_t i = 0; i < n; ++i) {
    core[i] = neighbors[i].size() >= static_cast<size_t>(params.min_pts);
  }

  std::vector<int> raw(n, -1);
  int next = 0;
  for (size_t i = 0; i < n; ++i) {
    if (!core[i] || raw[i] != -1) continue;
    std::deque<size_t> queue{i};
    raw[i] = next;
    while (!queue.empty()) {
      size_t p = queue.front();
      queue.pop_front();
      for (size_t q : neighbors[p]) {
        if (core[q] && raw[q] == -1) {
          raw[q] = next;
          queue.push_back(q);
        }
      }
    }
    ++next;
  }

  for (size_t i = 0; i < n; ++i) {
    if (core[i]) continue;
    size_t best = n;
    for (size_t q : neighbors[i]) {
      if (!core[q]) continue;
      if (best == n || dist[i][q] < dist[i][best] ||
          (dist[i][q] == dist[i][best] && points[q] < points[best])) {
        best = q;
      }
    }
    if (best != n) raw[i] = raw[best];
  }

  DbscanResult result;
  result.labels.assign(n, -1);
  std::map<int, int> canonical;
  for (size_t i = 0; i < n; ++i) {
    if (raw[i] < 0) {
      ++result.n_noise;
      continue;
    }
    auto [it, inserted] =
        canonical.emplace(raw[i], static_cast<int>(canonical.size()));
    result.labels[i] = it->second;
  }
  result.n_clusters = static_cast<int>(canonical.size());
  return result;
}

ClusterVerdict Verdict(const std::vector<Point> &abstracts,
                       const DbscanParams &params) {
  ClusterVerdict v;
  if (abstracts.size() < static_cast<size_t>(params.min_pts)) {
    v.n_noise = static_cast<int>(abstracts.size());
    return v;
  }
  DbscanResult r = Dbscan(abstracts, params);
  v.n_clusters = r.n_clusters;
  v.n_noise = r.n_noise;
  v.unique_person = r.n_clusters <= 1;
  return v;
}

TuningResult Tune(const std::vector<CalibrationAuthor> &set,
                  const std::vector<double> &eps_grid,
                  const std::vector<int> &min_pts_grid, Metric metric) {
  if (set.empty() || eps_grid.empty() || min_pts_grid.empty()) {
    throw UsageError("tuning needs a calibration set and non-empty grids");
  }
  std::map<int, std::map<double, int>> score;
  int best = -1;
  for (int m : min_pts_grid) {
    for (double eps : eps_grid) {
      DbscanParams p{eps, m, metric};
      int correct = 0;
      for (const auto &a : set) {
        if (Verdict(a.abstracts, p).unique_person != a.ambiguous) ++correct;
      }
      score[m][eps] = correct;
      best = std::max(best, correct);
    }
  }
  TuningResult result;
  result.total = static_cast<int>(set.size());
  result.correct = best;
  size_t widest = 0;
  for (const auto &[m, by_eps] : score) {
    std::vector<double> plateau;
    for (const auto &[eps, c] : by_eps) {
      if (c == best) plateau.push_back(eps);
    }
    if (plateau.size() > widest) {
      widest = plateau.size();
      result.params = {plateau[(plateau.size() - 1) / 2], m, metric};
    }
  }
  return result;
}

}  // namespace citeprint::disambig
