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

// Brute-force reference implementations shared by the unit tests and the
// acceptance runner. They use plain loops over std::vector and never call
// into the library code they check.

#ifndef CITEPRINT_TESTS_SUPPORT_ORACLES_HPP_
#define CITEPRINT_TESTS_SUPPORT_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "citeprint/disambig.hpp"
#include "citeprint/evaluate.hpp"
#include "citeprint/ingest.hpp"
#include "citeprint/model.hpp"

namespace citeprint::oracles {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;  // row-major

inline Mat ToMat(const Eigen::MatrixXd &m) {
  Mat out(m.rows(), Vec(m.cols()));
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) out[r][c] = m(r, c);
  }
  return out;
}

inline Vec ToVec(const Eigen::VectorXd &v) { return Vec(v.data(), v.data() + v.size()); }

inline Vec Affine(const Mat &w, const Mat &b, const Vec &x) {
  Vec y(w.size(), 0.0);
  for (size_t r = 0; r < w.size(); ++r) {
    double s = 0.0;
    for (size_t c = 0; c < x.size(); ++c) s += w[r][c] * x[c];
    y[r] = s + b[r][0];
  }
  return y;
}

inline Vec Relu(Vec v) {
  for (double &x : v) x = x > 0.0 ? x : 0.0;
  return v;
}

inline Vec RheForward(const model::FusionModel &m, const Vec &hist) {
  const auto &p = m.params;
  Vec a1 = Relu(Affine(ToMat(p[model::kRheW1]), ToMat(p[model::kRheB1]), hist));
  return Affine(ToMat(p[model::kRheW2]), ToMat(p[model::kRheB2]), a1);
}

// Logits for text (length d_text) and histogram (length n_hist) inputs;
// disabled modalities contribute zeros.
inline Vec Forward(const model::FusionModel &m, const Vec &text, Vec hist) {
  const auto &c = m.config;
  const auto &p = m.params;
  Vec concat;
  if (c.use_content) {
    concat = c.use_projection
                 ? Affine(ToMat(p[model::kProjW]), ToMat(p[model::kProjB]), text)
                 : text;
  } else {
    concat.assign(c.d_text, 0.0);
  }
  if (c.use_references) {
    if (c.l1_normalize) {
      double s = 0.0;
      for (double x : hist) s += std::fabs(x);
      if (s > 0.0) {
        for (double &x : hist) x /= s;
      }
    }
    Vec r = RheForward(m, hist);
    concat.insert(concat.end(), r.begin(), r.end());
  } else {
    concat.insert(concat.end(), 128, 0.0);
  }
  Vec h = Relu(Affine(ToMat(p[model::kHeadW1]), ToMat(p[model::kHeadB1]), concat));
  return Affine(ToMat(p[model::kHeadW2]), ToMat(p[model::kHeadB2]), h);
}

inline double MaxRelativeError(const Vec &a, const Vec &b) {
  double worst = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    double scale = std::max({1.0, std::fabs(a[i]), std::fabs(b[i])});
    worst = std::max(worst, std::fabs(a[i] - b[i]) / scale);
  }
  return worst;
}

inline double OracleLoss(const Vec &logits, int label) {
  double mx = *std::max_element(logits.begin(), logits.end());
  double s = 0.0;
  for (double z : logits) s += std::exp(z - mx);
  return mx + std::log(s) - logits[label];
}

// Small random model in a random configuration.
inline model::FusionModel RandomSmallModel(uint64_t seed) {
  std::mt19937_64 rng(seed);
  model::ModelConfig c;
  c.d_text = 2 + static_cast<int>(rng() % 4);
  c.n_hist = 1 + static_cast<int>(rng() % 5);
  c.n_labels = 2 + static_cast<int>(rng() % 4);
  c.hidden = 3 + static_cast<int>(rng() % 5);
  int modes = static_cast<int>(rng() % 3);
  c.use_content = modes != 1;
  c.use_references = modes != 0;
  c.use_projection = rng() % 2 == 0;
  c.l1_normalize = rng() % 3 == 0;
  model::FusionModel m = model::Initialize(c, rng());
  std::normal_distribution<double> g(0.0, 0.5);
  for (auto &p : m.params) {
    for (int i = 0; i < p.size(); ++i) p.data()[i] += g(rng);
  }
  return m;
}

inline std::vector<model::Example> RandomExamples(const model::ModelConfig &c, int n,
                                                  uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<model::Example> out;
  for (int i = 0; i < n; ++i) {
    model::Example e;
    Eigen::VectorXd t(c.d_text), h(c.n_hist);
    for (int k = 0; k < c.d_text; ++k) t[k] = g(rng);
    for (int k = 0; k < c.n_hist; ++k) h[k] = static_cast<double>(rng() % 4);
    e.text = t;
    e.histogram = h;
    e.label = static_cast<int>(rng() % c.n_labels);
    out.push_back(e);
  }
  return out;
}

struct GradientCheckResult {
  double max_rel_error = 0.0;
  int entries = 0;
  int directions = 0;
};

// Compares backprop gradients of the mean batch loss with central
// differences of the forward pass: entry-wise on up to `per_slot` random
// entries of every parameter tensor (all entries when the tensor is smaller),
// and along `directions` random unit directions through the full parameter
// vector. Relative error is |g - fd| / max(|g|, |fd|, floor).
inline GradientCheckResult GradientCheck(uint64_t seed, double h = 1e-4,
                                         double floor = 1e-4, int per_slot = 24,
                                         int directions = 8) {
  model::FusionModel m = RandomSmallModel(seed);
  auto batch_data = RandomExamples(m.config, 3, seed ^ 0x5bd1e995ULL);
  std::vector<const model::Example *> batch;
  for (const auto &e : batch_data) batch.push_back(&e);
  model::Tensors grads;
  model::Gradients(m, batch, &grads);
  auto mean_loss = [&]() {
    double s = 0.0;
    for (const auto &e : batch_data) {
      s += OracleLoss(ToVec(model::Forward(m, e.text, e.histogram)), e.label);
    }
    return s / static_cast<double>(batch_data.size());
  };
  GradientCheckResult r;
  auto record = [&](double g, double fd) {
    double denom = std::max({std::fabs(g), std::fabs(fd), floor});
    r.max_rel_error = std::max(r.max_rel_error, std::fabs(g - fd) / denom);
  };
  std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + 1);
  for (int slot = 0; slot < model::kNumParams; ++slot) {
    const int n = static_cast<int>(m.params[slot].size());
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    if (n > per_slot) idx.resize(per_slot);
    for (int i : idx) {
      double &w = m.params[slot].data()[i];
      const double saved = w;
      w = saved + h;
      double up = mean_loss();
      w = saved - h;
      double down = mean_loss();
      w = saved;
      record(grads[slot].data()[i], (up - down) / (2.0 * h));
      ++r.entries;
    }
  }
  std::normal_distribution<double> g01(0.0, 1.0);
  for (int d = 0; d < directions; ++d) {
    model::Tensors dir = m.ZeroLike();
    double norm = 0.0;
    for (auto &t : dir) {
      for (int i = 0; i < t.size(); ++i) {
        t.data()[i] = g01(rng);
        norm += t.data()[i] * t.data()[i];
      }
    }
    norm = std::sqrt(norm);
    double g_dot = 0.0;
    for (int s = 0; s < model::kNumParams; ++s) {
      dir[s] /= norm;
      if (dir[s].size()) g_dot += (grads[s].array() * dir[s].array()).sum();
    }
    const model::Tensors saved = m.params;
    for (int s = 0; s < model::kNumParams; ++s) m.params[s] = saved[s] + h * dir[s];
    double up = mean_loss();
    for (int s = 0; s < model::kNumParams; ++s) m.params[s] = saved[s] - h * dir[s];
    double down = mean_loss();
    m.params = saved;
    record(g_dot, (up - down) / (2.0 * h));
    ++r.directions;
  }
  return r;
}

// DBSCAN by definition: core points have at least min_pts points (self
// included) within eps; clusters are connected components of the core graph;
// a border point joins its nearest core neighbour, ties to the smallest core
// coordinates; labels renumbered by first occurrence.
inline disambig::DbscanResult Dbscan(const std::vector<Vec> &pts, double eps, int min_pts,
                                     disambig::Metric metric = disambig::Metric::kEuclidean) {
  const size_t n = pts.size();
  auto dist = [&](size_t i, size_t j) {
    if (metric == disambig::Metric::kEuclidean) {
      double s = 0.0;
      for (size_t k = 0; k < pts[i].size(); ++k) {
        double d = pts[i][k] - pts[j][k];
        s += d * d;
      }
      return std::sqrt(s);
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t k = 0; k < pts[i].size(); ++k) {
      dot += pts[i][k] * pts[j][k];
      na += pts[i][k] * pts[i][k];
      nb += pts[j][k] * pts[j][k];
    }
    if (na == 0.0 || nb == 0.0) return (na == 0.0 && nb == 0.0) ? 0.0 : 1.0;
    return 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
  };
  std::vector<std::vector<double>> d(n, std::vector<double>(n));
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) d[i][j] = dist(i, j);
  }
  std::vector<bool> core(n, false);
  for (size_t i = 0; i < n; ++i) {
    int cnt = 0;
    for (size_t j = 0; j < n; ++j) cnt += d[i][j] <= eps;
    core[i] = cnt >= min_pts;
  }
  std::vector<int> comp(n, -1);
  int n_comp = 0;
  for (size_t s = 0; s < n; ++s) {
    if (!core[s] || comp[s] >= 0) continue;
    std::deque<size_t> q{s};
    comp[s] = n_comp;
    while (!q.empty()) {
      size_t i = q.front();
      q.pop_front();
      for (size_t j = 0; j < n; ++j) {
        if (core[j] && comp[j] < 0 && d[i][j] <= eps) {
          comp[j] = n_comp;
          q.push_back(j);
        }
      }
    }
    ++n_comp;
  }
  for (size_t i = 0; i < n; ++i) {
    if (core[i]) continue;
    long best = -1;
    for (size_t j = 0; j < n; ++j) {
      if (!core[j] || d[i][j] > eps) continue;
      if (best < 0 || d[i][j] < d[i][best] ||
          (d[i][j] == d[i][best] && pts[j] < pts[best])) {
        best = static_cast<long>(j);
      }
    }
    if (best >= 0) comp[i] = comp[best];
  }
  disambig::DbscanResult r;
  std::map<int, int> renum;
  for (size_t i = 0; i < n; ++i) {
    if (comp[i] < 0) {
      r.labels.push_back(-1);
      ++r.n_noise;
      continue;
    }
    auto it = renum.find(comp[i]);
    if (it == renum.end()) it = renum.emplace(comp[i], static_cast<int>(renum.size())).first;
    r.labels.push_back(it->second);
  }
  r.n_clusters = static_cast<int>(renum.size());
  return r;
}

// Ranking by descending probability, ties by ascending index.
inline std::vector<int> Ranking(const Vec &p) {
  std::vector<int> idx(p.size());
  for (size_t i = 0; i < p.size(); ++i) idx[i] = static_cast<int>(i);
  for (size_t i = 0; i < idx.size(); ++i) {
    for (size_t j = i + 1; j < idx.size(); ++j) {
      bool swap = p[idx[j]] > p[idx[i]] || (p[idx[j]] == p[idx[i]] && idx[j] < idx[i]);
      if (swap) std::swap(idx[i], idx[j]);
    }
  }
  return idx;
}

inline std::set<int> TopSet(const Vec &p, size_t k) {
  auto r = Ranking(p);
  return std::set<int>(r.begin(), r.begin() + std::min(k, r.size()));
}

inline int AuthorCount(const Vec &p, double ratio) {
  double mx = *std::max_element(p.begin(), p.end());
  int n = 0;
  for (double x : p) n += x >= ratio * mx;
  return n;
}

struct MetricVerdicts {
  bool m1, m2, m3, m4;
  int n_hat;
};

inline MetricVerdicts Metrics(const Vec &p, const std::set<int> &gold, double ratio, int k) {
  MetricVerdicts v{};
  v.n_hat = AuthorCount(p, ratio);
  v.m1 = gold.count(Ranking(p)[0]) > 0;
  v.m2 = TopSet(p, gold.size()) == gold;
  v.m3 = TopSet(p, v.n_hat) == gold;
  auto top = TopSet(p, k);
  v.m4 = std::includes(top.begin(), top.end(), gold.begin(), gold.end());
  return v;
}

// Violations of the three bundle invariants, recomputed from scratch.
inline std::vector<std::string> BundleViolations(const std::vector<TrainSample> &train,
                                                 const std::vector<TestSample> &test,
                                                 int n_labels, double ratio) {
  std::vector<std::string> out;
  std::set<std::string> train_ids;
  std::vector<int> total(n_labels, 0), in_test(n_labels, 0);
  for (const auto &s : train) {
    if (!train_ids.insert(s.paper_id).second) out.push_back("duplicate train id " + s.paper_id);
    if (s.label < 0 || s.label >= n_labels) out.push_back("bad train label " + s.paper_id);
    if (std::find(s.authors.begin(), s.authors.end(), s.label) == s.authors.end()) {
      out.push_back("train label not among authors " + s.paper_id);
    }
    for (int a : s.authors) ++total[a];
  }
  for (const auto &s : test) {
    if (train_ids.count(s.paper_id)) out.push_back("leak " + s.paper_id);
    if (s.labels.empty()) out.push_back("unlabeled test " + s.paper_id);
    for (int a : s.labels) {
      ++total[a];
      ++in_test[a];
    }
  }
  for (int a = 0; a < n_labels; ++a) {
    int lo = total[a] < 2 ? 0 : static_cast<int>(std::floor(ratio * total[a] + 1e-9));
    int hi = total[a] < 2 ? 0 : static_cast<int>(std::ceil(ratio * total[a] - 1e-9));
    if (in_test[a] < lo || in_test[a] > hi) {
      out.push_back("author " + std::to_string(a) + " has " + std::to_string(in_test[a]) +
                    " of " + std::to_string(total[a]) + " in test");
    }
  }
  return out;
}

// Random labeled-paper sets: mostly single-author papers plus co-authored ones.
inline std::vector<ingest::LabeledPaper> RandomPapers(std::mt19937_64 &rng, int *n_labels) {
  std::uniform_int_distribution<int> n_auth(1, 8), n_pap(5, 60);
  *n_labels = n_auth(rng);
  const int n_papers = n_pap(rng) * *n_labels / 2 + 1;
  std::uniform_int_distribution<int> pick(0, *n_labels - 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<ingest::LabeledPaper> papers;
  for (int i = 0; i < n_papers; ++i) {
    std::set<int> labels{pick(rng)};
    while (u(rng) < 0.25 && static_cast<int>(labels.size()) < *n_labels) labels.insert(pick(rng));
    papers.push_back({"p" + std::to_string(rng() % 1000000) + "_" + std::to_string(i),
                      std::vector<int>(labels.begin(), labels.end())});
  }
  return papers;
}

}  // namespace citeprint::oracles

#endif  // CITEPRINT_TESTS_SUPPORT_ORACLES_HPP_
