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

#include "citeprint/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "citeprint/error.hpp"
#include "citeprint/text.hpp"

namespace citeprint {

std::string AuthorLabel::Surname() const {
  auto toks = SplitWhitespace(canonical_name);
  return toks.empty() ? std::string() : ToLowerUtf8(toks.back());
}

namespace ingest {
namespace {

bool IsInitial(const std::string &tok) {
  // One letter, or dotted letters such as "J." and "J.K.".
  auto letter = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
  };
  if (tok.size() == 1) return letter(tok[0]);
  if (tok.size() % 2 != 0) return false;
  for (size_t i = 0; i < tok.size(); i += 2) {
    if (!letter(tok[i]) || tok[i + 1] != '.') return false;
  }
  return true;
}

std::vector<size_t> HashOrder(const std::vector<std::string> &ids,
                              uint64_t seed) {
  std::vector<size_t> order(ids.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<uint64_t> h(ids.size());
  for (size_t i = 0; i < ids.size(); ++i) h[i] = KeyedHash(ids[i], seed);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (h[a] != h[b]) return h[a] < h[b];
    return ids[a] < ids[b];
  });
  return order;
}

int PickLabel(const std::string &id, const std::vector<int> &labels,
              uint64_t seed) {
  uint64_t h = KeyedHash(id, seed ^ 0x7261696e6c61626cULL);
  return labels[h % labels.size()];
}

}  // namespace

bool HasOnlyInitials(const std::string &name) {
  auto toks = SplitWhitespace(name);
  if (toks.size() < 2) return true;
  for (size_t i = 0; i + 1 < toks.size(); ++i) {
    if (!IsInitial(toks[i])) return false;
  }
  return true;
}

std::vector<Manuscript> FilterFullNames(const std::vector<Manuscript> &corpus) {
  std::vector<Manuscript> out;
  for (const auto &m : corpus) {
    if (std::none_of(m.authors.begin(), m.authors.end(), HasOnlyInitials)) {
      out.push_back(m);
    }
  }
  return out;
}

std::vector<AuthorLabel> SelectAuthors(const std::vector<Manuscript> &corpus,
                                       int min_papers) {
  if (min_papers < 1) throw UsageError("min_papers must be >= 1");
  std::map<std::string, int> counts;
  for (const auto &m : corpus) {
    std::set<std::string> distinct(m.authors.begin(), m.authors.end());
    for (const auto &a : distinct) ++counts[a];
  }
  std::vector<AuthorLabel> out;
  for (const auto &[name, n] : counts) {
    if (n >= min_papers) out.push_back({name, 0, n});
  }
  return out;
}

std::pair<int, int> TestQuota(int n, double ratio) {
  if (n < 2) return {0, 0};
  double x = ratio * n;
  int lo = static_cast<int>(std::floor(x + 1e-9));
  int hi = static_cast<int>(std::ceil(x - 1e-9));
  return {lo, std::max(lo, hi)};
}

Split SplitDataset(const std::vector<LabeledPaper> &papers, int n_labels,
                   double ratio, uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw UsageError("split ratio must be in (0,1)");
  std::vector<int> total(n_labels, 0);
  std::vector<std::string> ids;
  std::set<std::string> seen;
  for (const auto &p : papers) {
    if (p.labels.empty()) throw DataError("paper " + p.id + " carries no label");
    if (!seen.insert(p.id).second) throw DataError("duplicate paper id " + p.id);
    for (int a : p.labels) {
      if (a < 0 || a >= n_labels) throw DataError("label out of range on " + p.id);
      ++total[a];
    }
    ids.push_back(p.id);
  }
  std::vector<int> lo(n_labels), hi(n_labels), aim(n_labels);
  for (int a = 0; a < n_labels; ++a) {
    std::tie(lo[a], hi[a]) = TestQuota(total[a], ratio);
    aim[a] = std::clamp(static_cast<int>(std::lround(ratio * total[a])), lo[a], hi[a]);
  }

  std::vector<size_t> order = HashOrder(ids, seed);
  std::vector<int> in_test(n_labels, 0);
  std::vector<bool> is_test(papers.size(), false);
  auto fits = [&](const LabeledPaper &p) {
    return std::all_of(p.labels.begin(), p.labels.end(),
                       [&](int a) { return in_test[a] + 1 <= hi[a]; });
  };
  auto move_to_test = [&](size_t i) {
    is_test[i] = true;
    for (int a : papers[i].labels) ++in_test[a];
  };
  for (size_t i : order) {
    const auto &p = papers[i];
    bool wanted = std::any_of(p.labels.begin(), p.labels.end(),
                              [&](int a) { return in_test[a] < aim[a]; });
    if (wanted && fits(p)) move_to_test(i);
  }
  // Repair authors still below their lower bound.
  for (int a = 0; a < n_labels; ++a) {
    for (size_t i : order) {
      if (in_test[a] >= lo[a]) break;
      const auto &p = papers[i];
      if (is_test[i]) continue;
      if (std::find(p.labels.begin(), p.labels.end(), a) == p.labels.end()) continue;
      if (fits(p)) move_to_test(i);
    }
  }

  Split split;
  for (size_t i = 0; i < papers.size(); ++i) {
    const auto &p = papers[i];
    if (is_test[i]) {
      split.test.push_back({p.id, p.labels});
    } else {
      split.train.push_back({p.id, PickLabel(p.id, p.labels, seed), p.labels});
    }
  }
  std::sort(split.train.begin(), split.train.end(),
            [](const auto &x, const auto &y) { return x.paper_id < y.paper_id; });
  std::sort(split.test.begin(), split.test.end(),
            [](const auto &x, const auto &y) { return x.paper_id < y.paper_id; });
  for (int a = 0; a < n_labels; ++a) {
    if (in_test[a] < lo[a] || in_test[a] > hi[a]) split.drift.push_back(a);
    if (total[a] < 2) split.train_only.push_back(a);
  }
  return split;
}

std::vector<int> PaperCounts(const DatasetBundle &bundle) {
  std::vector<int> n(bundle.labels.size(), 0);
  for (const auto &s : bundle.train) {
    for (int a : s.authors) ++n[a];
  }
  for (const auto &s : bundle.test) {
    for (int a : s.labels) ++n[a];
  }
  return n;
}

DatasetBundle TrimDataset(const DatasetBundle &bundle, int max_papers_per_author,
                          uint64_t seed) {
  if (max_papers_per_author < 2) throw UsageError("trim cap must be >= 2");
  DatasetBundle out = bundle;
  const int n_labels = static_cast<int>(bundle.labels.size());
  std::vector<int> total = PaperCounts(bundle);
  for (int a = 0; a < n_labels; ++a) {
    if (total[a] <= max_papers_per_author) continue;
    std::vector<std::string> test_ids, train_ids;
    for (const auto &s : out.test) {
      if (std::count(s.labels.begin(), s.labels.end(), a)) test_ids.push_back(s.paper_id);
    }
    for (const auto &s : out.train) {
      if (std::count(s.authors.begin(), s.authors.end(), a)) train_ids.push_back(s.paper_id);
    }
    auto [lo, hi] = TestQuota(max_papers_per_author, out.test_ratio);
    int t = std::clamp(
        static_cast<int>(std::lround(out.test_ratio * max_papers_per_author)), lo, hi);
    t = std::min<int>(t, static_cast<int>(test_ids.size()));
    int r = std::min<int>(max_papers_per_author - t, static_cast<int>(train_ids.size()));
    t = std::min({max_papers_per_author - r, static_cast<int>(test_ids.size()), hi});

    uint64_t author_seed = seed ^ Fnv1a64(bundle.labels[a].canonical_name);
    std::set<std::string> keep;
    auto o1 = HashOrder(test_ids, author_seed);
    for (int k = 0; k < t; ++k) keep.insert(test_ids[o1[k]]);
    auto o2 = HashOrder(train_ids, author_seed);
    for (int k = 0; k < r; ++k) keep.insert(train_ids[o2[k]]);

    auto drop_label = [&](std::vector<int> &v) { v.erase(std::remove(v.begin(), v.end(), a), v.end()); };
    for (auto &s : out.test) {
      if (!keep.count(s.paper_id)) drop_label(s.labels);
    }
    for (auto &s : out.train) {
      if (keep.count(s.paper_id)) continue;
      drop_label(s.authors);
      if (s.label == a && !s.authors.empty()) s.label = PickLabel(s.paper_id, s.authors, seed);
    }
  }
  std::erase_if(out.test, [](const TestSample &s) { return s.labels.empty(); });
  std::erase_if(out.train, [](const TrainSample &s) { return s.authors.empty(); });
  std::set<std::string> used;
  for (const auto &s : out.train) used.insert(s.paper_id);
  for (const auto &s : out.test) used.insert(s.paper_id);
  std::erase_if(out.papers, [&](const auto &kv) { return !used.count(kv.first); });
  std::vector<int> counts = PaperCounts(out);
  for (int a = 0; a < n_labels; ++a) out.labels[a].paper_count = counts[a];
  out.name = TrimmedName(bundle.name, max_papers_per_author);
  return out;
}

std::string DatasetName(int min_papers, std::optional<int> trim, bool chunked) {
  std::string name = "D" + std::to_string(min_papers);
  if (trim) name += "T" + std::to_string(*trim);
  if (chunked) name += "-C";
  return name;
}

std::string TrimmedName(const std::string &name, int cap) {
  std::string base = name;
  bool chunked = EndsWith(base, "-C");
  if (chunked) base.resize(base.size() - 2);
  size_t t = base.find('T');
  if (t != std::string::npos) base.resize(t);
  return base + "T" + std::to_string(cap) + (chunked ? "-C" : "");
}

std::vector<std::string> CheckInvariants(const DatasetBundle &bundle) {
  std::vector<std::string> errors;
  const int n_labels = static_cast<int>(bundle.labels.size());
  std::set<std::string> train_ids;
  for (const auto &s : bundle.train) {
    train_ids.insert(s.paper_id);
    if (s.label < 0 || s.label >= n_labels) {
      errors.push_back("train sample " + s.paper_id + " has an invalid label");
    }
  }
  for (const auto &s : bundle.test) {
    if (train_ids.count(s.paper_id)) {
      errors.push_back("paper " + s.paper_id + " is in train and test");
    }
    if (s.labels.empty()) errors.push_back("test sample " + s.paper_id + " has no label");
  }
  std::vector<int> total = PaperCounts(bundle);
  std::vector<int> in_test(n_labels, 0);
  for (const auto &s : bundle.test) {
    for (int a : s.labels) ++in_test[a];
  }
  for (int a = 0; a < n_labels; ++a) {
    auto [lo, hi] = TestQuota(total[a], bundle.test_ratio);
    if (in_test[a] < lo || in_test[a] > hi) {
      errors.push_back("author " + bundle.labels[a].canonical_name + " has " +
                       std::to_string(in_test[a]) + " of " +
                       std::to_string(total[a]) + " papers in test");
    }
  }
  return errors;
}

}  // namespace ingest
}  // namespace citeprint
