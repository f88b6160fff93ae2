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

// Acceptance run. Prints one PASS or FAIL line per criterion and exits
// nonzero if any fails. Pass --skip-smoke to leave out the two end-to-end
// criteria.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "citeprint/disambig.hpp"
#include "citeprint/error.hpp"
#include "citeprint/evaluate.hpp"
#include "citeprint/ingest.hpp"
#include "citeprint/model.hpp"
#include "citeprint/preprocess.hpp"
#include "json.hpp"
#include "support/oracles.hpp"
#include "support/points.hpp"
#include "support/scoring.hpp"
#include "support/tempdir.hpp"

namespace citeprint {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

// Tolerances.
constexpr double kGradientTolerance = 1e-4;
constexpr double kGradientSeconds = 60.0;
constexpr double kForwardTolerance = 1e-6;
constexpr double kRefparseRate = 0.95;
constexpr int kRefparseBlocks = 60;
constexpr int kSegmentManuscripts = 20;
constexpr double kSmokeSeconds = 600.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::string Fmt(const char *format, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), format, a, b, c, d);
  return buf;
}

Outcome GradientCheck() {
  auto start = Clock::now();
  double worst = 0.0;
  for (uint64_t seed = 1; seed <= 100; ++seed) {
    worst = std::max(worst, oracles::GradientCheck(seed).max_rel_error);
  }
  double secs = Seconds(start);
  return {worst < kGradientTolerance && secs < kGradientSeconds,
          Fmt("100 models, max rel error %.2e, %.1f s", worst, secs)};
}

Outcome ForwardOracle() {
  double worst = 0.0;
  int instances = 0;
  for (uint64_t seed = 1; seed <= 200; ++seed) {
    model::FusionModel m = oracles::RandomSmallModel(seed);
    for (const auto &e : oracles::RandomExamples(m.config, 2, seed + 1000)) {
      auto want = oracles::Forward(m, oracles::ToVec(*e.text), oracles::ToVec(*e.histogram));
      auto got = oracles::ToVec(model::Forward(m, e.text, e.histogram));
      worst = std::max(worst, oracles::MaxRelativeError(got, want));
      if (m.config.use_references && !m.config.l1_normalize) {
        auto rw = oracles::RheForward(m, oracles::ToVec(*e.histogram));
        auto rg = oracles::ToVec(model::RheForward(m, *e.histogram));
        worst = std::max(worst, oracles::MaxRelativeError(rg, rw));
      }
      ++instances;
    }
  }
  return {worst < kForwardTolerance,
          Fmt("%.0f instances, max rel error %.2e", instances, worst)};
}

Outcome Refparse() {
  scoring::Score styles = scoring::RefparseStyles();
  scoring::Score bad = scoring::RefparseMalformed();
  bool pass = styles.blocks >= kRefparseBlocks && styles.rate() >= kRefparseRate &&
              bad.total > 0 && bad.passed == bad.total;
  return {pass, Fmt("%.0f blocks, %.0f/%.0f entries exact", styles.blocks, styles.passed,
                    styles.total) +
                    Fmt(" (%.1f%%), malformed fail-fast %.0f/%.0f", 100.0 * styles.rate(),
                        bad.passed, bad.total)};
}

Outcome Segmentation() {
  scoring::Score labeled = scoring::SegmentLabeled();
  scoring::Score free = scoring::SegmentAnchorFree();
  bool pass = labeled.total >= kSegmentManuscripts && labeled.passed == labeled.total &&
              free.total > 0 && free.passed == free.total;
  return {pass, Fmt("%.0f/%.0f manuscripts agree, anchor-free fail-fast %.0f/%.0f",
                    labeled.passed, labeled.total, free.passed, free.total)};
}

std::string Words(const std::string &w, int n) {
  std::string out;
  for (int i = 0; i < n; ++i) out += (i ? " " : "") + w;
  return out;
}

Outcome ChunkFilter() {
  // 421 and 423 characters over 100 words.
  auto low = preprocess::Chunk(Words("abcd", 79) + " " + Words("abcde", 21));
  auto high = preprocess::Chunk(Words("abcd", 77) + " " + Words("abcde", 23));
  bool pass = low.size() == 1 && high.size() == 1 &&
              std::fabs(low[0].avg_word_len - 4.21) < 1e-12 &&
              std::fabs(high[0].avg_word_len - 4.23) < 1e-12 &&
              preprocess::FilterChunks(low).empty() && preprocess::FilterChunks(high).size() == 1;
  return {pass, Fmt("4.21 kept %.0f chunks, 4.23 kept %.0f chunks",
                    low.empty() ? -1 : preprocess::FilterChunks(low).size(),
                    high.empty() ? -1 : preprocess::FilterChunks(high).size())};
}

Outcome Dbscan() {
  using disambig::Metric;
  std::mt19937_64 rng(2026);
  int fixtures = 0, equal = 0;
  for (int n : {1, 2, 3, 5, 10, 25, 50, 100, 150, 200}) {
    for (int rep = 0; rep < 12; ++rep) {
      int dim = 1 + static_cast<int>(rng() % 6);
      auto pts = points::RandomFixture(rng, n, dim);
      double eps = 0.2 + (rng() % 150) / 100.0;
      int min_pts = 1 + static_cast<int>(rng() % 6);
      Metric metric = rep % 4 == 3 ? Metric::kCosine : Metric::kEuclidean;
      if (metric == Metric::kCosine) eps = 0.01 + (rng() % 40) / 100.0;
      auto got = disambig::Dbscan(pts, {eps, min_pts, metric});
      auto want = oracles::Dbscan(pts, eps, min_pts, metric);
      equal += got.labels == want.labels && got.n_clusters == want.n_clusters &&
               got.n_noise == want.n_noise;
      ++fixtures;
    }
  }
  auto pts = points::RandomFixture(rng, 120, 3);
  disambig::DbscanParams params{0.8, 4, Metric::kEuclidean};
  auto base = disambig::Dbscan(pts, params);
  int stable = 0;
  for (int t = 0; t < 50; ++t) {
    std::vector<size_t> perm(pts.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<disambig::Point> shuffled;
    for (size_t i : perm) shuffled.push_back(pts[i]);
    auto r = disambig::Dbscan(shuffled, params);
    std::vector<int> back(pts.size());
    for (size_t k = 0; k < perm.size(); ++k) back[perm[k]] = r.labels[k];
    stable += points::Canonical(back) == base.labels;
  }
  return {equal == fixtures && stable == 50 && base.n_clusters >= 1,
          Fmt("%.0f/%.0f fixtures equal the oracle, %.0f/50 shuffles invariant", equal, fixtures,
              stable)};
}

Outcome DatasetInvariants() {
  std::mt19937_64 rng(20260101);
  int violating = 0, multi_in_test = 0;
  for (int t = 0; t < 1000; ++t) {
    int n_labels = 0;
    auto papers = oracles::RandomPapers(rng, &n_labels);
    ingest::Split s = ingest::SplitDataset(papers, n_labels, 0.2, rng());
    bool bad = !oracles::BundleViolations(s.train, s.test, n_labels, 0.2).empty() ||
               s.train.size() + s.test.size() != papers.size();
    violating += bad;
    for (const auto &x : s.test) multi_in_test += x.labels.size() > 1;
  }
  return {violating == 0 && multi_in_test > 0,
          Fmt("1000 corpora, %.0f with violations, %.0f multi-author test papers", violating,
              multi_in_test)};
}

Outcome MetricOracles() {
  std::mt19937_64 rng(2026);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<int>> subsets;
  for (int mask = 1; mask < 32; ++mask) {
    std::vector<int> g;
    for (int i = 0; i < 5; ++i) {
      if (mask & (1 << i)) g.push_back(i);
    }
    subsets.push_back(g);
  }
  long samples = 0, mismatches = 0, implication = 0;
  for (int t = 0; t < 10000; ++t) {
    Eigen::VectorXd z(5);
    for (int i = 0; i < 5; ++i) {
      z[i] = t % 4 == 0 ? static_cast<double>(rng() % 3)
                        : std::log(u(rng) + 1e-6) * (1.0 + 3.0 * u(rng));
    }
    auto p = evaluate::FromChunkLogits("p", {z});
    double ratio = t % 5 == 0 ? 0.5 : evaluate::kDefaultRatio;
    int k = 1 + static_cast<int>(rng() % 5);
    if (evaluate::EstimateAuthorCount(p, ratio) != oracles::AuthorCount(p.probabilities, ratio)) {
      ++mismatches;
    }
    for (const auto &g : subsets) {
      auto want = oracles::Metrics(p.probabilities, std::set<int>(g.begin(), g.end()), ratio, k);
      bool m1 = evaluate::Metric1(p, g), m2 = evaluate::Metric2(p, g);
      if (m1 != want.m1 || m2 != want.m2 || evaluate::Metric3(p, g, ratio) != want.m3 ||
          evaluate::Metric4(p, g, k) != want.m4) {
        ++mismatches;
      }
      implication += m2 && !m1;
      ++samples;
    }
  }
  return {mismatches == 0 && implication == 0 && samples == 310000,
          Fmt("%.0f samples, %.0f mismatches, %.0f m2-without-m1", samples, mismatches,
              implication)};
}

// ---- End to end through the command-line tool.

struct CliRun {
  int code = -1;
  std::string output;
};

CliRun Cli(const std::string &args) {
  std::string cmd = std::string(CITEPRINT_CLI_PATH) + " -q " + args + " 2>&1";
  CliRun r;
  FILE *p = ::popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), p)) > 0) r.output.append(buf, n);
  int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

void Must(const std::string &args) {
  CliRun r = Cli(args);
  if (r.code != 0) {
    throw Error(ErrorKind::kInternal, "citeprint " + args + " exited " +
                                          std::to_string(r.code) + ": " + r.output);
  }
}

double Accuracy(const std::string &report_dir) {
  auto j = nlohmann::json::parse(testing::Slurp(report_dir + "/report.json"));
  return j.at("strata").at("overall").at("m1").get<double>();
}

const char *const kModes[] = {"content", "references", "ref-no-self", "ref-cont"};

struct SmokeResult {
  std::map<std::string, double> all, first;
  double seconds = 0;
};

SmokeResult RunSmoke(const testing::TempDir &dir) {
  auto start = Clock::now();
  Must("synth --out " + (dir / "corpus") + " --seed 7");
  Must("build --corpus " + (dir / "corpus") + "/corpus.jsonl --out " + (dir / "ds") +
       " --min-papers 50 --chunked --seed 3");
  SmokeResult r;
  for (const char *mode : kModes) {
    std::string ckpt = dir / (std::string(mode) + ".ckpt");
    Must("train --dataset " + (dir / "ds") + " --checkpoint " + ckpt + " --mode " + mode +
         " --seed 5 --lr 1e-3 --epochs 10");
    for (const char *chunks : {"all", "first"}) {
      std::string out = ckpt + "." + chunks;
      Must("eval --checkpoint " + ckpt + " --dataset " + (dir / "ds") + " --chunks " + chunks +
           " --out " + out);
      (std::string(chunks) == "all" ? r.all : r.first)[mode] = Accuracy(out);
    }
  }
  r.seconds = Seconds(start);
  return r;
}

std::map<std::string, std::string> Snapshot(const std::string &root) {
  std::map<std::string, std::string> files;
  for (const auto &e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) {
      files[fs::relative(e.path(), root).string()] = testing::Slurp(e.path().string());
    }
  }
  return files;
}

Outcome Determinism(const testing::TempDir &dir) {
  std::string work = dir / "det";
  auto once = [&] {
    fs::remove_all(work);
    fs::create_directories(work);
    Must("build --corpus " + (dir / "corpus") + "/corpus.jsonl --out " + work +
         "/ds --min-papers 50 --chunked --seed 3 --workers 1");
    Must("train --dataset " + work + "/ds --checkpoint " + work +
         "/m.ckpt --mode ref-cont --seed 5 --lr 1e-3 --epochs 3");
    Must("eval --checkpoint " + work + "/m.ckpt --dataset " + work + "/ds --out " + work +
         "/report");
    return Snapshot(work);
  };
  auto a = once();
  auto b = once();
  int differing = 0;
  for (const auto &[name, bytes] : a) {
    auto it = b.find(name);
    differing += it == b.end() || it->second != bytes;
  }
  differing += static_cast<int>(b.size() > a.size() ? b.size() - a.size() : 0);
  return {differing == 0 && !a.empty(),
          Fmt("%.0f files compared, %.0f differ", a.size(), differing)};
}

int Print(const std::string &name, const Outcome &o) {
  std::printf("%s  %-22s %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
  std::fflush(stdout);
  return o.pass ? 0 : 1;
}

Outcome Guard(const std::function<Outcome()> &fn) {
  try {
    return fn();
  } catch (const std::exception &e) {
    return {false, std::string("error: ") + e.what()};
  }
}

}  // namespace
}  // namespace citeprint

int main(int argc, char **argv) {
  using namespace citeprint;
  bool smoke = !(argc > 1 && std::string(argv[1]) == "--skip-smoke");
  int failures = 0;
  failures += Print("gradient", Guard(GradientCheck));
  failures += Print("forward-oracle", Guard(ForwardOracle));
  failures += Print("refparse-fixtures", Guard(Refparse));
  failures += Print("segmentation-fixtures", Guard(Segmentation));
  failures += Print("chunk-filter", Guard(ChunkFilter));
  failures += Print("dbscan-oracle", Guard(Dbscan));
  failures += Print("dataset-invariants", Guard(DatasetInvariants));
  failures += Print("metric-oracles", Guard(MetricOracles));
  if (smoke) {
    testing::TempDir dir;
    SmokeResult s;
    Outcome run = Guard([&] {
      s = RunSmoke(dir);
      return Outcome{true, ""};
    });
    if (!run.pass) {
      failures += Print("smoke", run);
    } else {
      const double rc = s.all["ref-cont"], refs = s.all["references"], cont = s.all["content"];
      failures += Print("smoke-time", {s.seconds < kSmokeSeconds, Fmt("%.0f s", s.seconds)});
      failures += Print("smoke-a-fusion", {rc >= refs && rc >= cont,
                                           Fmt("ref-cont %.3f, references %.3f, content %.3f",
                                               rc, refs, cont)});
      failures += Print("smoke-b-self-citation",
                        {s.all["ref-no-self"] < refs,
                         Fmt("ref-no-self %.3f < references %.3f", s.all["ref-no-self"], refs)});
      failures += Print("smoke-c-chunked",
                        {s.all["content"] >= s.first["content"],
                         Fmt("content all %.3f >= first %.3f", s.all["content"],
                             s.first["content"])});
      std::printf("info  %-22s ref-cont all %.3f, first %.3f; references all %.3f, first %.3f\n",
                  "chunked-other-modes", s.all["ref-cont"], s.first["ref-cont"],
                  s.all["references"], s.first["references"]);
      failures += Print("determinism", Guard([&] { return Determinism(dir); }));
    }
  }
  std::printf("%s: %d failing\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
