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

// End-to-end orchestration behind the command-line subcommands.

#ifndef CITEPRINT_PIPELINE_HPP_
#define CITEPRINT_PIPELINE_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "citeprint/disambig.hpp"
#include "citeprint/encoder.hpp"
#include "citeprint/evaluate.hpp"
#include "citeprint/ingest.hpp"
#include "citeprint/model.hpp"
#include "json.hpp"

namespace citeprint::pipeline {

using Logger = std::function<void(const std::string &)>;

// Parameters picked by `tune-dbscan` on the synthetic calibration set with
// the default native encoder.
inline constexpr double kTunedEps = 0.99;
inline constexpr int kTunedMinPts = 3;

struct BuildOptions {
  std::string corpus_path;
  std::string out_dir;
  int min_papers = 0;
  std::optional<int> trim;
  bool chunked = false;
  uint64_t seed = 0;
  double test_ratio = 0.2;
  int chunk_words = 512;
  double min_avg_word_len = 4.22;
  int vocab_min_count = 50;
  EncoderSpec encoder;
  bool disambiguate = true;
  disambig::DbscanParams dbscan{kTunedEps, kTunedMinPts, disambig::Metric::kEuclidean};
  int workers = 1;
};

struct BuildSummary {
  std::string dir;
  std::string name;
  int n_labels = 0;
  int n_train = 0;
  int n_test = 0;
  int vocab_size = 0;
  int n_dropped = 0;
};

BuildSummary Build(const BuildOptions &options, const Logger &log = {});

// Segmentation, chunking and reference parsing of one manuscript. In chunked
// mode at least one chunk must pass the word-length filter. Throws FailFast.
ParsedPaper ProcessManuscript(const Manuscript &m, int chunk_words,
                              double min_avg_word_len, bool chunked);

enum class ChunkSelection { kDataset, kAll, kFirst };

struct TrainOptions {
  std::string dataset_dir;
  std::string checkpoint_path;
  model::Mode mode = model::Mode::kRefCont;
  std::optional<double> learning_rate;
  std::optional<int> epochs;
  uint64_t seed = 0;
  int batch_size = 32;
  int hidden = 512;
  bool use_projection = false;
  bool l1_normalize = false;
  bool resume = false;
  std::string sidecar_endpoint;  // required when the dataset used the sidecar
};

struct TrainSummary {
  std::string checkpoint_path;
  double learning_rate = 0;
  int epochs = 0;
  int examples = 0;
  int epochs_run = 0;
  std::vector<double> epoch_loss;
};

TrainSummary Train(const TrainOptions &options, const Logger &log = {});

struct EvalOptions {
  std::string checkpoint_path;
  std::string dataset_dir;
  std::string out_dir;  // empty: "<checkpoint>.report"
  double ratio = evaluate::kDefaultRatio;
  int top_k = evaluate::kDefaultTopK;
  ChunkSelection chunks = ChunkSelection::kDataset;
  std::string sidecar_endpoint;
};

struct EvalSummary {
  std::string out_dir;
  evaluate::MetricReport report;
  nlohmann::json report_json;  // contents of report.json
};

EvalSummary Eval(const EvalOptions &options, const Logger &log = {});

struct PredictOptions {
  std::string checkpoint_path;
  std::string manuscript_path;
  int top_k = evaluate::kDefaultTopK;
  double ratio = evaluate::kDefaultRatio;
  std::string sidecar_endpoint;
};

struct RankedAuthor {
  std::string name;
  double probability = 0;
};

struct PredictResult {
  std::vector<RankedAuthor> ranked;  // top_k rows
  int estimated_authors = 0;
  int chunks_used = 0;
};

PredictResult Predict(const PredictOptions &options, const Logger &log = {});

// A checkpoint loaded once for repeated predictions. Manuscripts go through
// the same preprocessing as at build time.
class Predictor {
 public:
  explicit Predictor(const std::string &checkpoint_path,
                     const std::string &sidecar_endpoint = "");
  ~Predictor();
  Predictor(Predictor &&) noexcept;
  Predictor &operator=(Predictor &&) noexcept;

  const std::vector<std::string> &labels() const;
  PredictResult Predict(const Manuscript &m, int top_k = evaluate::kDefaultTopK,
                        double ratio = evaluate::kDefaultRatio, const Logger &log = {});

 private:
  struct State;
  std::unique_ptr<State> state_;
};

struct TuneOptions {
  uint64_t seed = 1;
  int abstracts_each = 40;
  EncoderSpec encoder;
  disambig::Metric metric = disambig::Metric::kEuclidean;
  std::vector<double> eps_grid;  // empty: 0.01 .. 2.00 step 0.01
  std::vector<int> min_pts_grid{2, 3, 4, 5, 6, 8};
};

disambig::TuningResult TuneDbscan(const TuneOptions &options, const Logger &log = {});

nlohmann::json EncoderSpecToJson(const EncoderSpec &spec, const std::string &encoder_id);
EncoderSpec EncoderSpecFromJson(const nlohmann::json &j, const std::string &sidecar_endpoint);

// Plain-text report: one row per stratum plus per-author accuracy.
std::string RenderReport(const evaluate::MetricReport &report, const std::string &title);

}  // namespace citeprint::pipeline

#endif  // CITEPRINT_PIPELINE_HPP_
