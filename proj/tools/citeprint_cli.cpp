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

// citeprint: command-line front end over the C interface of libciteprint.

#include <cstdio>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "citeprint/citeprint.h"
#include "json.hpp"

namespace {

// A flag or option forwarded to the library as key=value when given.
struct Forward {
  CLI::Option *opt;
  std::string key;
  std::string value;
  bool is_flag = false;
  bool invert = false;
};

class Command {
 public:
  Command(CLI::App *app, std::string name, const std::string &about)
      : sub_(app->add_subcommand(std::move(name), about)) {}

  CLI::App *app() { return sub_; }

  CLI::Option *Opt(const std::string &flag, const std::string &key, const std::string &help) {
    auto f = std::make_unique<Forward>();
    f->key = key;
    f->opt = sub_->add_option(flag, f->value, help);
    CLI::Option *o = f->opt;
    fwd_.push_back(std::move(f));
    return o;
  }

  CLI::Option *Flag(const std::string &flag, const std::string &key, const std::string &help,
                    bool invert = false) {
    auto f = std::make_unique<Forward>();
    f->key = key;
    f->is_flag = true;
    f->invert = invert;
    f->opt = sub_->add_flag(flag, help);
    CLI::Option *o = f->opt;
    fwd_.push_back(std::move(f));
    return o;
  }

  int Fill(cp_options *opts) const {
    for (const auto &f : fwd_) {
      if (f->opt->count() == 0) continue;
      const std::string v = f->is_flag ? (f->opt->as<bool>() != f->invert ? "true" : "false") : f->value;
      if (cp_options_set(opts, f->key.c_str(), v.c_str()) != CP_OK) return 1;
    }
    return 0;
  }

 private:
  CLI::App *sub_;
  std::vector<std::unique_ptr<Forward>> fwd_;
};

void LogToStderr(const char *line, void *) { std::fprintf(stderr, "%s\n", line); }

int Report(cp_status s) {
  std::fprintf(stderr, "error (%s): %s\n", cp_status_name(s), cp_last_error());
  return static_cast<int>(s);
}

using Runner = cp_status (*)(const cp_options *, cp_text **);

const std::vector<std::string> kModes = {"content", "references", "ref-no-self", "ref-cont",
                                         "ref_no_self", "ref_cont"};

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"citeprint: authorship attribution from content and references"};
  app.set_config("--config", "", "key = value file; command-line flags take precedence");
  app.require_subcommand(1);
  bool quiet = false;
  bool as_json = false;
  app.add_flag("-q,--quiet", quiet, "suppress progress lines on stderr");
  app.add_flag("--json", as_json, "print the JSON summary instead of a short line");
  app.set_version_flag("--version", std::string(cp_version()));

  Command synth(&app, "synth", "write a synthetic corpus with known authors");
  synth.Opt("--out", "out", "output directory")->required();
  synth.Opt("--authors", "authors", "candidate authors (default 7)")->check(CLI::PositiveNumber);
  synth.Opt("--papers-per-author", "papers_per_author", "papers per candidate (default 100)")
      ->check(CLI::PositiveNumber);
  synth.Opt("--ambiguous", "ambiguous", "names shared by two personas (default 1)")
      ->check(CLI::NonNegativeNumber);
  synth.Opt("--seed", "seed", "generator seed")->check(CLI::NonNegativeNumber);
  synth.Opt("--self-cite-rate", "self_cite_rate", "share of references citing the author");
  synth.Opt("--community-rate", "community_rate", "share of references from the community");
  synth.Opt("--topic-rate", "topic_rate", "share of body words from the author topic");
  synth.Opt("--topic-overlap", "topic_overlap", "topic words shared between authors");

  Command build(&app, "build", "segment, parse and split a corpus into a dataset");
  build.Opt("--corpus", "corpus", "corpus JSONL file")->required();
  build.Opt("--out", "out", "dataset directory")->required();
  build.Opt("--min-papers", "min_papers", "minimum papers per author (P)")
      ->required()
      ->check(CLI::PositiveNumber);
  build.Opt("--trim", "trim", "cap on papers per author")->check(CLI::Range(2, 1 << 30));
  build.Flag("--chunked", "chunked", "keep every content chunk (-C variant)");
  build.Opt("--seed", "seed", "split seed")->check(CLI::NonNegativeNumber);
  build.Opt("--test-ratio", "test_ratio", "test share per author (default 0.2)");
  build.Opt("--chunk-words", "chunk_words", "words per chunk (default 512)")
      ->check(CLI::PositiveNumber);
  build.Opt("--min-avg-word-len", "min_avg_word_len", "chunk filter threshold (default 4.22)");
  build.Opt("--vocab-min-count", "vocab_min_count", "surname vocabulary threshold (default 50)")
      ->check(CLI::NonNegativeNumber);
  build.Opt("--encoder", "encoder", "native or sidecar")->check(CLI::IsMember({"native", "sidecar"}));
  build.Opt("--encoder-dim", "encoder_dim", "native encoder dimension (default 256)")
      ->check(CLI::PositiveNumber);
  build.Opt("--sidecar-endpoint", "sidecar_endpoint", "tcp://host:port or unix:/path of the embedding service");
  build.Flag("--no-disambiguate", "disambiguate", "keep names DBSCAN finds ambiguous", true);
  build.Opt("--eps", "eps", "DBSCAN radius");
  build.Opt("--min-pts", "min_pts", "DBSCAN core size")->check(CLI::PositiveNumber);
  build.Opt("--metric", "metric", "euclidean or cosine")
      ->check(CLI::IsMember({"euclidean", "cosine"}));
  build.Opt("--workers", "workers", "parallel workers (default 1)")->check(CLI::PositiveNumber);

  Command train(&app, "train", "train a fusion classifier on a dataset");
  train.Opt("--dataset", "dataset", "dataset directory")->required();
  train.Opt("--checkpoint", "checkpoint", "checkpoint file to write")->required();
  train.Opt("--mode", "mode", "content, references, ref-no-self or ref-cont")
      ->check(CLI::IsMember(kModes));
  train.Opt("--lr", "lr", "learning rate (default per mode)");
  train.Opt("--epochs", "epochs", "epochs (default 10)")->check(CLI::PositiveNumber);
  train.Opt("--seed", "seed", "initialization and shuffle seed")->check(CLI::NonNegativeNumber);
  train.Opt("--batch-size", "batch_size", "minibatch size (default 32)")->check(CLI::PositiveNumber);
  train.Opt("--hidden", "hidden", "head hidden width (default 512)")->check(CLI::PositiveNumber);
  train.Flag("--projection", "projection", "add the affine text adapter");
  train.Flag("--l1-normalize", "l1_normalize", "scale histograms to sum 1");
  train.Flag("--resume", "resume", "continue from an existing checkpoint");
  train.Opt("--sidecar-endpoint", "sidecar_endpoint", "tcp://host:port or unix:/path of the embedding service");

  Command eval(&app, "eval", "evaluate a checkpoint on the dataset test split");
  eval.Opt("--checkpoint", "checkpoint", "checkpoint file")->required();
  eval.Opt("--dataset", "dataset", "dataset directory")->required();
  eval.Opt("--out", "out", "report directory (default <checkpoint>.report)");
  eval.Opt("--ratio", "ratio", "author-count threshold ratio (default 0.1)");
  eval.Opt("--top-k", "top_k", "k of metric 4 (default 5)")->check(CLI::PositiveNumber);
  eval.Opt("--chunks", "chunks", "dataset, all or first")
      ->check(CLI::IsMember({"dataset", "all", "first"}));
  eval.Opt("--sidecar-endpoint", "sidecar_endpoint", "tcp://host:port or unix:/path of the embedding service");

  std::string p_ckpt, p_manuscript, p_endpoint;
  int p_top_k = 5;
  double p_ratio = 0.1;
  CLI::App *predict = app.add_subcommand("predict", "rank candidate authors of one manuscript");
  predict->add_option("--checkpoint", p_ckpt, "checkpoint file")->required();
  predict->add_option("--manuscript", p_manuscript, "plain-text manuscript")->required();
  predict->add_option("--top-k", p_top_k, "rows to print")->check(CLI::PositiveNumber);
  predict->add_option("--ratio", p_ratio, "author-count threshold ratio");
  predict->add_option("--sidecar-endpoint", p_endpoint, "tcp://host:port or unix:/path of the embedding service");

  Command tune(&app, "tune-dbscan", "pick DBSCAN parameters on the calibration authors");
  tune.Opt("--seed", "seed", "calibration seed")->check(CLI::NonNegativeNumber);
  tune.Opt("--abstracts", "abstracts", "abstracts per author (default 40)")
      ->check(CLI::Range(2, 100000));
  tune.Opt("--metric", "metric", "euclidean or cosine")
      ->check(CLI::IsMember({"euclidean", "cosine"}));
  tune.Opt("--encoder", "encoder", "native or sidecar")->check(CLI::IsMember({"native", "sidecar"}));
  tune.Opt("--encoder-dim", "encoder_dim", "native encoder dimension")->check(CLI::PositiveNumber);
  tune.Opt("--sidecar-endpoint", "sidecar_endpoint", "tcp://host:port or unix:/path of the embedding service");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e);
    return code == 0 ? 0 : CP_ERR_USAGE;
  }

  if (predict->parsed()) {
    cp_model *model = nullptr;
    cp_status s = cp_model_open(p_ckpt.c_str(), p_endpoint.empty() ? nullptr : p_endpoint.c_str(),
                                &model);
    if (s != CP_OK) return Report(s);
    cp_prediction *pred = nullptr;
    s = cp_model_predict_file(model, p_manuscript.c_str(), p_top_k, p_ratio, &pred);
    cp_model_close(model);
    if (s != CP_OK) return Report(s);
    if (as_json) {
      nlohmann::json j;
      j["estimated_authors"] = cp_prediction_estimated_authors(pred);
      j["chunks_used"] = cp_prediction_chunks_used(pred);
      j["ranked"] = nlohmann::json::array();
      for (size_t i = 0; i < cp_prediction_count(pred); ++i) {
        j["ranked"].push_back({{"name", cp_prediction_name(pred, i)},
                               {"probability", cp_prediction_probability(pred, i)}});
      }
      std::cout << j.dump(2) << "\n";
    } else {
      for (size_t i = 0; i < cp_prediction_count(pred); ++i) {
        std::printf("%zu\t%.6f\t%s\n", i + 1, cp_prediction_probability(pred, i),
                    cp_prediction_name(pred, i));
      }
      std::printf("estimated authors: %d\n", cp_prediction_estimated_authors(pred));
    }
    cp_prediction_destroy(pred);
    return 0;
  }

  const Command *cmd = nullptr;
  Runner run = nullptr;
  if (synth.app()->parsed()) {
    cmd = &synth;
    run = cp_run_synth;
  } else if (build.app()->parsed()) {
    cmd = &build;
    run = cp_run_build;
  } else if (train.app()->parsed()) {
    cmd = &train;
    run = cp_run_train;
  } else if (eval.app()->parsed()) {
    cmd = &eval;
    run = cp_run_eval;
  } else {
    cmd = &tune;
    run = cp_run_tune_dbscan;
  }

  cp_options *opts = nullptr;
  if (cp_options_create(&opts) != CP_OK) return Report(CP_ERR_INTERNAL);
  if (cmd->Fill(opts) != 0) {
    cp_options_destroy(opts);
    return Report(CP_ERR_USAGE);
  }
  if (!quiet) cp_options_set_log(opts, LogToStderr, nullptr);
  cp_text *summary = nullptr;
  cp_status s = run(opts, &summary);
  cp_options_destroy(opts);
  if (s != CP_OK) return Report(s);

  auto j = nlohmann::json::parse(cp_text_data(summary));
  cp_text_destroy(summary);
  if (as_json) {
    std::cout << j.dump(2) << "\n";
  } else if (eval.app()->parsed()) {
    std::cout << j.at("report_text").get<std::string>();
    std::cout << "report written to " << j.at("out_dir").get<std::string>() << "\n";
  } else if (build.app()->parsed()) {
    std::printf("%s: %d authors, %d train, %d test, vocabulary %d, %d dropped -> %s\n",
                j.at("name").get<std::string>().c_str(), j.at("labels").get<int>(),
                j.at("train").get<int>(), j.at("test").get<int>(), j.at("vocab_size").get<int>(),
                j.at("dropped").get<int>(), j.at("dir").get<std::string>().c_str());
  } else if (train.app()->parsed()) {
    std::printf("%s: mode %s, lr %g, %d epochs, %d examples, final loss %.6f\n",
                j.at("checkpoint").get<std::string>().c_str(),
                j.at("mode").get<std::string>().c_str(), j.at("learning_rate").get<double>(),
                j.at("epochs").get<int>(), j.at("examples").get<int>(),
                j.at("epoch_loss").empty() ? 0.0 : j.at("epoch_loss").back().get<double>());
  } else if (synth.app()->parsed()) {
    std::printf("%zu manuscripts -> %s\n", j.at("manuscripts").get<size_t>(),
                j.at("corpus").get<std::string>().c_str());
  } else {
    std::printf("eps %.3f min_pts %d metric %s: %d/%d calibration authors correct\n",
                j.at("eps").get<double>(), j.at("min_pts").get<int>(),
                j.at("metric").get<std::string>().c_str(), j.at("correct").get<int>(),
                j.at("total").get<int>());
  }
  return 0;
}
