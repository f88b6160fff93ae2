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

#include "citeprint/citeprint.h"

#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <map>
#include <memory>
#include <new>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "citeprint/error.hpp"
#include "citeprint/pipeline.hpp"
#include "citeprint/synth.hpp"
#include "citeprint/text.hpp"
#include "json.hpp"

struct cp_options {
  std::map<std::string, std::string> values;
  cp_log_fn log = nullptr;
  void *log_user = nullptr;
};

struct cp_text {
  std::string data;
};

struct cp_model {
  citeprint::pipeline::Predictor predictor;
};

struct cp_prediction {
  citeprint::pipeline::PredictResult result;
};

namespace {

using citeprint::Error;
using citeprint::ErrorKind;
using citeprint::UsageError;
using nlohmann::json;
namespace pl = citeprint::pipeline;

thread_local std::string g_last_error;

cp_status Fail(cp_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

// Runs `fn`, translating exceptions into a status and the thread's last error.
template <typename Fn>
cp_status Guard(Fn &&fn) {
  g_last_error.clear();
  try {
    fn();
    return CP_OK;
  } catch (const Error &e) {
    return Fail(static_cast<cp_status>(e.kind()), e.what());
  } catch (const std::bad_alloc &) {
    return Fail(CP_ERR_INTERNAL, "out of memory");
  } catch (const std::exception &e) {
    return Fail(CP_ERR_INTERNAL, e.what());
  }
}

// Typed access to an option bag. Every key must be consumed by exactly one
// subcommand; leftovers are reported as usage errors.
class Options {
 public:
  Options(const cp_options *o, std::string command) : command_(std::move(command)) {
    if (o == nullptr) throw UsageError("options: null handle");
    values_ = o->values;
    if (o->log != nullptr) {
      cp_log_fn fn = o->log;
      void *user = o->log_user;
      log_ = [fn, user](const std::string &line) { fn(line.c_str(), user); };
    }
  }

  const pl::Logger &log() const { return log_; }

  std::string Str(const std::string &key, const std::string &def = "") {
    auto it = values_.find(key);
    if (it == values_.end()) return def;
    std::string v = std::move(it->second);
    values_.erase(it);
    return v;
  }

  std::string Required(const std::string &key) {
    if (!values_.count(key)) throw UsageError(key + ": required for " + command_);
    std::string v = Str(key);
    if (v.empty()) throw UsageError(key + ": must not be empty");
    return v;
  }

  bool Has(const std::string &key) const { return values_.count(key) != 0; }

  int64_t Int(const std::string &key, int64_t def) {
    if (!Has(key)) return def;
    const std::string v = Str(key);
    int64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) {
      throw UsageError(key + ": expected an integer, got '" + v + "'");
    }
    return out;
  }

  uint64_t Seed(const std::string &key, uint64_t def) {
    if (!Has(key)) return def;
    const std::string v = Str(key);
    uint64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) {
      throw UsageError(key + ": expected a non-negative integer, got '" + v + "'");
    }
    return out;
  }

  double Real(const std::string &key, double def) {
    if (!Has(key)) return def;
    const std::string v = Str(key);
    char *end = nullptr;
    errno = 0;
    double out = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE) {
      throw UsageError(key + ": expected a number, got '" + v + "'");
    }
    return out;
  }

  bool Bool(const std::string &key, bool def) {
    if (!Has(key)) return def;
    const std::string v = Str(key);
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw UsageError(key + ": expected true or false, got '" + v + "'");
  }

  // Call after all keys for the command have been read.
  void Finish() const {
    if (values_.empty()) return;
    throw UsageError(values_.begin()->first + ": unknown option for " + command_);
  }

 private:
  std::string command_;
  std::map<std::string, std::string> values_;
  pl::Logger log_;
};

citeprint::EncoderSpec ReadEncoder(Options &o) {
  citeprint::EncoderSpec spec;
  const std::string kind = o.Str("encoder", "native");
  if (kind == "native") {
    spec.kind = citeprint::EncoderKind::kNative;
  } else if (kind == "sidecar") {
    spec.kind = citeprint::EncoderKind::kSidecar;
  } else {
    throw UsageError("encoder: expected native or sidecar, got '" + kind + "'");
  }
  spec.native.dim = static_cast<int>(o.Int("encoder_dim", spec.native.dim));
  if (spec.native.dim < 1) throw UsageError("encoder_dim: must be >= 1");
  spec.sidecar_endpoint = o.Str("sidecar_endpoint");
  spec.sidecar_timeout_ms =
      static_cast<int>(o.Int("sidecar_timeout_ms", spec.sidecar_timeout_ms));
  if (spec.kind == citeprint::EncoderKind::kSidecar && spec.sidecar_endpoint.empty()) {
    throw UsageError("sidecar_endpoint: required with encoder=sidecar");
  }
  return spec;
}

citeprint::disambig::Metric ReadMetric(Options &o) {
  const std::string m = o.Str("metric", "euclidean");
  if (m == "euclidean") return citeprint::disambig::Metric::kEuclidean;
  if (m == "cosine") return citeprint::disambig::Metric::kCosine;
  throw UsageError("metric: expected euclidean or cosine, got '" + m + "'");
}

cp_status Emit(const json &j, cp_text **summary) {
  *summary = new cp_text{j.dump(2)};
  return CP_OK;
}

template <typename Fn>
cp_status RunCommand(cp_text **summary, Fn &&fn) {
  if (summary == nullptr) return Fail(CP_ERR_USAGE, "summary: null output pointer");
  *summary = nullptr;
  json out;
  cp_status s = Guard([&] { out = fn(); });
  if (s != CP_OK) return s;
  return Guard([&] { Emit(out, summary); });
}

}  // namespace

extern "C" {

const char *cp_version(void) { return "0.1.0"; }

const char *cp_last_error(void) { return g_last_error.c_str(); }

const char *cp_status_name(cp_status status) {
  switch (status) {
    case CP_OK: return "ok";
    case CP_ERR_USAGE: return "usage";
    case CP_ERR_DATA: return "data";
    case CP_ERR_NUMERIC: return "numeric";
    case CP_ERR_IO: return "io";
    case CP_ERR_SIDECAR_TRANSPORT: return "sidecar-transport";
    case CP_ERR_SIDECAR_ENCODER: return "sidecar-encoder";
    case CP_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

cp_status cp_options_create(cp_options **out) {
  if (out == nullptr) return Fail(CP_ERR_USAGE, "options: null output pointer");
  return Guard([&] { *out = new cp_options; });
}

void cp_options_destroy(cp_options *options) { delete options; }

cp_status cp_options_set(cp_options *options, const char *key, const char *value) {
  if (options == nullptr || key == nullptr || value == nullptr) {
    return Fail(CP_ERR_USAGE, "options: null argument");
  }
  if (*key == '\0') return Fail(CP_ERR_USAGE, "options: empty key");
  return Guard([&] { options->values[key] = value; });
}

cp_status cp_options_set_log(cp_options *options, cp_log_fn fn, void *user) {
  if (options == nullptr) return Fail(CP_ERR_USAGE, "options: null handle");
  options->log = fn;
  options->log_user = user;
  return CP_OK;
}

const char *cp_text_data(const cp_text *text) { return text ? text->data.c_str() : ""; }

size_t cp_text_size(const cp_text *text) { return text ? text->data.size() : 0; }

void cp_text_destroy(cp_text *text) { delete text; }

cp_status cp_run_synth(const cp_options *options, cp_text **summary) {
  return RunCommand(summary, [&] {
    Options o(options, "synth");
    const std::string out = o.Required("out");
    citeprint::synth::SynthOptions so;
    so.n_authors = static_cast<int>(o.Int("authors", so.n_authors));
    so.papers_per_author = static_cast<int>(o.Int("papers_per_author", so.papers_per_author));
    so.n_ambiguous = static_cast<int>(o.Int("ambiguous", so.n_ambiguous));
    so.seed = o.Seed("seed", so.seed);
    so.topic_rate = o.Real("topic_rate", so.topic_rate);
    so.self_cite_rate = o.Real("self_cite_rate", so.self_cite_rate);
    so.community_rate = o.Real("community_rate", so.community_rate);
    so.topic_overlap = o.Real("topic_overlap", so.topic_overlap);
    o.Finish();
    if (so.n_authors < 1) throw UsageError("authors: must be >= 1");
    if (so.papers_per_author < 1) throw UsageError("papers_per_author: must be >= 1");
    if (so.n_ambiguous < 0) throw UsageError("ambiguous: must be >= 0");
    for (double r : {so.topic_rate, so.self_cite_rate, so.community_rate, so.topic_overlap}) {
      if (!(r >= 0 && r <= 1)) throw UsageError("rates: must lie in [0,1]");
    }
    auto corpus = citeprint::synth::Generate(so);
    citeprint::synth::WriteCorpus(corpus, out);
    if (o.log()) {
      o.log()("wrote " + std::to_string(corpus.papers.size()) + " manuscripts to " + out);
    }
    return json{{"dir", out},
                {"corpus", (std::filesystem::path(out) / "corpus.jsonl").string()},
                {"manuscripts", corpus.papers.size()},
                {"candidates", corpus.candidate_names},
                {"ambiguous", corpus.ambiguous_names}};
  });
}

cp_status cp_run_build(const cp_options *options, cp_text **summary) {
  return RunCommand(summary, [&] {
    Options o(options, "build");
    pl::BuildOptions b;
    b.corpus_path = o.Required("corpus");
    b.out_dir = o.Required("out");
    b.min_papers = static_cast<int>(o.Int("min_papers", 0));
    if (o.Has("trim")) b.trim = static_cast<int>(o.Int("trim", 0));
    b.chunked = o.Bool("chunked", false);
    b.seed = o.Seed("seed", 0);
    b.test_ratio = o.Real("test_ratio", b.test_ratio);
    b.chunk_words = static_cast<int>(o.Int("chunk_words", b.chunk_words));
    b.min_avg_word_len = o.Real("min_avg_word_len", b.min_avg_word_len);
    b.vocab_min_count = static_cast<int>(o.Int("vocab_min_count", b.vocab_min_count));
    b.encoder = ReadEncoder(o);
    b.disambiguate = o.Bool("disambiguate", true);
    b.dbscan.eps = o.Real("eps", b.dbscan.eps);
    b.dbscan.min_pts = static_cast<int>(o.Int("min_pts", b.dbscan.min_pts));
    b.dbscan.metric = ReadMetric(o);
    b.workers = static_cast<int>(o.Int("workers", 1));
    o.Finish();
    auto s = pl::Build(b, o.log());
    return json{{"dir", s.dir},         {"name", s.name},
                {"labels", s.n_labels}, {"train", s.n_train},
                {"test", s.n_test},     {"vocab_size", s.vocab_size},
                {"dropped", s.n_dropped}};
  });
}

cp_status cp_run_train(const cp_options *options, cp_text **summary) {
  return RunCommand(summary, [&] {
    Options o(options, "train");
    pl::TrainOptions t;
    t.dataset_dir = o.Required("dataset");
    t.checkpoint_path = o.Required("checkpoint");
    t.mode = citeprint::model::ParseMode(o.Str("mode", "ref_cont"));
    if (o.Has("lr")) t.learning_rate = o.Real("lr", 0);
    if (o.Has("epochs")) t.epochs = static_cast<int>(o.Int("epochs", 0));
    t.seed = o.Seed("seed", 0);
    t.batch_size = static_cast<int>(o.Int("batch_size", t.batch_size));
    t.hidden = static_cast<int>(o.Int("hidden", t.hidden));
    t.use_projection = o.Bool("projection", false);
    t.l1_normalize = o.Bool("l1_normalize", false);
    t.resume = o.Bool("resume", false);
    t.sidecar_endpoint = o.Str("sidecar_endpoint");
    o.Finish();
    auto s = pl::Train(t, o.log());
    return json{{"checkpoint", s.checkpoint_path},
                {"mode", citeprint::model::ModeName(t.mode)},
                {"learning_rate", s.learning_rate},
                {"epochs", s.epochs},
                {"epochs_run", s.epochs_run},
                {"examples", s.examples},
                {"epoch_loss", s.epoch_loss}};
  });
}

cp_status cp_run_eval(const cp_options *options, cp_text **summary) {
  return RunCommand(summary, [&] {
    Options o(options, "eval");
    pl::EvalOptions e;
    e.checkpoint_path = o.Required("checkpoint");
    e.dataset_dir = o.Required("dataset");
    e.out_dir = o.Str("out");
    e.ratio = o.Real("ratio", e.ratio);
    e.top_k = static_cast<int>(o.Int("top_k", e.top_k));
    const std::string chunks = o.Str("chunks", "dataset");
    if (chunks == "dataset") {
      e.chunks = pl::ChunkSelection::kDataset;
    } else if (chunks == "all") {
      e.chunks = pl::ChunkSelection::kAll;
    } else if (chunks == "first") {
      e.chunks = pl::ChunkSelection::kFirst;
    } else {
      throw UsageError("chunks: expected dataset, all or first, got '" + chunks + "'");
    }
    e.sidecar_endpoint = o.Str("sidecar_endpoint");
    o.Finish();
    auto s = pl::Eval(e, o.log());
    json out = s.report_json;
    out["out_dir"] = s.out_dir;
    out["report_text"] = pl::RenderReport(s.report, out.value("title", ""));
    return out;
  });
}

cp_status cp_run_tune_dbscan(const cp_options *options, cp_text **summary) {
  return RunCommand(summary, [&] {
    Options o(options, "tune-dbscan");
    pl::TuneOptions t;
    t.seed = o.Seed("seed", t.seed);
    t.abstracts_each = static_cast<int>(o.Int("abstracts", t.abstracts_each));
    t.encoder = ReadEncoder(o);
    t.metric = ReadMetric(o);
    o.Finish();
    auto r = pl::TuneDbscan(t, o.log());
    return json{{"eps", r.params.eps},
                {"min_pts", r.params.min_pts},
                {"metric", t.metric == citeprint::disambig::Metric::kCosine ? "cosine"
                                                                            : "euclidean"},
                {"correct", r.correct},
                {"total", r.total}};
  });
}

cp_status cp_model_open(const char *checkpoint_path, const char *sidecar_endpoint,
                        cp_model **out) {
  if (out == nullptr) return Fail(CP_ERR_USAGE, "model: null output pointer");
  *out = nullptr;
  if (checkpoint_path == nullptr) return Fail(CP_ERR_USAGE, "checkpoint: null path");
  return Guard([&] {
    *out = new cp_model{
        pl::Predictor(checkpoint_path, sidecar_endpoint ? sidecar_endpoint : "")};
  });
}

void cp_model_close(cp_model *model) { delete model; }

size_t cp_model_label_count(const cp_model *model) {
  return model ? model->predictor.labels().size() : 0;
}

const char *cp_model_label(const cp_model *model, size_t index) {
  if (model == nullptr || index >= model->predictor.labels().size()) return nullptr;
  return model->predictor.labels()[index].c_str();
}

cp_status cp_model_predict_text(cp_model *model, const char *id, const char *text, int top_k,
                                double ratio, cp_prediction **out) {
  if (out == nullptr) return Fail(CP_ERR_USAGE, "prediction: null output pointer");
  *out = nullptr;
  if (model == nullptr || text == nullptr) return Fail(CP_ERR_USAGE, "predict: null argument");
  return Guard([&] {
    citeprint::Manuscript m;
    m.id = id ? id : "manuscript";
    m.raw_text = text;
    *out = new cp_prediction{model->predictor.Predict(m, top_k, ratio)};
  });
}

cp_status cp_model_predict_file(cp_model *model, const char *manuscript_path, int top_k,
                                double ratio, cp_prediction **out) {
  if (out == nullptr) return Fail(CP_ERR_USAGE, "prediction: null output pointer");
  *out = nullptr;
  if (model == nullptr || manuscript_path == nullptr) {
    return Fail(CP_ERR_USAGE, "predict: null argument");
  }
  return Guard([&] {
    citeprint::Manuscript m;
    m.id = std::filesystem::path(manuscript_path).filename().string();
    m.raw_text = citeprint::ReadFile(manuscript_path);
    *out = new cp_prediction{model->predictor.Predict(m, top_k, ratio)};
  });
}

size_t cp_prediction_count(const cp_prediction *p) { return p ? p->result.ranked.size() : 0; }

const char *cp_prediction_name(const cp_prediction *p, size_t rank) {
  if (p == nullptr || rank >= p->result.ranked.size()) return nullptr;
  return p->result.ranked[rank].name.c_str();
}

double cp_prediction_probability(const cp_prediction *p, size_t rank) {
  if (p == nullptr || rank >= p->result.ranked.size()) return 0.0;
  return p->result.ranked[rank].probability;
}

int cp_prediction_estimated_authors(const cp_prediction *p) {
  return p ? p->result.estimated_authors : 0;
}

int cp_prediction_chunks_used(const cp_prediction *p) { return p ? p->result.chunks_used : 0; }

void cp_prediction_destroy(cp_prediction *p) { delete p; }

}  // extern "C"
