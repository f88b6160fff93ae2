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

#include "citeprint/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "citeprint/error.hpp"
#include "citeprint/features.hpp"
#include "citeprint/preprocess.hpp"
#include "citeprint/refparse.hpp"
#include "citeprint/storage.hpp"
#include "citeprint/synth.hpp"
#include "citeprint/text.hpp"

namespace citeprint::pipeline {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using EmbeddingTable = std::map<std::pair<std::string, int>, Eigen::VectorXd>;

void Log(const Logger &log, const std::string &message) {
  if (log) log(message);
}

template <typename Fn>
void ParallelFor(size_t n, int workers, Fn fn) {
  if (workers <= 1 || n < 2) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::thread> pool;
  const size_t n_threads = std::min(static_cast<size_t>(workers), n);
  for (size_t t = 0; t < n_threads; ++t) {
    pool.emplace_back([&] {
      for (size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto &t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::string Hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string Percent(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * x);
  return buf;
}

std::string Fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

std::string CsvField(const std::string &s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void WriteAtomically(const fs::path &path, const std::string &data) {
  fs::path tmp = path;
  tmp += ".tmp";
  WriteFile(tmp.string(), data);
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot replace " + path.string() + ": " + ec.message());
}

const char *MetricName(disambig::Metric m) {
  return m == disambig::Metric::kCosine ? "cosine" : "euclidean";
}

std::vector<preprocess::ContentChunk> SelectChunks(const ParsedPaper &paper, bool all,
                                                   double min_avg_word_len) {
  if (all) return preprocess::FilterChunks(paper.chunks, min_avg_word_len);
  if (paper.chunks.empty()) return {};
  return {preprocess::FirstChunk(paper.chunks)};
}

Eigen::VectorXd ToVector(const std::vector<double> &v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::VectorXd HistogramVector(const ParsedPaper &paper, const features::CitationVocab &vocab) {
  auto h = features::Histogram(paper, vocab);
  Eigen::VectorXd v(static_cast<Eigen::Index>(h.counts.size()));
  for (size_t i = 0; i < h.counts.size(); ++i) v(static_cast<Eigen::Index>(i)) = h.counts[i];
  return v;
}

ParsedPaper WithoutSelfCitations(const ParsedPaper &paper, const std::vector<int> &authors,
                                 const std::vector<AuthorLabel> &labels) {
  ParsedPaper out = paper;
  for (int a : authors) out = features::StripSelfCitations(out, labels[a]);
  return out;
}

struct ChunkText {
  std::string paper_id;
  int chunk = 0;
  std::string text;
};

// Embeds every requested chunk, reusing and extending the dataset's cache.
EmbeddingTable Embed(const std::string &dataset_dir, TextEncoder &encoder,
                     const std::vector<ChunkText> &chunks, const Logger &log) {
  const fs::path cache_path = fs::path(dataset_dir) / storage::CacheFileName(encoder.id());
  storage::EmbeddingCache cache(encoder.id(), encoder.dim());
  if (fs::exists(cache_path)) {
    cache = storage::EmbeddingCache::Parse(ReadFile(cache_path.string()));
    if (cache.encoder_id() != encoder.id() || cache.dim() != encoder.dim()) {
      throw DataError("embedding cache " + cache_path.string() + " belongs to another encoder");
    }
  }
  EmbeddingTable table;
  size_t computed = 0;
  for (const auto &c : chunks) {
    const std::vector<double> *row = cache.Find(c.paper_id, c.chunk);
    if (!row) {
      cache.Put(c.paper_id, c.chunk, encoder.Encode(c.text));
      row = cache.Find(c.paper_id, c.chunk);
      ++computed;
    }
    table.emplace(std::make_pair(c.paper_id, c.chunk), ToVector(*row));
  }
  if (computed > 0) {
    WriteAtomically(cache_path, cache.Serialize());
    Log(log, "embedded " + std::to_string(computed) + " chunks with " + encoder.id());
  }
  return table;
}

std::vector<ChunkText> ChunkTexts(const std::string &paper_id,
                                  const std::vector<preprocess::ContentChunk> &chunks) {
  std::vector<ChunkText> out;
  for (const auto &c : chunks) out.push_back({paper_id, c.index, Join(c.words, " ")});
  return out;
}

void RemoveDatasetFiles(const fs::path &dir) {
  if (!fs::exists(dir)) return;
  std::error_code ec;
  for (const char *name : {"manifest.json", "train.jsonl", "test.jsonl", "vocab.txt"}) {
    fs::remove(dir / name, ec);
  }
  fs::remove_all(dir / "papers", ec);
  for (const auto &entry : fs::directory_iterator(dir)) {
    std::string name = entry.path().filename().string();
    if (StartsWith(name, "embeddings.") && EndsWith(name, ".bin")) fs::remove(entry.path(), ec);
  }
}

json ModelConfigJson(const model::ModelConfig &c) {
  return {{"d_text", c.d_text},
          {"n_hist", c.n_hist},
          {"n_labels", c.n_labels},
          {"hidden", c.hidden},
          {"use_content", c.use_content},
          {"use_references", c.use_references},
          {"use_projection", c.use_projection},
          {"l1_normalize", c.l1_normalize}};
}

json TrainConfigJson(const model::TrainConfig &c) {
  return {{"optimizer", "adam"},
          {"loss", "softmax_cross_entropy"},
          {"learning_rate", c.learning_rate},
          {"batch_size", c.batch_size},
          {"seed", c.seed},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"adam_eps", c.adam_eps},
          {"init", "uniform_fan_in"}};
}

struct LoadedCheckpoint {
  storage::Checkpoint ckpt;
  model::Mode mode;
  std::vector<std::string> labels;
  features::CitationVocab vocab;
  bool chunked = false;
  int chunk_words = 512;
  double min_avg_word_len = 4.22;
};

LoadedCheckpoint LoadCheckpoint(const std::string &path) {
  if (!fs::exists(path)) throw IoError("checkpoint not found: " + path);
  LoadedCheckpoint out;
  out.ckpt = storage::ParseCheckpoint(ReadFile(path));
  const json &h = out.ckpt.header;
  try {
    out.mode = model::ParseMode(h.at("mode").get<std::string>());
    out.labels = h.at("labels").get<std::vector<std::string>>();
    out.vocab.min_count = h.at("vocab").at("min_count").get<int>();
    out.vocab.surnames = h.at("vocab").at("surnames").get<std::vector<std::string>>();
    out.vocab.counts = h.at("vocab").at("counts").get<std::vector<int64_t>>();
    for (size_t i = 0; i < out.vocab.surnames.size(); ++i) {
      out.vocab.index[out.vocab.surnames[i]] = static_cast<int>(i);
    }
    out.chunked = h.at("chunked").get<bool>();
    out.chunk_words = h.at("chunk_words").get<int>();
    out.min_avg_word_len = h.at("min_avg_word_len").get<double>();
  } catch (const json::exception &e) {
    throw DataError("checkpoint header is incomplete: " + std::string(e.what()));
  }
  if (static_cast<int>(out.labels.size()) != out.ckpt.model.config.n_labels ||
      out.vocab.size() != out.ckpt.model.config.n_hist) {
    throw DataError("checkpoint header disagrees with its tensors");
  }
  return out;
}

std::unique_ptr<TextEncoder> CheckpointEncoder(const LoadedCheckpoint &lc,
                                               const std::string &endpoint) {
  const json &ej = lc.ckpt.header.at("encoder");
  auto encoder = MakeEncoder(EncoderSpecFromJson(ej, endpoint));
  const std::string expected = ej.at("id").get<std::string>();
  if (encoder->id() != expected) {
    throw DataError("encoder " + encoder->id() + " does not match checkpoint encoder " + expected);
  }
  if (encoder->dim() != lc.ckpt.model.config.d_text) {
    throw DataError("encoder dimension does not match the checkpoint");
  }
  return encoder;
}

evaluate::PaperPrediction PredictParsed(const model::FusionModel &m, model::Mode mode,
                                        const std::string &id,
                                        const std::vector<preprocess::ContentChunk> &chunks,
                                        const EmbeddingTable &emb,
                                        const std::optional<Eigen::VectorXd> &hist) {
  std::vector<Eigen::VectorXd> logits;
  if (model::UsesContent(mode)) {
    for (const auto &c : chunks) logits.push_back(model::Forward(m, emb.at({id, c.index}), hist));
  } else {
    logits.push_back(model::Forward(m, std::nullopt, hist));
  }
  return evaluate::FromChunkLogits(id, logits);
}

}  // namespace

nlohmann::json EncoderSpecToJson(const EncoderSpec &spec, const std::string &encoder_id) {
  if (spec.kind == EncoderKind::kSidecar) {
    return {{"kind", "sidecar"}, {"id", encoder_id}, {"timeout_ms", spec.sidecar_timeout_ms}};
  }
  return {{"kind", "native"},
          {"id", encoder_id},
          {"dim", spec.native.dim},
          {"seed", spec.native.seed},
          {"word_unigrams", spec.native.word_unigrams},
          {"char_trigrams", spec.native.char_trigrams}};
}

EncoderSpec EncoderSpecFromJson(const nlohmann::json &j, const std::string &sidecar_endpoint) {
  EncoderSpec spec;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "sidecar") {
    spec.kind = EncoderKind::kSidecar;
    spec.sidecar_timeout_ms = j.value("timeout_ms", 30000);
    if (sidecar_endpoint.empty()) {
      throw UsageError("these artifacts were produced with the sidecar encoder; pass --sidecar-endpoint");
    }
    spec.sidecar_endpoint = sidecar_endpoint;
  } else if (kind == "native") {
    spec.native.dim = j.at("dim").get<int>();
    spec.native.seed = j.at("seed").get<uint64_t>();
    spec.native.word_unigrams = j.at("word_unigrams").get<bool>();
    spec.native.char_trigrams = j.at("char_trigrams").get<bool>();
  } else {
    throw DataError("unknown encoder kind '" + kind + "'");
  }
  return spec;
}

ParsedPaper ProcessManuscript(const Manuscript &m, int chunk_words, double min_avg_word_len,
                              bool chunked) {
  auto seg = preprocess::Segment(preprocess::CleanLines(m.raw_text));
  ParsedPaper p;
  p.id = m.id;
  p.chunks = preprocess::Chunk(seg.content, static_cast<size_t>(chunk_words));
  if (chunked) {
    if (preprocess::FilterChunks(p.chunks, min_avg_word_len).empty()) {
      throw FailFast("chunk", "no chunk reaches the minimum average word length");
    }
  } else {
    preprocess::FirstChunk(p.chunks);
  }
  p.references = refparse::ParseBlock(seg.references_block);
  return p;
}

BuildSummary Build(const BuildOptions &o, const Logger &log) {
  if (o.corpus_path.empty()) throw UsageError("corpus: path required");
  if (o.out_dir.empty()) throw UsageError("out: dataset directory required");
  if (o.min_papers < 1) throw UsageError("min-papers: must be >= 1");
  if (o.trim && *o.trim < 2) throw UsageError("trim: must be >= 2");
  if (!(o.test_ratio > 0 && o.test_ratio < 1)) throw UsageError("test-ratio: must be in (0,1)");
  if (o.chunk_words < 1) throw UsageError("chunk-words: must be >= 1");
  if (o.workers < 1) throw UsageError("workers: must be >= 1");
  if (o.vocab_min_count < 0) throw UsageError("vocab-min-count: must be >= 0");

  std::vector<Manuscript> corpus = synth::ReadCorpus(o.corpus_path);
  Log(log, "read " + std::to_string(corpus.size()) + " manuscripts");

  json drops = json::array();
  std::map<std::string, int> stage_drops = {
      {"initials", 0}, {"segment", 0}, {"refparse", 0}, {"chunk", 0}};
  std::vector<std::pair<std::string, json>> drop_rows;

  std::vector<Manuscript> named = ingest::FilterFullNames(corpus);
  {
    std::set<std::string> kept;
    for (const auto &m : named) kept.insert(m.id);
    for (const auto &m : corpus) {
      if (kept.count(m.id)) continue;
      std::string who;
      for (const auto &a : m.authors) {
        if (ingest::HasOnlyInitials(a)) {
          who = a;
          break;
        }
      }
      ++stage_drops["initials"];
      drop_rows.push_back({m.id, {{"id", m.id}, {"stage", "initials"},
                                  {"reason", "author '" + who + "' lacks a full given name"}}});
    }
  }

  std::vector<std::optional<ParsedPaper>> parsed(named.size());
  std::vector<std::optional<FailFast>> failed(named.size());
  ParallelFor(named.size(), o.workers, [&](size_t i) {
    try {
      parsed[i] = ProcessManuscript(named[i], o.chunk_words, o.min_avg_word_len, o.chunked);
    } catch (const FailFast &e) {
      failed[i] = e;
    }
  });
  std::vector<Manuscript> survivors;
  std::map<std::string, ParsedPaper> papers;
  for (size_t i = 0; i < named.size(); ++i) {
    if (failed[i]) {
      ++stage_drops[failed[i]->stage()];
      drop_rows.push_back({named[i].id, {{"id", named[i].id},
                                         {"stage", failed[i]->stage()},
                                         {"reason", failed[i]->reason()}}});
      continue;
    }
    papers.emplace(named[i].id, std::move(*parsed[i]));
    Manuscript m = named[i];
    m.raw_text.clear();
    survivors.push_back(std::move(m));
  }
  std::sort(drop_rows.begin(), drop_rows.end(),
            [](const auto &a, const auto &b) { return a.first < b.first; });
  for (auto &row : drop_rows) drops.push_back(std::move(row.second));
  std::sort(survivors.begin(), survivors.end(),
            [](const Manuscript &a, const Manuscript &b) { return a.id < b.id; });
  Log(log, std::to_string(survivors.size()) + " manuscripts survived preprocessing, " +
               std::to_string(drop_rows.size()) + " dropped");

  std::vector<AuthorLabel> selected = ingest::SelectAuthors(survivors, o.min_papers);
  if (selected.empty()) {
    throw DataError("no authors met threshold (min-papers " + std::to_string(o.min_papers) + ")");
  }

  std::vector<AuthorLabel> labels;
  json verdicts = json::array();
  if (o.disambiguate) {
    auto encoder = MakeEncoder(o.encoder);
    for (const auto &a : selected) {
      std::vector<disambig::Point> points;
      for (const auto &m : survivors) {
        if (m.abstract.empty()) continue;
        if (std::find(m.authors.begin(), m.authors.end(), a.canonical_name) == m.authors.end()) {
          continue;
        }
        points.push_back(encoder->Encode(m.abstract));
      }
      auto v = disambig::Verdict(points, o.dbscan);
      verdicts.push_back({{"name", a.canonical_name},
                          {"kept", v.unique_person},
                          {"abstracts", points.size()},
                          {"n_clusters", v.n_clusters},
                          {"n_noise", v.n_noise}});
      if (v.unique_person) {
        labels.push_back(a);
      } else {
        Log(log, "discarding ambiguous author " + a.canonical_name + " (" +
                     std::to_string(v.n_clusters) + " clusters)");
      }
    }
  } else {
    labels = selected;
  }
  if (labels.empty()) {
    throw DataError("no authors met threshold after disambiguation (min-papers " +
                    std::to_string(o.min_papers) + ")");
  }

  std::map<std::string, int> label_index;
  for (size_t i = 0; i < labels.size(); ++i) label_index[labels[i].canonical_name] = static_cast<int>(i);
  std::vector<ingest::LabeledPaper> labeled;
  int unlabeled = 0;
  for (const auto &m : survivors) {
    std::set<int> idx;
    for (const auto &a : m.authors) {
      auto it = label_index.find(a);
      if (it != label_index.end()) idx.insert(it->second);
    }
    if (idx.empty()) {
      ++unlabeled;
      continue;
    }
    labeled.push_back({m.id, std::vector<int>(idx.begin(), idx.end())});
  }

  ingest::Split split = ingest::SplitDataset(labeled, static_cast<int>(labels.size()),
                                             o.test_ratio, o.seed);
  DatasetBundle bundle;
  bundle.name = ingest::DatasetName(o.min_papers, std::nullopt, o.chunked);
  bundle.labels = labels;
  bundle.train = std::move(split.train);
  bundle.test = std::move(split.test);
  bundle.chunked = o.chunked;
  bundle.seed = o.seed;
  bundle.test_ratio = o.test_ratio;
  for (const auto &lp : labeled) bundle.papers.emplace(lp.id, papers.at(lp.id));
  for (int a : split.drift) bundle.split_drift.push_back(labels[a].canonical_name);
  for (int a : split.train_only) {
    bundle.warnings.push_back("author " + labels[a].canonical_name +
                              " has fewer than two papers; placed entirely in train");
  }
  std::vector<int> counts = ingest::PaperCounts(bundle);
  for (size_t a = 0; a < labels.size(); ++a) bundle.labels[a].paper_count = counts[a];
  if (o.trim) bundle = ingest::TrimDataset(bundle, *o.trim, o.seed);
  for (const auto &v : ingest::CheckInvariants(bundle)) bundle.warnings.push_back(v);

  features::CitationVocab vocab = features::BuildTrainVocab(bundle, o.vocab_min_count);

  json extra;
  extra["min_papers"] = o.min_papers;
  extra["trim"] = o.trim ? json(*o.trim) : json(nullptr);
  extra["chunk_words"] = o.chunk_words;
  extra["min_avg_word_len"] = o.min_avg_word_len;
  const std::string corpus_bytes = ReadFile(o.corpus_path);
  extra["corpus"] = {{"file", fs::path(o.corpus_path).filename().string()},
                     {"fnv1a64", Hex64(Fnv1a64(corpus_bytes))},
                     {"manuscripts", corpus.size()}};
  auto encoder = MakeEncoder(o.encoder);
  extra["encoder"] = EncoderSpecToJson(o.encoder, encoder->id());
  extra["disambiguation"] = {{"enabled", o.disambiguate},
                             {"eps", o.dbscan.eps},
                             {"min_pts", o.dbscan.min_pts},
                             {"metric", MetricName(o.dbscan.metric)},
                             {"verdicts", verdicts}};
  extra["drops"] = drops;
  extra["stage_drops"] = stage_drops;
  extra["unlabeled_papers"] = unlabeled;
  extra["notes"] = {
      "papers of discarded ambiguous authors remain samples for their kept co-authors",
      "authors off their 80/20 quota are listed in split_drift"};

  const fs::path dir(o.out_dir);
  RemoveDatasetFiles(dir);
  storage::WriteBundle(o.out_dir, bundle, vocab, extra);

  BuildSummary s;
  s.dir = o.out_dir;
  s.name = bundle.name;
  s.n_labels = static_cast<int>(bundle.labels.size());
  s.n_train = static_cast<int>(bundle.train.size());
  s.n_test = static_cast<int>(bundle.test.size());
  s.vocab_size = vocab.size();
  s.n_dropped = static_cast<int>(drops.size());
  Log(log, "dataset " + s.name + ": " + std::to_string(s.n_labels) + " authors, " +
               std::to_string(s.n_train) + " train, " + std::to_string(s.n_test) +
               " test, vocabulary " + std::to_string(s.vocab_size));
  return s;
}

TrainSummary Train(const TrainOptions &o, const Logger &log) {
  if (o.dataset_dir.empty()) throw UsageError("dataset: directory required");
  if (o.checkpoint_path.empty()) throw UsageError("out: checkpoint path required");
  if (o.learning_rate && !(*o.learning_rate > 0)) throw UsageError("lr: must be > 0");
  if (o.epochs && *o.epochs < 1) throw UsageError("epochs: must be >= 1");
  if (o.batch_size < 1) throw UsageError("batch-size: must be >= 1");
  if (o.hidden < 1) throw UsageError("hidden: must be >= 1");

  storage::LoadedBundle loaded = storage::ReadBundle(o.dataset_dir);
  const DatasetBundle &b = loaded.bundle;
  const json &manifest = loaded.manifest;
  if (b.train.empty()) throw DataError("dataset " + b.name + " has no training papers");
  const double min_avg = manifest.at("min_avg_word_len").get<double>();

  auto encoder = MakeEncoder(EncoderSpecFromJson(manifest.at("encoder"), o.sidecar_endpoint));
  if (encoder->id() != manifest.at("encoder").at("id").get<std::string>()) {
    throw DataError("encoder " + encoder->id() + " differs from the dataset's encoder");
  }

  model::TrainConfig cfg = model::DefaultTrainConfig(o.mode, b.chunked);
  if (o.learning_rate) cfg.learning_rate = *o.learning_rate;
  if (o.epochs) cfg.epochs = *o.epochs;
  cfg.seed = o.seed;
  cfg.batch_size = o.batch_size;

  model::ModelConfig mc;
  mc.d_text = encoder->dim();
  mc.n_hist = loaded.vocab.size();
  mc.n_labels = static_cast<int>(b.labels.size());
  mc.hidden = o.hidden;
  mc.use_content = model::UsesContent(o.mode);
  mc.use_references = model::UsesReferences(o.mode);
  mc.use_projection = o.use_projection;
  mc.l1_normalize = o.l1_normalize;
  if (mc.use_references && mc.n_hist == 0) {
    throw DataError("citation vocabulary is empty (min_count " +
                    std::to_string(loaded.vocab.min_count) + "); mode " +
                    model::ModeName(o.mode) + " needs reference features");
  }

  std::map<std::string, std::vector<preprocess::ContentChunk>> chunks;
  EmbeddingTable emb;
  if (mc.use_content) {
    std::vector<ChunkText> texts;
    for (const auto &s : b.train) {
      auto sel = SelectChunks(b.papers.at(s.paper_id), b.chunked, min_avg);
      for (auto &t : ChunkTexts(s.paper_id, sel)) texts.push_back(std::move(t));
      chunks[s.paper_id] = std::move(sel);
    }
    emb = Embed(o.dataset_dir, *encoder, texts, log);
  }

  std::vector<model::Example> examples;
  for (const auto &s : b.train) {
    const ParsedPaper &p = b.papers.at(s.paper_id);
    std::optional<Eigen::VectorXd> hist;
    if (mc.use_references) {
      hist = o.mode == model::Mode::kRefNoSelf
                 ? HistogramVector(WithoutSelfCitations(p, s.authors, b.labels), loaded.vocab)
                 : HistogramVector(p, loaded.vocab);
    }
    if (mc.use_content) {
      for (const auto &c : chunks[s.paper_id]) {
        examples.push_back({emb.at({s.paper_id, c.index}), hist, s.label});
      }
    } else {
      examples.push_back({std::nullopt, hist, s.label});
    }
  }

  json header;
  header["format"] = "citeprint-checkpoint";
  header["dataset"] = b.name;
  header["dataset_seed"] = b.seed;
  header["mode"] = model::ModeName(o.mode);
  header["train"] = TrainConfigJson(cfg);
  header["epochs"] = cfg.epochs;
  json label_names = json::array();
  for (const auto &l : b.labels) label_names.push_back(l.canonical_name);
  header["labels"] = label_names;
  header["vocab"] = {{"min_count", loaded.vocab.min_count},
                     {"surnames", loaded.vocab.surnames},
                     {"counts", loaded.vocab.counts}};
  header["encoder"] = manifest.at("encoder");
  header["chunked"] = b.chunked;
  header["chunk_words"] = manifest.at("chunk_words");
  header["min_avg_word_len"] = min_avg;

  model::FusionModel current;
  std::optional<model::AdamState> adam;
  std::vector<double> losses;
  if (o.resume && fs::exists(o.checkpoint_path)) {
    LoadedCheckpoint lc = LoadCheckpoint(o.checkpoint_path);
    const json &h = lc.ckpt.header;
    for (const char *key : {"dataset", "dataset_seed", "mode", "train", "labels", "vocab",
                            "encoder", "chunked"}) {
      if (h.at(key) != header.at(key)) {
        throw UsageError("resume: checkpoint differs from this run in '" + std::string(key) + "'");
      }
    }
    if (ModelConfigJson(lc.ckpt.model.config) != ModelConfigJson(mc)) {
      throw UsageError("resume: checkpoint model configuration differs from this run");
    }
    current = std::move(lc.ckpt.model);
    if (lc.ckpt.adam.m.size() == model::kNumParams) adam = std::move(lc.ckpt.adam);
    losses = h.value("epoch_loss", std::vector<double>{});
    Log(log, "resuming from epoch " + std::to_string(adam ? adam->epochs_done : 0));
  } else {
    current = model::Initialize(mc, cfg.seed);
  }

  TrainSummary summary;
  summary.checkpoint_path = o.checkpoint_path;
  summary.learning_rate = cfg.learning_rate;
  summary.epochs = cfg.epochs;
  summary.examples = static_cast<int>(examples.size());
  Log(log, std::string("training mode ") + model::ModeName(o.mode) + " on " +
               std::to_string(examples.size()) + " examples, lr " + Fixed(cfg.learning_rate, 6) +
               ", " + std::to_string(cfg.epochs) + " epochs");

  int64_t done = adam ? adam->epochs_done : 0;
  auto save = [&](const model::FusionModel &m, const model::AdamState &st) {
    storage::Checkpoint ckpt{m, st, header};
    ckpt.header["epoch_loss"] = losses;
    fs::path path(o.checkpoint_path);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    WriteAtomically(path, storage::SerializeCheckpoint(ckpt));
  };
  if (!adam) {
    model::AdamState fresh;
    fresh.m = current.ZeroLike();
    fresh.v = current.ZeroLike();
    adam = std::move(fresh);
  }
  for (int64_t epoch = done; epoch < cfg.epochs; ++epoch) {
    model::TrainConfig one = cfg;
    one.epochs = 1;
    model::TrainResult r = model::Train(examples, std::move(current), one, std::move(adam));
    current = std::move(r.model);
    adam = std::move(r.adam);
    losses.push_back(r.epoch_loss.front());
    save(current, *adam);
    ++summary.epochs_run;
    Log(log, "epoch " + std::to_string(epoch + 1) + "/" + std::to_string(cfg.epochs) +
                 " loss " + Fixed(r.epoch_loss.front(), 6));
  }
  if (summary.epochs_run == 0) {
    Log(log, "checkpoint already holds " + std::to_string(done) + " epochs; nothing to do");
  }
  summary.epoch_loss = losses;
  return summary;
}

EvalSummary Eval(const EvalOptions &o, const Logger &log) {
  if (o.checkpoint_path.empty()) throw UsageError("checkpoint: path required");
  if (o.dataset_dir.empty()) throw UsageError("dataset: directory required");
  if (!(o.ratio > 0 && o.ratio <= 1)) throw UsageError("ratio: must be in (0,1]");
  if (o.top_k < 1) throw UsageError("top-k: must be >= 1");

  LoadedCheckpoint lc = LoadCheckpoint(o.checkpoint_path);
  storage::LoadedBundle loaded = storage::ReadBundle(o.dataset_dir);
  const DatasetBundle &b = loaded.bundle;
  if (lc.labels.size() != b.labels.size()) {
    throw DataError("label space mismatch: checkpoint has " + std::to_string(lc.labels.size()) +
                    " labels, dataset has " + std::to_string(b.labels.size()));
  }
  for (size_t i = 0; i < lc.labels.size(); ++i) {
    if (lc.labels[i] != b.labels[i].canonical_name) {
      throw DataError("label space mismatch at index " + std::to_string(i) + ": checkpoint '" +
                      lc.labels[i] + "', dataset '" + b.labels[i].canonical_name + "'");
    }
  }
  if (b.test.empty()) throw DataError("dataset " + b.name + " has no test papers");
  const model::FusionModel &m = lc.ckpt.model;
  const bool all_chunks = o.chunks == ChunkSelection::kAll ||
                          (o.chunks == ChunkSelection::kDataset && b.chunked);
  const double min_avg = loaded.manifest.at("min_avg_word_len").get<double>();

  std::map<std::string, std::vector<preprocess::ContentChunk>> chunks;
  EmbeddingTable emb;
  if (model::UsesContent(lc.mode)) {
    auto encoder = CheckpointEncoder(lc, o.sidecar_endpoint);
    std::vector<ChunkText> texts;
    for (const auto &s : b.test) {
      auto sel = SelectChunks(b.papers.at(s.paper_id), all_chunks, min_avg);
      for (auto &t : ChunkTexts(s.paper_id, sel)) texts.push_back(std::move(t));
      chunks[s.paper_id] = std::move(sel);
    }
    emb = Embed(o.dataset_dir, *encoder, texts, log);
  }

  std::vector<evaluate::PaperPrediction> preds;
  std::vector<std::vector<int>> gold;
  std::vector<std::string> excluded;
  for (const auto &s : b.test) {
    const ParsedPaper &p = b.papers.at(s.paper_id);
    if (model::UsesContent(lc.mode) && chunks[s.paper_id].empty()) {
      excluded.push_back(s.paper_id);
      continue;
    }
    std::optional<Eigen::VectorXd> hist;
    if (model::UsesReferences(lc.mode)) {
      hist = lc.mode == model::Mode::kRefNoSelf
                 ? HistogramVector(WithoutSelfCitations(p, s.labels, b.labels), lc.vocab)
                 : HistogramVector(p, lc.vocab);
    }
    preds.push_back(PredictParsed(m, lc.mode, s.paper_id, chunks[s.paper_id], emb, hist));
    gold.push_back(s.labels);
  }
  if (preds.empty()) throw DataError("every test paper was excluded");

  std::vector<int> train_counts(b.labels.size(), 0);
  for (const auto &s : b.train) ++train_counts[s.label];
  evaluate::MetricReport report =
      evaluate::Report(preds, gold, lc.labels, train_counts, o.ratio, o.top_k);
  report.excluded = excluded;

  EvalSummary out;
  out.out_dir = o.out_dir.empty() ? o.checkpoint_path + ".report" : o.out_dir;
  fs::create_directories(out.out_dir);
  const fs::path dir(out.out_dir);
  const std::string title = b.name + " / " + model::ModeName(lc.mode) +
                            (all_chunks ? " / all chunks" : " / first chunk");
  WriteFile((dir / "report.txt").string(), RenderReport(report, title));

  auto row_json = [](const evaluate::MetricRow &r) {
    return json{{"papers", r.papers}, {"m1", r.m1}, {"m2", r.m2}, {"m3", r.m3}, {"m4", r.m4}};
  };
  json rj;
  rj["format"] = "citeprint-report/1";
  rj["title"] = title;
  rj["dataset"] = b.name;
  rj["mode"] = model::ModeName(lc.mode);
  rj["chunks"] = all_chunks ? "all" : "first";
  rj["ratio"] = report.ratio;
  rj["top_k"] = report.top_k;
  rj["strata"] = {{"single", row_json(report.single)},
                  {"multi", row_json(report.multi)},
                  {"overall", row_json(report.overall)}};
  json authors = json::array();
  std::string per_author = "name,train_papers,test_papers,accuracy\n";
  for (const auto &r : report.per_author) {
    authors.push_back({{"name", r.name},
                       {"train_papers", r.train_papers},
                       {"test_papers", r.test_papers},
                       {"accuracy", r.accuracy}});
    per_author += CsvField(r.name) + "," + std::to_string(r.train_papers) + "," +
                  std::to_string(r.test_papers) + "," + Fixed(r.accuracy, 6) + "\n";
  }
  rj["per_author"] = authors;
  std::vector<int> bins = evaluate::AccuracyHistogram(report);
  rj["accuracy_histogram"] = bins;
  rj["excluded"] = report.excluded;
  WriteFile((dir / "report.json").string(), rj.dump(2) + "\n");
  out.report_json = rj;
  WriteFile((dir / "per_author.csv").string(), per_author);

  std::string hist_csv = "bin_low,bin_high,authors\n";
  for (size_t i = 0; i < bins.size(); ++i) {
    hist_csv += Fixed(i / 10.0, 1) + "," + Fixed((i + 1) / 10.0, 1) + "," +
                std::to_string(bins[i]) + "\n";
  }
  WriteFile((dir / "accuracy_histogram.csv").string(), hist_csv);

  std::vector<size_t> order(preds.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t x, size_t y) { return preds[x].paper_id < preds[y].paper_id; });
  std::string pred_csv = "paper_id,gold,n_hat,m1,m2,m3,m4,top\n";
  for (size_t i : order) {
    const auto &p = preds[i];
    std::vector<std::string> g, top;
    for (int a : gold[i]) g.push_back(std::to_string(a));
    for (int k = 0; k < std::min<int>(o.top_k, static_cast<int>(p.ranked.size())); ++k) {
      top.push_back(std::to_string(p.ranked[k]) + ":" + Fixed(p.probabilities[p.ranked[k]], 6));
    }
    pred_csv += CsvField(p.paper_id) + "," + Join(g, ";") + "," +
                std::to_string(evaluate::EstimateAuthorCount(p, o.ratio)) + "," +
                std::to_string(evaluate::Metric1(p, gold[i])) + "," +
                std::to_string(evaluate::Metric2(p, gold[i])) + "," +
                std::to_string(evaluate::Metric3(p, gold[i], o.ratio)) + "," +
                std::to_string(evaluate::Metric4(p, gold[i], o.top_k)) + "," + Join(top, ";") +
                "\n";
  }
  WriteFile((dir / "predictions.csv").string(), pred_csv);

  Log(log, "overall top-1 accuracy " + Percent(report.overall.m1) + "% on " +
               std::to_string(report.overall.papers) + " papers");
  out.report = std::move(report);
  return out;
}

struct Predictor::State {
  LoadedCheckpoint lc;
  std::string sidecar_endpoint;
  std::unique_ptr<TextEncoder> encoder;
};

Predictor::Predictor(const std::string &checkpoint_path, const std::string &sidecar_endpoint)
    : state_(std::make_unique<State>()) {
  if (checkpoint_path.empty()) throw UsageError("checkpoint: path required");
  state_->lc = LoadCheckpoint(checkpoint_path);
  state_->sidecar_endpoint = sidecar_endpoint;
}

Predictor::~Predictor() = default;
Predictor::Predictor(Predictor &&) noexcept = default;
Predictor &Predictor::operator=(Predictor &&) noexcept = default;

const std::vector<std::string> &Predictor::labels() const { return state_->lc.labels; }

PredictResult Predictor::Predict(const Manuscript &m, int top_k, double ratio,
                                 const Logger &log) {
  if (top_k < 1) throw UsageError("top-k: must be >= 1");
  if (!(ratio > 0 && ratio <= 1)) throw UsageError("ratio: must be in (0,1]");
  const LoadedCheckpoint &lc = state_->lc;
  ParsedPaper p = ProcessManuscript(m, lc.chunk_words, lc.min_avg_word_len, lc.chunked);
  auto sel = SelectChunks(p, lc.chunked, lc.min_avg_word_len);

  EmbeddingTable emb;
  if (model::UsesContent(lc.mode)) {
    if (!state_->encoder) state_->encoder = CheckpointEncoder(lc, state_->sidecar_endpoint);
    for (const auto &c : sel) {
      emb.emplace(std::make_pair(p.id, c.index),
                  ToVector(state_->encoder->Encode(Join(c.words, " "))));
    }
  }
  std::optional<Eigen::VectorXd> hist;
  if (model::UsesReferences(lc.mode)) hist = HistogramVector(p, lc.vocab);
  auto pred = PredictParsed(lc.ckpt.model, lc.mode, p.id, sel, emb, hist);

  PredictResult r;
  r.chunks_used = model::UsesContent(lc.mode) ? static_cast<int>(sel.size()) : 0;
  r.estimated_authors = evaluate::EstimateAuthorCount(pred, ratio);
  for (int k = 0; k < std::min<int>(top_k, static_cast<int>(pred.ranked.size())); ++k) {
    int a = pred.ranked[k];
    r.ranked.push_back({lc.labels[a], pred.probabilities[a]});
  }
  Log(log, "predicted " + m.id + " from " + std::to_string(r.chunks_used) + " chunks and " +
               std::to_string(p.references.size()) + " references");
  return r;
}

PredictResult Predict(const PredictOptions &o, const Logger &log) {
  if (o.checkpoint_path.empty()) throw UsageError("checkpoint: path required");
  if (o.manuscript_path.empty()) throw UsageError("manuscript: path required");
  if (o.top_k < 1) throw UsageError("top-k: must be >= 1");
  if (!(o.ratio > 0 && o.ratio <= 1)) throw UsageError("ratio: must be in (0,1]");
  Predictor predictor(o.checkpoint_path, o.sidecar_endpoint);
  Manuscript m;
  m.id = fs::path(o.manuscript_path).filename().string();
  m.raw_text = ReadFile(o.manuscript_path);
  return predictor.Predict(m, o.top_k, o.ratio, log);
}

disambig::TuningResult TuneDbscan(const TuneOptions &o, const Logger &log) {
  if (o.abstracts_each < 2) throw UsageError("abstracts: must be >= 2");
  auto encoder = MakeEncoder(o.encoder);
  auto set = synth::CalibrationSet(*encoder, o.seed, o.abstracts_each);
  std::vector<double> grid = o.eps_grid;
  if (grid.empty()) {
    for (int i = 1; i <= 200; ++i) grid.push_back(0.01 * i);
  }
  auto r = disambig::Tune(set, grid, o.min_pts_grid, o.metric);
  Log(log, "tuned eps " + Fixed(r.params.eps, 3) + ", min_pts " +
               std::to_string(r.params.min_pts) + ": " + std::to_string(r.correct) + "/" +
               std::to_string(r.total) + " calibration authors correct");
  return r;
}

std::string RenderReport(const evaluate::MetricReport &r, const std::string &title) {
  std::string out = "citeprint evaluation: " + title + "\n";
  out += "ratio threshold " + Fixed(r.ratio, 2) + ", top-k " + std::to_string(r.top_k) + "\n\n";
  char line[160];
  std::snprintf(line, sizeof line, "%-8s %7s %10s %10s %10s %10s\n", "Stratum", "Papers",
                "(1) top-1", "(2) top-n", "(3) top-n^", "(4) top-k");
  out += line;
  auto row = [&](const char *name, const evaluate::MetricRow &m) {
    std::snprintf(line, sizeof line, "%-8s %7d %10s %10s %10s %10s\n", name, m.papers,
                  Percent(m.m1).c_str(), Percent(m.m2).c_str(), Percent(m.m3).c_str(),
                  Percent(m.m4).c_str());
    out += line;
  };
  row("Single", r.single);
  row("Multi", r.multi);
  row("Overall", r.overall);
  out += "\nPer-author top-1 accuracy\n";
  for (const auto &a : r.per_author) {
    std::snprintf(line, sizeof line, "  %-32s train %4d  test %4d  %6s\n", a.name.c_str(),
                  a.train_papers, a.test_papers, Percent(a.accuracy).c_str());
    out += line;
  }
  if (!r.excluded.empty()) {
    out += "\nExcluded papers (no usable chunk): " + Join(r.excluded, ", ") + "\n";
  }
  return out;
}

}  // namespace citeprint::pipeline
