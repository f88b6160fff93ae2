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

#include "citeprint/storage.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <sstream>

#include "citeprint/error.hpp"
#include "citeprint/text.hpp"

namespace citeprint::storage {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr char kPaperMagic[] = "citeprint-paper v1";
constexpr char kCacheMagic[8] = {'C', 'P', 'E', 'M', 'B', 'E', 'D', '1'};
constexpr char kCkptMagic[8] = {'C', 'P', 'C', 'K', 'P', 'T', '0', '1'};
constexpr uint32_t kCkptVersion = 1;

class Writer {
 public:
  void Bytes(const void *p, size_t n) { out_.append(static_cast<const char *>(p), n); }
  void U32(uint32_t v) {
    for (int i = 0; i < 4; ++i) out_ += static_cast<char>((v >> (8 * i)) & 0xFF);
  }
  void U64(uint64_t v) {
    for (int i = 0; i < 8; ++i) out_ += static_cast<char>((v >> (8 * i)) & 0xFF);
  }
  void I32(int32_t v) { U32(static_cast<uint32_t>(v)); }
  void F64(double d) {
    uint64_t v;
    std::memcpy(&v, &d, sizeof v);
    U64(v);
  }
  void Str(const std::string &s) {
    U32(static_cast<uint32_t>(s.size()));
    out_ += s;
  }
  std::string Take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  Reader(const std::string &data, const char *what) : data_(data), what_(what) {}
  void Need(size_t n) {
    if (pos_ + n > data_.size()) throw DataError(std::string("truncated ") + what_);
  }
  void Bytes(void *p, size_t n) {
    Need(n);
    std::memcpy(p, data_.data() + pos_, n);
    pos_ += n;
  }
  uint32_t U32() {
    Need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  uint64_t U64() {
    Need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  int32_t I32() { return static_cast<int32_t>(U32()); }
  double F64() {
    uint64_t v = U64();
    double d;
    std::memcpy(&d, &v, sizeof d);
    return d;
  }
  std::string Str() {
    uint32_t n = U32();
    Need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool AtEnd() const { return pos_ == data_.size(); }

 private:
  const std::string &data_;
  const char *what_;
  size_t pos_ = 0;
};

void WriteMatrix(Writer &w, const std::string &name, const Eigen::MatrixXd &m) {
  w.Str(name);
  w.U32(static_cast<uint32_t>(m.rows()));
  w.U32(static_cast<uint32_t>(m.cols()));
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) w.F64(m(r, c));
  }
}

Eigen::MatrixXd ReadMatrix(Reader &rd, const std::string &expected_name) {
  std::string name = rd.Str();
  if (name != expected_name) {
    throw DataError("checkpoint tensor '" + name + "' where '" + expected_name + "' expected");
  }
  uint32_t rows = rd.U32(), cols = rd.U32();
  Eigen::MatrixXd m(rows, cols);
  for (uint32_t c = 0; c < cols; ++c) {
    for (uint32_t r = 0; r < rows; ++r) m(r, c) = rd.F64();
  }
  return m;
}

json ReadJsonLines(const std::string &path) {
  json arr = json::array();
  const std::string data = ReadFile(path);
  for (auto line : SplitLines(data)) {
    if (Trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw DataError("malformed record in " + path);
    arr.push_back(std::move(j));
  }
  return arr;
}

}  // namespace

std::string SerializePaper(const ParsedPaper &paper) {
  std::ostringstream out;
  out << kPaperMagic << '\n' << "id\t" << paper.id << '\n';
  out << "chunks\t" << paper.chunks.size() << '\n';
  for (const auto &c : paper.chunks) out << c.index << '\t' << Join(c.words, " ") << '\n';
  out << "references\t" << paper.references.size() << '\n';
  for (const auto &r : paper.references) out << Join(r.surnames, " ") << '\n';
  return out.str();
}

ParsedPaper ParsePaper(const std::string &text) {
  auto lines = SplitLines(text);
  size_t i = 0;
  auto next = [&]() -> std::string_view {
    if (i >= lines.size()) throw DataError("truncated parsed-paper artifact");
    return lines[i++];
  };
  auto field = [&](std::string_view key) {
    std::string_view line = next();
    if (!StartsWith(line, key) || line.size() <= key.size() || line[key.size()] != '\t') {
      throw DataError("parsed-paper artifact: expected field " + std::string(key));
    }
    return std::string(line.substr(key.size() + 1));
  };
  if (next() != kPaperMagic) throw DataError("not a parsed-paper artifact");
  ParsedPaper p;
  p.id = field("id");
  size_t n_chunks = std::stoul(field("chunks"));
  for (size_t k = 0; k < n_chunks; ++k) {
    std::string_view line = next();
    size_t tab = line.find('\t');
    if (tab == std::string_view::npos) throw DataError("malformed chunk line");
    preprocess::ContentChunk c;
    c.index = std::stoi(std::string(line.substr(0, tab)));
    c.words = SplitWhitespace(line.substr(tab + 1));
    c.avg_word_len = preprocess::AverageWordLength(c.words);
    p.chunks.push_back(std::move(c));
  }
  size_t n_refs = std::stoul(field("references"));
  for (size_t k = 0; k < n_refs; ++k) {
    refparse::CitedReference r;
    r.surnames = SplitWhitespace(i < lines.size() ? next() : std::string_view());
    p.references.push_back(std::move(r));
  }
  return p;
}

std::string PaperFileName(const std::string &id) {
  std::string safe;
  for (char c : id) safe += (IsAsciiAlnum(c) || c == '.' || c == '-' || c == '_') ? c : '_';
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(Fnv1a64(id)));
  return safe + "." + std::string(hex, 8) + ".txt";
}

void WriteBundle(const std::string &dir, const DatasetBundle &bundle,
                 const features::CitationVocab &vocab, const json &extra) {
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "papers", ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());

  json manifest = extra;
  manifest["format"] = "citeprint-dataset/1";
  manifest["name"] = bundle.name;
  manifest["seed"] = bundle.seed;
  manifest["chunked"] = bundle.chunked;
  manifest["test_ratio"] = bundle.test_ratio;
  manifest["vocab_min_count"] = vocab.min_count;
  manifest["vocab_size"] = vocab.size();
  json labels = json::array();
  for (const auto &l : bundle.labels) {
    labels.push_back({{"name", l.canonical_name},
                      {"cluster_index", l.cluster_index},
                      {"paper_count", l.paper_count}});
  }
  manifest["labels"] = labels;
  manifest["split_drift"] = bundle.split_drift;
  manifest["warnings"] = bundle.warnings;
  manifest["counts"]["train"] = bundle.train.size();
  manifest["counts"]["test"] = bundle.test.size();
  WriteFile((fs::path(dir) / "manifest.json").string(), manifest.dump(2) + "\n");

  std::string train, test;
  for (const auto &s : bundle.train) {
    train += json{{"id", s.paper_id}, {"label", s.label}, {"authors", s.authors}}.dump() + "\n";
  }
  for (const auto &s : bundle.test) {
    test += json{{"id", s.paper_id}, {"labels", s.labels}}.dump() + "\n";
  }
  WriteFile((fs::path(dir) / "train.jsonl").string(), train);
  WriteFile((fs::path(dir) / "test.jsonl").string(), test);
  WriteFile((fs::path(dir) / "vocab.txt").string(), features::SerializeVocab(vocab));
  for (const auto &[id, paper] : bundle.papers) {
    WriteFile((fs::path(dir) / "papers" / PaperFileName(id)).string(), SerializePaper(paper));
  }
}

LoadedBundle ReadBundle(const std::string &dir) {
  if (!fs::is_directory(dir)) throw IoError("dataset directory not found: " + dir);
  LoadedBundle out;
  json m = json::parse(ReadFile((fs::path(dir) / "manifest.json").string()), nullptr, false);
  if (m.is_discarded() || m.value("format", "") != "citeprint-dataset/1") {
    throw DataError(dir + " is not a citeprint dataset");
  }
  DatasetBundle &b = out.bundle;
  b.name = m.at("name").get<std::string>();
  b.seed = m.at("seed").get<uint64_t>();
  b.chunked = m.at("chunked").get<bool>();
  b.test_ratio = m.at("test_ratio").get<double>();
  for (const auto &l : m.at("labels")) {
    b.labels.push_back({l.at("name").get<std::string>(), l.at("cluster_index").get<int>(),
                        l.at("paper_count").get<int>()});
  }
  b.split_drift = m.value("split_drift", std::vector<std::string>{});
  b.warnings = m.value("warnings", std::vector<std::string>{});
  for (const auto &j : ReadJsonLines((fs::path(dir) / "train.jsonl").string())) {
    b.train.push_back({j.at("id").get<std::string>(), j.at("label").get<int>(),
                       j.at("authors").get<std::vector<int>>()});
  }
  for (const auto &j : ReadJsonLines((fs::path(dir) / "test.jsonl").string())) {
    b.test.push_back({j.at("id").get<std::string>(), j.at("labels").get<std::vector<int>>()});
  }
  auto load = [&](const std::string &id) {
    ParsedPaper p = ParsePaper(ReadFile((fs::path(dir) / "papers" / PaperFileName(id)).string()));
    if (p.id != id) throw DataError("paper artifact for " + id + " carries id " + p.id);
    b.papers.emplace(id, std::move(p));
  };
  for (const auto &s : b.train) load(s.paper_id);
  for (const auto &s : b.test) load(s.paper_id);
  out.vocab = features::ParseVocab(ReadFile((fs::path(dir) / "vocab.txt").string()));
  out.manifest = std::move(m);
  return out;
}

EmbeddingCache::EmbeddingCache(std::string encoder_id, int dim)
    : encoder_id_(std::move(encoder_id)), dim_(dim) {}

const std::vector<double> *EmbeddingCache::Find(const std::string &paper_id, int chunk) const {
  auto it = index_.find({paper_id, chunk});
  return it == index_.end() ? nullptr : &rows_[it->second];
}

void EmbeddingCache::Put(const std::string &paper_id, int chunk, std::vector<double> vec) {
  if (static_cast<int>(vec.size()) != dim_) throw DataError("embedding dimension mismatch in cache");
  auto key = std::make_pair(paper_id, chunk);
  auto it = index_.find(key);
  if (it != index_.end()) {
    rows_[it->second] = std::move(vec);
    return;
  }
  index_.emplace(key, rows_.size());
  keys_.push_back(key);
  rows_.push_back(std::move(vec));
}

std::string EmbeddingCache::Serialize() const {
  Writer w;
  w.Bytes(kCacheMagic, 8);
  w.U32(1);
  w.Str(encoder_id_);
  w.U32(static_cast<uint32_t>(dim_));
  w.U64(index_.size());
  for (const auto &[key, row] : index_) w.Str(key.first);
  for (const auto &[key, row] : index_) w.I32(key.second);
  for (const auto &[key, row] : index_) {
    for (double x : rows_[row]) w.F64(x);
  }
  return w.Take();
}

EmbeddingCache EmbeddingCache::Parse(const std::string &bytes) {
  Reader rd(bytes, "embedding cache");
  char magic[8];
  rd.Bytes(magic, 8);
  if (std::memcmp(magic, kCacheMagic, 8) != 0) throw DataError("not an embedding cache");
  if (rd.U32() != 1) throw DataError("unsupported embedding cache version");
  std::string id = rd.Str();
  int dim = static_cast<int>(rd.U32());
  uint64_t n = rd.U64();
  std::vector<std::string> ids(n);
  std::vector<int> chunks(n);
  for (auto &s : ids) s = rd.Str();
  for (auto &c : chunks) c = rd.I32();
  EmbeddingCache cache(id, dim);
  for (uint64_t i = 0; i < n; ++i) {
    std::vector<double> v(dim);
    for (auto &x : v) x = rd.F64();
    cache.Put(ids[i], chunks[i], std::move(v));
  }
  if (!rd.AtEnd()) throw DataError("trailing bytes in embedding cache");
  return cache;
}

std::string CacheFileName(const std::string &encoder_id) {
  std::string safe;
  for (char c : encoder_id) safe += (IsAsciiAlnum(c) || c == '-' || c == '_') ? c : '_';
  return "embeddings." + safe + ".bin";
}

std::string SerializeCheckpoint(const Checkpoint &ckpt) {
  const auto &m = ckpt.model;
  json header = ckpt.header;
  header["model"] = {{"d_text", m.config.d_text},
                     {"n_hist", m.config.n_hist},
                     {"n_labels", m.config.n_labels},
                     {"hidden", m.config.hidden},
                     {"use_content", m.config.use_content},
                     {"use_references", m.config.use_references},
                     {"use_projection", m.config.use_projection},
                     {"l1_normalize", m.config.l1_normalize}};
  header["adam_state"] = {{"step", ckpt.adam.step}, {"epochs_done", ckpt.adam.epochs_done}};
  Writer w;
  w.Bytes(kCkptMagic, 8);
  w.U32(kCkptVersion);
  w.Str(header.dump());
  const bool has_adam = ckpt.adam.m.size() == model::kNumParams;
  w.U32(has_adam ? 3 * model::kNumParams : model::kNumParams);
  for (int i = 0; i < model::kNumParams; ++i) WriteMatrix(w, model::ParamName(i), m.params[i]);
  if (has_adam) {
    for (int i = 0; i < model::kNumParams; ++i) {
      WriteMatrix(w, std::string("adam.m/") + model::ParamName(i), ckpt.adam.m[i]);
    }
    for (int i = 0; i < model::kNumParams; ++i) {
      WriteMatrix(w, std::string("adam.v/") + model::ParamName(i), ckpt.adam.v[i]);
    }
  }
  return w.Take();
}

Checkpoint ParseCheckpoint(const std::string &bytes) {
  Reader rd(bytes, "checkpoint");
  char magic[8];
  rd.Bytes(magic, 8);
  if (std::memcmp(magic, kCkptMagic, 8) != 0) throw DataError("not a citeprint checkpoint");
  uint32_t version = rd.U32();
  if (version != kCkptVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ckpt;
  ckpt.header = json::parse(rd.Str(), nullptr, false);
  if (ckpt.header.is_discarded()) throw DataError("corrupt checkpoint header");
  const json &mj = ckpt.header.at("model");
  model::ModelConfig cfg;
  cfg.d_text = mj.at("d_text");
  cfg.n_hist = mj.at("n_hist");
  cfg.n_labels = mj.at("n_labels");
  cfg.hidden = mj.at("hidden");
  cfg.use_content = mj.at("use_content");
  cfg.use_references = mj.at("use_references");
  cfg.use_projection = mj.at("use_projection");
  cfg.l1_normalize = mj.at("l1_normalize");
  ckpt.model = model::Zeros(cfg);
  uint32_t count = rd.U32();
  if (count != model::kNumParams && count != 3 * model::kNumParams) {
    throw DataError("checkpoint holds an unexpected number of tensors");
  }
  for (int i = 0; i < model::kNumParams; ++i) {
    Eigen::MatrixXd t = ReadMatrix(rd, model::ParamName(i));
    if (t.rows() != ckpt.model.params[i].rows() || t.cols() != ckpt.model.params[i].cols()) {
      throw DataError(std::string("checkpoint tensor ") + model::ParamName(i) + " has the wrong shape");
    }
    ckpt.model.params[i] = std::move(t);
  }
  if (count == 3 * model::kNumParams) {
    ckpt.adam.m.resize(model::kNumParams);
    ckpt.adam.v.resize(model::kNumParams);
    for (int i = 0; i < model::kNumParams; ++i) {
      ckpt.adam.m[i] = ReadMatrix(rd, std::string("adam.m/") + model::ParamName(i));
    }
    for (int i = 0; i < model::kNumParams; ++i) {
      ckpt.adam.v[i] = ReadMatrix(rd, std::string("adam.v/") + model::ParamName(i));
    }
    ckpt.adam.step = ckpt.header.at("adam_state").at("step");
    ckpt.adam.epochs_done = ckpt.header.at("adam_state").at("epochs_done");
  }
  if (!rd.AtEnd()) throw DataError("trailing bytes in checkpoint");
  return ckpt;
}

}  // namespace citeprint::storage
