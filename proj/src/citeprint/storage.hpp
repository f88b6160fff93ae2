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

// On-disk formats: dataset bundle directories, parsed-paper artifacts,
// embedding caches and model checkpoints. See docs/formats.md.

#ifndef CITEPRINT_STORAGE_HPP_
#define CITEPRINT_STORAGE_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "citeprint/features.hpp"
#include "citeprint/ingest.hpp"
#include "citeprint/model.hpp"
#include "json.hpp"

namespace citeprint::storage {

std::string SerializePaper(const ParsedPaper &paper);
ParsedPaper ParsePaper(const std::string &text);

// File name for a paper id: characters outside [A-Za-z0-9._-] become '_',
// followed by a short hash so distinct ids never collide.
std::string PaperFileName(const std::string &id);

// Writes manifest.json, train.jsonl, test.jsonl, vocab.txt and papers/.
// `extra` is merged into the manifest (drop records, verdicts, counts).
void WriteBundle(const std::string &dir, const DatasetBundle &bundle,
                 const features::CitationVocab &vocab, const nlohmann::json &extra);

struct LoadedBundle {
  DatasetBundle bundle;
  features::CitationVocab vocab;
  nlohmann::json manifest;
};

LoadedBundle ReadBundle(const std::string &dir);

// Binary columnar cache of text embeddings keyed by (paper id, chunk index)
// for a single encoder id.
class EmbeddingCache {
 public:
  EmbeddingCache(std::string encoder_id, int dim);

  const std::string &encoder_id() const { return encoder_id_; }
  int dim() const { return dim_; }
  size_t size() const { return keys_.size(); }

  const std::vector<double> *Find(const std::string &paper_id, int chunk) const;
  void Put(const std::string &paper_id, int chunk, std::vector<double> vec);

  // Rows are written sorted by key so the file is independent of insertion
  // order.
  std::string Serialize() const;
  static EmbeddingCache Parse(const std::string &bytes);

 private:
  std::string encoder_id_;
  int dim_;
  std::map<std::pair<std::string, int>, size_t> index_;
  std::vector<std::pair<std::string, int>> keys_;
  std::vector<std::vector<double>> rows_;
};

std::string CacheFileName(const std::string &encoder_id);

struct Checkpoint {
  model::FusionModel model;
  model::AdamState adam;
  nlohmann::json header;  // training config, labels, vocabulary, encoder
};

std::string SerializeCheckpoint(const Checkpoint &ckpt);
Checkpoint ParseCheckpoint(const std::string &bytes);

}  // namespace citeprint::storage

#endif  // CITEPRINT_STORAGE_HPP_
