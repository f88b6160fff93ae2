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

// Synthetic manuscript corpora with planted authorship signal, and the
// labeled calibration set used to tune the disambiguation parameters.

#ifndef CITEPRINT_SYNTH_HPP_
#define CITEPRINT_SYNTH_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "citeprint/disambig.hpp"
#include "citeprint/encoder.hpp"
#include "citeprint/ingest.hpp"

namespace citeprint::synth {

// Abstracts lean on the vocabulary of their field more than body text does.
inline constexpr double kAbstractFieldShare = 0.9;

struct SynthOptions {
  int n_authors = 7;
  int papers_per_author = 100;
  // Authors whose name is shared by two personas writing on unrelated topics.
  int n_ambiguous = 1;
  uint64_t seed = 1;
  double coauthor_rate = 0.15;      // second candidate author on a paper
  double outsider_rate = 0.6;       // non-candidate co-author on a paper
  double initials_rate = 0.03;      // a co-author listed by initials only
  double topic_rate = 0.025;        // body words drawn from the persona topic
  double abstract_field_share = kAbstractFieldShare;
  // Fraction of a persona's topic words shared with the persona three places
  // further along, so that content alone confuses some author pairs.
  double topic_overlap = 0.6;
  double self_cite_rate = 0.03;     // references listing the author
  double community_rate = 0.06;     // reference names from the author community
  int body_words = 2000;
  int min_refs = 18;
  int max_refs = 32;
  double appendix_rate = 0.3;
  double table_block_rate = 0.25;   // a run of short tokens inside the body
};

struct SynthPaper {
  Manuscript manuscript;
  // Expected surname lists for every reference, in order.
  std::vector<std::vector<std::string>> reference_surnames;
  std::string reference_style;
};

struct SynthCorpus {
  std::vector<SynthPaper> papers;
  std::vector<std::string> candidate_names;
  std::vector<std::string> ambiguous_names;
};

SynthCorpus Generate(const SynthOptions &options);

// Writes corpus.jsonl, texts/<id>.txt and truth.json under `dir`.
void WriteCorpus(const SynthCorpus &corpus, const std::string &dir);

// Reads a corpus file. Each line holds id, title, abstract, authors and
// text_path (relative to the corpus file's directory).
std::vector<Manuscript> ReadCorpus(const std::string &path);

// Twenty single-persona and twenty two-persona authors with `abstracts_each`
// abstracts, embedded with `encoder`.
std::vector<disambig::CalibrationAuthor> CalibrationSet(TextEncoder &encoder,
                                                        uint64_t seed,
                                                        int abstracts_each = 40);

}  // namespace citeprint::synth

#endif  // CITEPRINT_SYNTH_HPP_
