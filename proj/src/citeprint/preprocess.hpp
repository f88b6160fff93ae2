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

// Fail-fast segmentation of plain-text manuscripts and content chunking.

#ifndef CITEPRINT_PREPROCESS_HPP_
#define CITEPRINT_PREPROCESS_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace citeprint::preprocess {

struct SegmentedText {
  std::string content;           // abstract + body, header removed
  std::string references_block;  // bibliography only
  std::string discarded_supplement;
};

struct ContentChunk {
  std::vector<std::string> words;
  int index = 0;
  double avg_word_len = 0.0;
};

struct SegmentOptions {
  std::vector<std::string> abstract_keywords{"Abstract"};
  // Used only when no abstract keyword exists. May be preceded by a section
  // number ("1", "1.", "I.").
  std::vector<std::string> fallback_keywords{"Introduction"};
  std::vector<std::string> reference_keywords{"References"};
  std::vector<std::string> supplement_keywords{
      "Supplement", "Supplementary", "Appendix", "Discussion",
      "Acknowledgements", "Acknowledgments"};
};

inline constexpr size_t kDefaultChunkWords = 512;
inline constexpr double kMinAvgWordLength = 4.22;

// True when some whitespace token has a non-empty local part before '@' and a
// dotted domain with non-empty labels after it.
bool ContainsEmail(std::string_view line);

// Removes blank lines, lines with an email address and digit-only lines.
std::string CleanLines(std::string_view raw);

// Keyword rule: the keyword is the first word of the line (only whitespace
// before it), starts with its capital letter and is not followed by another
// letter. Remaining letters match case-insensitively. On success `rest`
// receives the text after the keyword.
bool MatchKeywordLine(std::string_view line, std::string_view keyword,
                      std::string_view *rest = nullptr);

// Throws FailFast when an anchor is missing or a side comes out empty.
SegmentedText Segment(std::string_view cleaned,
                      const SegmentOptions &options = {});

double AverageWordLength(const std::vector<std::string> &words);

std::vector<ContentChunk> Chunk(std::string_view content,
                                size_t chunk_len = kDefaultChunkWords);

std::vector<ContentChunk> FilterChunks(const std::vector<ContentChunk> &chunks,
                                       double min_avg_len = kMinAvgWordLength);

// The first chunk is exempt from the word-length filter. Throws FailFast on
// an empty list.
const ContentChunk &FirstChunk(const std::vector<ContentChunk> &chunks);

}  // namespace citeprint::preprocess

#endif  // CITEPRINT_PREPROCESS_HPP_
