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

#include "citeprint/preprocess.hpp"

#include "citeprint/error.hpp"
#include "citeprint/text.hpp"

namespace citeprint::preprocess {
namespace {

bool IsDigitOnly(std::string_view line) {
  line = Trim(line);
  if (line.empty()) return false;
  for (char c : line) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

bool IsEmailToken(std::string_view tok) {
  size_t at = tok.find('@');
  if (at == std::string_view::npos || at == 0) return false;
  std::string_view domain = tok.substr(at + 1);
  while (!domain.empty() && !IsAsciiAlnum(domain.back())) domain.remove_suffix(1);
  size_t dot = domain.find('.');
  if (dot == std::string_view::npos || dot == 0) return false;
  return dot + 1 < domain.size();
}

// Section numbers accepted before a fallback heading: "1", "1.", "I.", "IV".
bool IsSectionNumber(std::string_view tok) {
  if (tok.empty()) return false;
  if (tok.back() == '.') tok.remove_suffix(1);
  if (tok.empty()) return false;
  bool digits = true, roman = true;
  for (char c : tok) {
    if (c < '0' || c > '9') digits = false;
    if (c != 'I' && c != 'V' && c != 'X') roman = false;
  }
  return digits || roman;
}

bool MatchFallbackLine(std::string_view line, std::string_view keyword,
                       std::string_view *rest) {
  if (MatchKeywordLine(line, keyword, rest)) return true;
  std::string_view t = Trim(line);
  size_t sp = t.find_first_of(" \t");
  if (sp == std::string_view::npos) return false;
  if (!IsSectionNumber(t.substr(0, sp))) return false;
  return MatchKeywordLine(t.substr(sp), keyword, rest);
}

std::string StripLeadingPunct(std::string_view s) {
  s = Trim(s);
  while (!s.empty() && (s.front() == ':' || s.front() == '.' ||
                        s.front() == '-' || s.front() == '|')) {
    s.remove_prefix(1);
    s = Trim(s);
  }
  // Em and en dashes.
  while (StartsWith(s, "\xE2\x80\x94") || StartsWith(s, "\xE2\x80\x93")) {
    s.remove_prefix(3);
    s = Trim(s);
  }
  return std::string(s);
}

void AppendLine(std::string &out, std::string_view line) {
  if (line.empty()) return;
  if (!out.empty()) out += '\n';
  out += line;
}

}  // namespace

bool ContainsEmail(std::string_view line) {
  for (const auto &tok : SplitWhitespace(line)) {
    if (IsEmailToken(tok)) return true;
  }
  return false;
}

std::string CleanLines(std::string_view raw) {
  std::string out;
  for (std::string_view line : SplitLines(raw)) {
    if (Trim(line).empty() || IsDigitOnly(line) || ContainsEmail(line)) continue;
    AppendLine(out, line);
  }
  return out;
}

bool MatchKeywordLine(std::string_view line, std::string_view keyword,
                      std::string_view *rest) {
  size_t i = 0;
  while (i < line.size() && IsAsciiSpace(line[i])) ++i;
  if (keyword.empty() || line.size() - i < keyword.size()) return false;
  if (line[i] != keyword[0]) return false;
  for (size_t k = 1; k < keyword.size(); ++k) {
    char a = line[i + k], b = keyword[k];
    if (a >= 'A' && a <= 'Z') a = static_cast<char>(a + 32);
    if (b >= 'A' && b <= 'Z') b = static_cast<char>(b + 32);
    if (a != b) return false;
  }
  size_t end = i + keyword.size();
  if (end < line.size()) {
    size_t pos = end;
    if (IsLetter(NextCodePoint(line, pos))) return false;
  }
  if (rest) *rest = line.substr(end);
  return true;
}

SegmentedText Segment(std::string_view cleaned, const SegmentOptions &options) {
  std::vector<std::string_view> lines = SplitLines(cleaned);
  const size_t n = lines.size();

  size_t start = n;
  std::string_view first_rest;
  for (size_t i = 0; i < n && start == n; ++i) {
    for (const auto &kw : options.abstract_keywords) {
      if (MatchKeywordLine(lines[i], kw, &first_rest)) {
        start = i;
        break;
      }
    }
  }
  for (size_t i = 0; i < n && start == n; ++i) {
    for (const auto &kw : options.fallback_keywords) {
      if (MatchFallbackLine(lines[i], kw, &first_rest)) {
        start = i;
        break;
      }
    }
  }
  if (start == n) throw FailFast("segment", "no abstract anchor");

  size_t refs = n;
  bool bracket_anchor = false;
  std::string_view refs_rest;
  for (size_t i = start + 1; i < n && refs == n; ++i) {
    if (StartsWith(Trim(lines[i]), "[1]")) {
      refs = i;
      bracket_anchor = true;
      break;
    }
    for (const auto &kw : options.reference_keywords) {
      if (MatchKeywordLine(lines[i], kw, &refs_rest)) {
        refs = i;
        break;
      }
    }
  }
  if (refs == n) throw FailFast("segment", "no reference anchor");

  size_t supplement = n;
  for (size_t i = refs + 1; i < n && supplement == n; ++i) {
    for (const auto &kw : options.supplement_keywords) {
      if (MatchKeywordLine(lines[i], kw)) {
        supplement = i;
        break;
      }
    }
  }

  SegmentedText out;
  AppendLine(out.content, StripLeadingPunct(first_rest));
  for (size_t i = start + 1; i < refs; ++i) AppendLine(out.content, lines[i]);
  if (bracket_anchor) {
    AppendLine(out.references_block, lines[refs]);
  } else {
    AppendLine(out.references_block, StripLeadingPunct(refs_rest));
  }
  for (size_t i = refs + 1; i < supplement; ++i) {
    AppendLine(out.references_block, lines[i]);
  }
  for (size_t i = supplement; i < n; ++i) {
    AppendLine(out.discarded_supplement, lines[i]);
  }
  if (Trim(out.content).empty()) throw FailFast("segment", "empty content");
  if (Trim(out.references_block).empty()) {
    throw FailFast("segment", "empty reference block");
  }
  return out;
}

double AverageWordLength(const std::vector<std::string> &words) {
  if (words.empty()) return 0.0;
  size_t chars = 0;
  for (const auto &w : words) chars += CodePointCount(w);
  return static_cast<double>(chars) / static_cast<double>(words.size());
}

std::vector<ContentChunk> Chunk(std::string_view content, size_t chunk_len) {
  if (chunk_len == 0) throw UsageError("chunk length must be >= 1");
  std::vector<std::string> words = SplitWhitespace(content);
  std::vector<ContentChunk> chunks;
  for (size_t i = 0; i < words.size(); i += chunk_len) {
    ContentChunk c;
    c.index = static_cast<int>(chunks.size());
    size_t end = std::min(words.size(), i + chunk_len);
    c.words.assign(std::make_move_iterator(words.begin() + i),
                   std::make_move_iterator(words.begin() + end));
    c.avg_word_len = AverageWordLength(c.words);
    chunks.push_back(std::move(c));
  }
  return chunks;
}

std::vector<ContentChunk> FilterChunks(const std::vector<ContentChunk> &chunks,
                                       double min_avg_len) {
  std::vector<ContentChunk> kept;
  for (const auto &c : chunks) {
    if (c.avg_word_len >= min_avg_len) kept.push_back(c);
  }
  return kept;
}

const ContentChunk &FirstChunk(const std::vector<ContentChunk> &chunks) {
  if (chunks.empty()) throw FailFast("chunk", "no content chunks");
  for (const auto &c : chunks) {
    if (c.index == 0) return c;
  }
  return chunks.front();
}

}  // namespace citeprint::preprocess
