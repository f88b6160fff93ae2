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

// Bibliography splitting and cited-surname extraction.
//
// A references block is split by trying separators in a fixed priority order
// until one yields a plausible split. Each reference then has its author zone
// isolated (the prefix before the first quote, bracket or year), the name
// delimiter inferred as the most frequent punctuation character, and the last
// part of every name kept as the surname.

#ifndef CITEPRINT_REFPARSE_HPP_
#define CITEPRINT_REFPARSE_HPP_

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace citeprint::refparse {

enum class Separator {
  kBracketIndex,    // "[x]" at the start of a line
  kDotEndOfLine,    // '.' at the end of a line
  kYearPattern,     // new author-year entry after a line containing a year
  kSemicolonBlock,  // one paragraph, entries separated by ';'
};

const char *SeparatorName(Separator s);

struct CitedReference {
  std::string raw;
  std::vector<std::string> surnames;  // lowercased, in citation order
};

struct SplitReport {
  Separator separator_used = Separator::kBracketIndex;
  size_t n_refs = 0;
  bool plausible = false;
};

struct SplitOptions {
  size_t min_refs = 3;
  size_t min_median_len = 40;
  size_t max_median_len = 2000;
  // parse_block fails when fewer entries than this carry any surname.
  double min_named_fraction = 0.5;
};

// Splits with one specific separator, without judging plausibility.
std::vector<std::string> SplitWith(std::string_view block, Separator sep);

SplitReport Assess(const std::vector<std::string> &refs, Separator sep,
                   const SplitOptions &options = {});

// Returns the first plausible split. Throws FailFast when none is.
std::pair<std::vector<std::string>, SplitReport> SplitReferences(
    std::string_view block, const SplitOptions &options = {});

// Leading index removed, cut before the first quote, bracket, year, or
// sentence end after a full word.
std::string AuthorZone(std::string_view reference);

// Most frequent non-alphanumeric, non-whitespace character of the zone.
// Dots closing an initial and name-internal hyphens/apostrophes do not
// count. Returns 0 when the zone has no candidate.
char32_t InferDelimiter(std::string_view zone);

CitedReference ExtractSurnames(std::string_view reference);

std::vector<CitedReference> ParseBlock(std::string_view block,
                                       const SplitOptions &options = {});

}  // namespace citeprint::refparse

#endif  // CITEPRINT_REFPARSE_HPP_
