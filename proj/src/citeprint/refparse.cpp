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

#include "citeprint/refparse.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <set>

#include "citeprint/error.hpp"
#include "citeprint/text.hpp"

namespace citeprint::refparse {
namespace {

// Abbreviations that commonly end a wrapped line in the middle of an entry.
const std::set<std::string, std::less<>> kAbbreviations = {
    "al.",    "Proc.",  "Conf.", "Soc.",   "Chem.",  "Phys.",  "Rev.",
    "Lett.",  "Int.",   "Ed.",   "Eds.",   "eds.",   "ed.",    "J.",
    "Vol.",   "vol.",   "pp.",   "No.",    "no.",    "Trans.", "Univ.",
    "Natl.",  "Acad.",  "Sci.",  "Am.",    "Angew.", "Nat.",   "Commun.",
    "Mater.", "Math.",  "Comput.", "Mach.", "Learn.", "Res.",  "Stat.",
    "Assoc.", "Eng.",   "Syst.", "Appl.",  "Theor.", "Biol.",  "Adv.",
    "Opt.",   "Astrophys.", "Astron.", "Mon.", "Not.", "Inf.", "Process.",
    "Symp.",  "Workshop.", "Annu.", "Meet.", "Linguist.", "Lang.", "Med."};

const std::set<std::string, std::less<>> kConjunctions = {"and", "&", "und"};
const std::set<std::string, std::less<>> kSuffixes = {"Jr.", "Jr", "Sr.",
                                                      "Sr", "II", "III", "IV"};

bool IsDigit(char c) { return c >= '0' && c <= '9'; }

// "J", "J.", "J.K.", "J.-P.", "Th.".
bool IsInitialToken(std::string_view tok) {
  size_t pos = 0;
  int segments = 0;
  bool all_dotted = true;
  while (pos < tok.size()) {
    char32_t cp = NextCodePoint(tok, pos);
    if (!IsUpper(cp)) return false;
    ++segments;
    size_t save = pos;
    if (pos < tok.size()) {
      char32_t next = NextCodePoint(tok, pos);
      if (IsLetter(next) && !IsUpper(next)) {
        // Two-letter abbreviation such as "Th." must carry a dot.
        if (pos >= tok.size() || tok[pos] != '.') return false;
      } else {
        pos = save;
      }
    }
    if (pos < tok.size() && tok[pos] == '.') {
      ++pos;
    } else {
      all_dotted = false;
    }
    if (pos < tok.size() && tok[pos] == '-') ++pos;
  }
  if (segments == 0) return false;
  return segments == 1 || all_dotted;
}

bool IsInitialsOnly(const std::vector<std::string> &unit) {
  if (unit.empty()) return false;
  return std::all_of(unit.begin(), unit.end(),
                     [](const std::string &t) { return IsInitialToken(t); });
}

// Undotted initials following a surname ("Smith JA").
bool IsUndottedInitials(std::string_view tok) {
  if (tok.empty() || tok.size() > 3) return false;
  return std::all_of(tok.begin(), tok.end(),
                     [](char c) { return c >= 'A' && c <= 'Z'; });
}

bool StartsCapitalized(std::string_view tok) {
  size_t pos = 0;
  return !tok.empty() && IsUpper(NextCodePoint(tok, pos));
}

bool YearAt(std::string_view s, size_t i) {
  if (i + 4 > s.size()) return false;
  if (!((s[i] == '1' && s[i + 1] == '9') || (s[i] == '2' && s[i + 1] == '0'))) {
    return false;
  }
  if (!IsDigit(s[i + 2]) || !IsDigit(s[i + 3])) return false;
  if (i > 0 && IsDigit(s[i - 1])) return false;
  if (i + 4 < s.size() && IsDigit(s[i + 4])) return false;
  return true;
}

bool ContainsYear(std::string_view s) {
  for (size_t i = 0; i + 4 <= s.size(); ++i) {
    if (YearAt(s, i)) return true;
  }
  return false;
}

// Length of a leading "[12]" index, or 0.
size_t BracketIndexLength(std::string_view t) {
  if (t.empty() || t[0] != '[') return 0;
  size_t i = 1;
  while (i < t.size() && IsDigit(t[i])) ++i;
  if (i == 1 || i >= t.size() || t[i] != ']') return 0;
  return i + 1;
}

// Length of a leading "12." or "12)" index followed by a space, or 0.
size_t NumberIndexLength(std::string_view t) {
  size_t i = 0;
  while (i < t.size() && IsDigit(t[i])) ++i;
  if (i == 0 || i > 4 || i + 1 >= t.size()) return 0;
  if (t[i] != '.' && t[i] != ')') return 0;
  if (!IsAsciiSpace(t[i + 1])) return 0;
  return i + 1;
}

bool LooksLikeEntryStart(std::string_view line) {
  line = Trim(line);
  if (line.empty()) return false;
  if (BracketIndexLength(line) || NumberIndexLength(line)) return true;
  size_t pos = 0;
  return IsUpper(NextCodePoint(line, pos));
}

std::string LastToken(std::string_view line) {
  auto toks = SplitWhitespace(line);
  return toks.empty() ? std::string() : toks.back();
}

void Flush(std::vector<std::string> &out, std::string &cur) {
  std::string_view t = Trim(cur);
  if (!t.empty()) out.emplace_back(t);
  cur.clear();
}

void AppendSpaced(std::string &cur, std::string_view piece) {
  piece = Trim(piece);
  if (piece.empty()) return;
  if (!cur.empty()) cur += ' ';
  cur += piece;
}

std::vector<std::string> SplitOnChars(std::string_view s,
                                      const std::vector<char32_t> &delims) {
  std::vector<std::string> out;
  std::string cur;
  size_t pos = 0;
  while (pos < s.size()) {
    size_t before = pos;
    char32_t cp = NextCodePoint(s, pos);
    if (std::find(delims.begin(), delims.end(), cp) != delims.end()) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.append(s.substr(before, pos - before));
    }
  }
  out.push_back(cur);
  return out;
}

std::string StripTokenPunct(std::string_view tok) {
  while (!tok.empty() && (tok.back() == ',' || tok.back() == ';' ||
                          tok.back() == ':')) {
    tok.remove_suffix(1);
  }
  return std::string(tok);
}

// Drops non-letters at both ends (keeps internal hyphens and apostrophes).
std::string NormalizeSurname(std::string_view tok) {
  std::vector<std::pair<size_t, size_t>> letters;  // byte ranges of letters
  size_t pos = 0;
  size_t first = std::string_view::npos, last_end = 0;
  while (pos < tok.size()) {
    size_t before = pos;
    char32_t cp = NextCodePoint(tok, pos);
    if (IsLetter(cp)) {
      if (first == std::string_view::npos) first = before;
      last_end = pos;
    }
  }
  if (first == std::string_view::npos) return {};
  return ToLowerUtf8(tok.substr(first, last_end - first));
}

using Unit = std::vector<std::string>;

// Splits a piece into name units at conjunctions and removes "et al.".
std::vector<Unit> UnitsOf(std::string_view piece) {
  std::vector<Unit> units;
  Unit cur;
  auto toks = SplitWhitespace(piece);
  for (size_t i = 0; i < toks.size(); ++i) {
    std::string t = StripTokenPunct(toks[i]);
    if (t.empty()) continue;
    if (t == "et" && i + 1 < toks.size() && StartsWith(toks[i + 1], "al")) {
      ++i;
      continue;
    }
    if (t == "et.al." || t == "etal." || t == "al.") continue;
    if (kConjunctions.count(t)) {
      if (!cur.empty()) units.push_back(std::move(cur));
      cur.clear();
      continue;
    }
    cur.push_back(std::move(t));
  }
  if (!cur.empty()) units.push_back(std::move(cur));
  return units;
}

bool HasDigit(const Unit &u) {
  for (const auto &t : u) {
    for (char c : t) {
      if (IsDigit(c)) return true;
    }
  }
  return false;
}

std::string SurnameOf(const Unit &u) {
  if (u.size() >= 2 && IsUndottedInitials(u.back()) &&
      !IsInitialToken(u.front())) {
    return NormalizeSurname(u[u.size() - 2]);
  }
  for (auto it = u.rbegin(); it != u.rend(); ++it) {
    if (IsInitialToken(*it) || kSuffixes.count(*it)) continue;
    return NormalizeSurname(*it);
  }
  return {};
}

}  // namespace

const char *SeparatorName(Separator s) {
  switch (s) {
    case Separator::kBracketIndex: return "bracket_index";
    case Separator::kDotEndOfLine: return "dot_end_of_line";
    case Separator::kYearPattern: return "year_pattern";
    case Separator::kSemicolonBlock: return "semicolon_block";
  }
  return "unknown";
}

std::vector<std::string> SplitWith(std::string_view block, Separator sep) {
  std::vector<std::string_view> lines = SplitLines(block);
  std::vector<std::string> out;
  std::string cur;
  switch (sep) {
    case Separator::kBracketIndex: {
      bool started = false;
      for (auto line : lines) {
        std::string_view t = Trim(line);
        if (BracketIndexLength(t)) {
          if (started) Flush(out, cur);
          started = true;
        }
        if (started) AppendSpaced(cur, t);
      }
      if (started) Flush(out, cur);
      break;
    }
    case Separator::kDotEndOfLine: {
      for (size_t i = 0; i < lines.size(); ++i) {
        std::string_view t = Trim(lines[i]);
        AppendSpaced(cur, t);
        if (!EndsWith(t, ".")) continue;
        std::string last = LastToken(t);
        if (IsInitialToken(last) || kAbbreviations.count(last)) continue;
        if (i + 1 < lines.size() && !LooksLikeEntryStart(lines[i + 1])) continue;
        Flush(out, cur);
      }
      Flush(out, cur);
      break;
    }
    case Separator::kYearPattern: {
      std::string_view prev;
      for (auto line : lines) {
        std::string_view t = Trim(line);
        if (!cur.empty() && ContainsYear(cur) && LooksLikeEntryStart(t) &&
            !EndsWith(prev, ",") && !EndsWith(prev, "-")) {
          Flush(out, cur);
        }
        AppendSpaced(cur, t);
        prev = t;
      }
      Flush(out, cur);
      break;
    }
    case Separator::kSemicolonBlock: {
      std::string joined;
      for (auto line : lines) AppendSpaced(joined, line);
      for (auto &piece : SplitOnChars(joined, {U';'})) Flush(out, piece);
      break;
    }
  }
  return out;
}

SplitReport Assess(const std::vector<std::string> &refs, Separator sep,
                   const SplitOptions &options) {
  SplitReport report;
  report.separator_used = sep;
  report.n_refs = refs.size();
  if (refs.empty()) return report;
  std::vector<size_t> lengths;
  for (const auto &r : refs) lengths.push_back(CodePointCount(r));
  std::sort(lengths.begin(), lengths.end());
  size_t n = lengths.size();
  double median = (n % 2) ? static_cast<double>(lengths[n / 2])
                          : 0.5 * static_cast<double>(lengths[n / 2 - 1] +
                                                      lengths[n / 2]);
  report.plausible = refs.size() >= options.min_refs &&
                     median >= static_cast<double>(options.min_median_len) &&
                     median <= static_cast<double>(options.max_median_len);
  return report;
}

std::pair<std::vector<std::string>, SplitReport> SplitReferences(
    std::string_view block, const SplitOptions &options) {
  if (Trim(block).empty()) throw FailFast("refparse", "empty reference block");
  for (Separator sep : {Separator::kBracketIndex, Separator::kDotEndOfLine,
                        Separator::kYearPattern, Separator::kSemicolonBlock}) {
    auto refs = SplitWith(block, sep);
    SplitReport report = Assess(refs, sep, options);
    if (report.plausible) return {std::move(refs), report};
  }
  throw FailFast("refparse", "no separator yields a plausible split");
}

namespace {

// "Lee C. Effects of..." where the '.' at `dot` closes a trailing Vancouver
// initial rather than a middle initial as in "John A. Smith".
bool EndsVancouverList(std::string_view s, size_t word_start, size_t dot) {
  std::string_view word = s.substr(word_start, dot - word_start);
  if (!IsUndottedInitials(word) || word_start < 2) return false;
  size_t p_end = word_start - 1;
  size_t p_start = s.rfind(' ', p_end - 1);
  p_start = p_start == std::string_view::npos ? 0 : p_start + 1;
  std::string_view prev = s.substr(p_start, p_end - p_start);
  if (prev.empty() || !StartsCapitalized(prev) || IsInitialToken(prev) ||
      prev.back() == ',' || prev.back() == '.') {
    return false;
  }
  auto tokens = SplitWhitespace(s.substr(dot + 1));
  if (tokens.size() < 2) return false;
  const std::string &next = tokens[0];
  if (next.back() == ',' || next.back() == '.' || IsInitialToken(next)) return false;
  return !kConjunctions.count(tokens[1]);
}

}  // namespace

std::string AuthorZone(std::string_view reference) {
  std::string_view s = Trim(reference);
  if (size_t n = BracketIndexLength(s)) {
    s = Trim(s.substr(n));
  } else if (size_t m = NumberIndexLength(s)) {
    s = Trim(s.substr(m));
  }
  size_t cut = s.size();
  size_t word_start = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '"' || c == '(' || c == '[' || YearAt(s, i) ||
        StartsWith(s.substr(i), "\xE2\x80\x9C")) {
      cut = i;
      break;
    }
    if (IsAsciiSpace(c)) {
      word_start = i + 1;
      continue;
    }
    if (c == ':' && (i + 1 == s.size() || IsAsciiSpace(s[i + 1]))) {
      cut = i;
      break;
    }
    if (c == '.' && (i + 1 == s.size() || IsAsciiSpace(s[i + 1]))) {
      std::string_view word = s.substr(word_start, i + 1 - word_start);
      if ((!IsInitialToken(word) && !kSuffixes.count(word) && word != "al." &&
           word.size() > 1) ||
          EndsVancouverList(s, word_start, i)) {
        cut = i;
        break;
      }
    }
  }
  std::string_view zone = Trim(s.substr(0, cut));
  while (!zone.empty()) {
    char b = zone.back();
    if (b == ',' || b == ';' || b == ':' || b == '&' || IsAsciiSpace(b)) {
      zone.remove_suffix(1);
    } else {
      break;
    }
  }
  return std::string(zone);
}

char32_t InferDelimiter(std::string_view zone) {
  std::map<char32_t, int> counts;
  size_t pos = 0;
  size_t seg_start = 0;  // start of the letters preceding the current char
  while (pos < zone.size()) {
    size_t before = pos;
    char32_t cp = NextCodePoint(zone, pos);
    if (IsLetter(cp) || (cp >= '0' && cp <= '9')) continue;
    if (cp < 0x80 && IsAsciiSpace(static_cast<char>(cp))) {
      seg_start = pos;
      continue;
    }
    std::string_view seg = zone.substr(seg_start, before - seg_start);
    seg_start = pos;
    if (cp == '-' || cp == '\'' || cp == 0x2019 || cp == 0x2010) continue;
    if (cp == '.' && IsInitialToken(std::string(seg) + ".")) continue;
    ++counts[cp];
  }
  if (counts.empty()) return 0;
  static constexpr std::array<char32_t, 4> kPriority = {U',', U';', U'&', U'.'};
  auto rank = [](char32_t c) {
    auto it = std::find(kPriority.begin(), kPriority.end(), c);
    return static_cast<size_t>(it - kPriority.begin());
  };
  char32_t best = 0;
  int best_count = -1;
  for (auto [c, n] : counts) {
    if (n > best_count || (n == best_count && rank(c) < rank(best))) {
      best = c;
      best_count = n;
    }
  }
  return best;
}

CitedReference ExtractSurnames(std::string_view reference) {
  CitedReference out;
  out.raw = std::string(Trim(reference));
  std::string zone = AuthorZone(reference);
  if (zone.empty()) return out;

  std::vector<char32_t> delims;
  char32_t d = InferDelimiter(zone);
  if (d != 0) delims.push_back(d);
  if (d == U',') delims.push_back(U';');
  if (d == U';') delims.push_back(U',');

  std::vector<Unit> units;
  for (const auto &piece : SplitOnChars(zone, delims)) {
    for (auto &u : UnitsOf(piece)) units.push_back(std::move(u));
  }
  if (units.empty()) return out;

  auto given_like = [](const Unit &u) {
    return u.size() <= 3 &&
           std::all_of(u.begin(), u.end(), [](const std::string &t) {
             return StartsCapitalized(t);
           });
  };
  bool inverted_first = units.size() >= 2 && units[0].size() == 1 &&
                        !IsInitialToken(units[0][0]) && given_like(units[1]) &&
                        units[1].size() <= 2;
  bool initials_first = IsInitialToken(units[0][0]);

  std::vector<std::string> surnames;
  for (size_t i = 0; i < units.size(); ++i) {
    const Unit &u = units[i];
    if (IsInitialsOnly(u)) continue;
    if (HasDigit(u)) break;
    if (i == 0 && inverted_first) {
      surnames.push_back(NormalizeSurname(u[0]));
      ++i;
      continue;
    }
    if (initials_first && i > 0 && !IsInitialToken(u[0])) break;
    surnames.push_back(SurnameOf(u));
  }
  for (auto &s : surnames) {
    if (s.empty()) continue;
    if (!out.surnames.empty() && out.surnames.back() == s) continue;
    out.surnames.push_back(std::move(s));
  }
  return out;
}

std::vector<CitedReference> ParseBlock(std::string_view block,
                                       const SplitOptions &options) {
  auto [refs, report] = SplitReferences(block, options);
  std::vector<CitedReference> out;
  out.reserve(refs.size());
  size_t named = 0;
  for (const auto &r : refs) {
    out.push_back(ExtractSurnames(r));
    if (!out.back().surnames.empty()) ++named;
  }
  if (static_cast<double>(named) <
      options.min_named_fraction * static_cast<double>(out.size())) {
    throw FailFast("refparse", "too few entries with author names");
  }
  return out;
}

}  // namespace citeprint::refparse
