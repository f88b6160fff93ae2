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

#ifndef CITEPRINT_TEXT_HPP_
#define CITEPRINT_TEXT_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace citeprint {

// Maximal runs of non-whitespace characters.
std::vector<std::string> SplitWhitespace(std::string_view text);
std::vector<std::string_view> SplitLines(std::string_view text);
std::string_view Trim(std::string_view s);
std::string Join(const std::vector<std::string> &parts, std::string_view sep);

bool IsAsciiSpace(char c);
bool IsAsciiAlnum(char c);
bool StartsWith(std::string_view s, std::string_view prefix);
bool EndsWith(std::string_view s, std::string_view suffix);

// Decodes one UTF-8 code point starting at `pos`; advances `pos`. Invalid
// bytes decode as themselves.
char32_t NextCodePoint(std::string_view s, size_t &pos);
void AppendUtf8(std::string &out, char32_t cp);

// Letter tests cover ASCII plus Latin-1 Supplement and Latin Extended-A.
bool IsLetter(char32_t cp);
bool IsUpper(char32_t cp);
char32_t ToLower(char32_t cp);
std::string ToLowerUtf8(std::string_view s);
size_t CodePointCount(std::string_view s);

// 64-bit FNV-1a.
uint64_t Fnv1a64(std::string_view data, uint64_t basis = 0xcbf29ce484222325ULL);
uint64_t SplitMix64(uint64_t x);
// Stable hash of (key, seed), independent of any iteration order.
uint64_t KeyedHash(std::string_view key, uint64_t seed);

std::string ReadFile(const std::string &path);
void WriteFile(const std::string &path, std::string_view data);

}  // namespace citeprint

#endif  // CITEPRINT_TEXT_HPP_
