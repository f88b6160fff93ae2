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

#include "citeprint/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <random>
#include <set>

#include "citeprint/error.hpp"
#include "citeprint/text.hpp"
#include "json.hpp"

namespace citeprint::synth {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}
  uint64_t Next() { return gen_(); }
  double Uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  size_t Below(size_t n) { return static_cast<size_t>(gen_() % n); }
  int Between(int lo, int hi) { return lo + static_cast<int>(Below(hi - lo + 1)); }
  bool Chance(double p) { return Uniform() < p; }
  template <typename T>
  const T &Pick(const std::vector<T> &v) { return v[Below(v.size())]; }

 private:
  std::mt19937_64 gen_;
};

const std::vector<std::string> kFunctionWords = {
    "the", "of", "and", "a", "in", "to", "is", "we", "for", "on",
    "that", "with", "by", "as", "this", "are", "be", "it", "an", "at"};

const std::vector<std::string> kFirstNames = {
    "Anna", "Bruno", "Clara", "David", "Elena", "Felix", "Greta", "Hugo",
    "Irene", "Jonas", "Karla", "Lukas", "Maria", "Niklas", "Olga", "Paul",
    "Rosa", "Simon", "Tanja", "Ulrich", "Vera", "Walter", "Yara", "Zeno",
    "Alice", "Boris", "Celine", "Dmitri", "Emma", "Fabian", "Hanna", "Ivan",
    "Julia", "Kevin", "Laura", "Marco", "Nora", "Oscar", "Petra", "Ruben"};

const std::vector<std::string> kStyles = {"ieee", "apa", "mla", "vancouver",
                                          "chicago", "lncs"};

std::string PseudoWord(Rng &rng, int min_syll, int max_syll) {
  static const std::string consonants = "bcdfghklmnprstvz";
  static const std::string vowels = "aeiou";
  std::string w;
  int n = rng.Between(min_syll, max_syll);
  for (int i = 0; i < n; ++i) {
    w += consonants[rng.Below(consonants.size())];
    w += vowels[rng.Below(vowels.size())];
    if (rng.Chance(0.4)) w += consonants[rng.Below(consonants.size())];
  }
  return w;
}

std::string Capitalize(std::string w) {
  if (!w.empty() && w[0] >= 'a' && w[0] <= 'z') w[0] = static_cast<char>(w[0] - 'a' + 'A');
  return w;
}

std::vector<std::string> DistinctWords(Rng &rng, size_t n, std::set<std::string> &used,
                                       int min_syll, int max_syll, bool capital) {
  std::vector<std::string> out;
  while (out.size() < n) {
    std::string w = PseudoWord(rng, min_syll, max_syll);
    if (w.size() < 4 || !used.insert(w).second) continue;
    out.push_back(capital ? Capitalize(w) : w);
  }
  return out;
}

struct Person {
  std::string first;
  std::string surname;
  std::string Full() const { return first + " " + surname; }
};

constexpr int kFields = 4;

// Vocabulary shared by the corpus generator and the calibration set. Every
// persona belongs to a field; general words come from a pool common to all
// fields and from the persona's field pool.
struct World {
  std::vector<std::string> common;
  std::vector<std::vector<std::string>> field_words;
  std::vector<int> field_of;                         // per persona
  std::vector<std::vector<std::string>> topics;      // per persona
  std::vector<std::vector<Person>> communities;      // per persona
  std::vector<Person> cited;                         // global reference pool
  std::vector<Person> outsiders;
  std::vector<std::string> candidate_surnames;
};

World MakeWorld(Rng &rng, const std::vector<int> &field_of, int n_candidates,
                double topic_overlap = 0.0) {
  World w;
  const int n_personas = static_cast<int>(field_of.size());
  w.field_of = field_of;
  std::set<std::string> used(kFunctionWords.begin(), kFunctionWords.end());
  w.common = DistinctWords(rng, 1300, used, 2, 4, false);
  for (int f = 0; f < kFields; ++f) w.field_words.push_back(DistinctWords(rng, 300, used, 2, 4, false));
  for (int p = 0; p < n_personas; ++p) {
    w.topics.push_back(DistinctWords(rng, 60, used, 2, 4, false));
  }
  const int shared = static_cast<int>(topic_overlap * 60.0);
  for (int p = 0; p < n_personas && n_personas > 3; ++p) {
    const auto &next = w.topics[(p + 3) % n_personas];
    for (int k = 0; k < shared; ++k) w.topics[p][k] = next[59 - k];
  }
  auto people = [&](size_t n) {
    std::vector<Person> out;
    for (auto &s : DistinctWords(rng, n, used, 2, 3, true)) out.push_back({rng.Pick(kFirstNames), s});
    return out;
  };
  // Neighbouring personas share a third of their citation community.
  std::vector<Person> ring = people(static_cast<size_t>(n_personas) * 8);
  for (int p = 0; p < n_personas; ++p) {
    std::vector<Person> pool;
    for (int k = 0; k < 12; ++k) pool.push_back(ring[(p * 8 + k) % ring.size()]);
    w.communities.push_back(std::move(pool));
  }
  w.cited = people(3000);
  w.outsiders = people(400);
  w.candidate_surnames = DistinctWords(rng, n_candidates, used, 2, 3, true);
  return w;
}

std::string DrawWord(Rng &rng, const World &w, const std::vector<int> &personas,
                     double topic_rate, double field_share = 0.5) {
  double u = rng.Uniform();
  int persona = rng.Pick(personas);
  if (u < topic_rate) return rng.Pick(w.topics[persona]);
  if (u < topic_rate + 0.25) return rng.Pick(kFunctionWords);
  const auto &pool = rng.Chance(field_share) ? w.field_words[w.field_of[persona]] : w.common;
  double z = rng.Uniform();
  return pool[static_cast<size_t>(z * z * static_cast<double>(pool.size()))];
}

std::string Sentences(Rng &rng, const World &w, const std::vector<int> &personas,
                      double topic_rate, int n_words, int words_per_line,
                      double field_share = 0.5) {
  std::string out;
  int in_sentence = 0, sentence_len = rng.Between(8, 20), on_line = 0;
  for (int i = 0; i < n_words; ++i) {
    std::string word = DrawWord(rng, w, personas, topic_rate, field_share);
    if (in_sentence == 0) word = Capitalize(word);
    ++in_sentence;
    if (in_sentence == sentence_len || i + 1 == n_words) {
      word += '.';
      in_sentence = 0;
      sentence_len = rng.Between(8, 20);
    }
    out += word;
    if (++on_line == words_per_line) {
      out += '\n';
      on_line = 0;
    } else {
      out += ' ';
    }
  }
  if (on_line != 0) out.back() = '\n';
  return out;
}

std::string TableBlock(Rng &rng, int n_tokens) {
  static const std::vector<std::string> tokens = {"0.1", "0.2", "x", "=", "y", "(a)",
                                                  "12", "+", "k", "n", "1.5", "-"};
  std::string out = "x";
  for (int i = 1; i < n_tokens; ++i) {
    out += (i % 10 == 0) ? '\n' : ' ';
    out += rng.Pick(tokens);
  }
  return out + "\n";
}

std::string Initial(const std::string &first) { return first.substr(0, 1) + "."; }

std::string Year(Rng &rng) { return std::to_string(rng.Between(1995, 2023)); }

std::string RefTitle(Rng &rng, const World &w) {
  std::string t = Capitalize(rng.Pick(w.common));
  int n = rng.Between(3, 7);
  for (int i = 0; i < n; ++i) t += " " + rng.Pick(w.common);
  return t;
}

std::string Venue(Rng &rng, const World &w) {
  return "Journal of " + Capitalize(rng.Pick(w.common)) + " " + Capitalize(rng.Pick(w.common));
}

// One formatted reference. Returns the surnames a reader would extract.
std::string FormatReference(Rng &rng, const World &w, const std::string &style, int index,
                            const std::vector<Person> &names,
                            std::vector<std::string> *surnames) {
  const size_t n = names.size();
  std::string year = Year(rng), title = RefTitle(rng, w), venue = Venue(rng, w);
  std::string vol = std::to_string(rng.Between(1, 60));
  std::string p1 = std::to_string(rng.Between(1, 400));
  std::string p2 = std::to_string(std::stoi(p1) + rng.Between(5, 30));
  std::string idx = std::to_string(index);
  std::string a;
  surnames->clear();
  for (const auto &p : names) surnames->push_back(ToLowerUtf8(p.surname));

  auto joined = [&](auto fmt, const std::string &sep, const std::string &last_sep) {
    std::string s;
    for (size_t i = 0; i < n; ++i) {
      if (i > 0) s += (i + 1 == n) ? last_sep : sep;
      s += fmt(names[i], i);
    }
    return s;
  };

  if (style == "ieee") {
    a = joined([](const Person &p, size_t) { return Initial(p.first) + " " + p.surname; },
               ", ", n == 2 ? " and " : ", and ");
    return "[" + idx + "] " + a + ", \"" + title + ",\" in Proc. " + venue + ", " + year +
           ", pp. " + p1 + "-" + p2 + ".";
  }
  if (style == "apa") {
    a = joined([](const Person &p, size_t) { return p.surname + ", " + Initial(p.first); },
               ", ", n == 2 ? " & " : ", & ");
    return a + " (" + year + "). " + title + ". " + venue + ", " + vol + ", " + p1 + "-" + p2 + ".";
  }
  if (style == "mla") {
    if (n >= 4) {
      surnames->resize(1);
      a = names[0].surname + ", " + names[0].first + ", et al";
    } else {
      a = joined(
          [](const Person &p, size_t i) {
            return i == 0 ? p.surname + ", " + p.first : p.first + " " + p.surname;
          },
          ", ", n == 2 ? ", and " : ", and ");
    }
    return a + ". \"" + title + ".\" " + venue + ", vol. " + vol + ", " + year + ", pp. " + p1 +
           "-" + p2 + ".";
  }
  if (style == "vancouver") {
    a = joined([](const Person &p, size_t) { return p.surname + " " + p.first.substr(0, 1); },
               ", ", ", ");
    return idx + ". " + a + ". " + title + ". " + venue + ". " + year + ";" + vol + ":" + p1 +
           "-" + p2 + ".";
  }
  if (style == "chicago") {
    a = joined(
        [](const Person &p, size_t i) {
          return i == 0 ? p.surname + ", " + p.first : p.first + " " + p.surname;
        },
        ", ", n == 2 ? " and " : ", and ");
    return a + ". " + year + ". \"" + title + ".\" " + venue + " " + vol + ": " + p1 + "-" + p2 +
           ".";
  }
  // lncs
  a = joined([](const Person &p, size_t) { return p.surname + ", " + Initial(p.first); }, ", ",
             ", ");
  return idx + ". " + a + ": " + title + ". " + venue + " " + vol + ", " + p1 + "-" + p2 + " (" +
         year + ")";
}

std::string Email(const Person &p, int k) {
  return ToLowerUtf8(p.first) + "." + ToLowerUtf8(p.surname) + "@univ" + std::to_string(k) + ".edu";
}

struct Candidate {
  Person person;
  std::vector<int> personas;
};

}  // namespace

SynthCorpus Generate(const SynthOptions &o) {
  if (o.n_authors < 1 || o.papers_per_author < 1) throw UsageError("synth: empty corpus requested");
  if (o.min_refs < 1 || o.max_refs < o.min_refs) throw UsageError("synth: bad reference range");
  Rng rng(o.seed);
  const int n_candidates = o.n_authors + o.n_ambiguous;
  const int n_personas = o.n_authors + 2 * o.n_ambiguous;
  // Candidates share one field; the personas behind an ambiguous name work
  // in two different other fields.
  std::vector<int> field_of(n_personas, 0);
  for (int e = 0; e < o.n_ambiguous; ++e) {
    field_of[o.n_authors + 2 * e] = 1 + (2 * e) % (kFields - 1);
    field_of[o.n_authors + 2 * e + 1] = 1 + (2 * e + 1) % (kFields - 1);
  }
  World w = MakeWorld(rng, field_of, n_candidates, o.topic_overlap);

  std::vector<Candidate> cands;
  for (int c = 0; c < n_candidates; ++c) {
    Candidate k;
    k.person = {kFirstNames[(c * 7 + 3) % kFirstNames.size()], w.candidate_surnames[c]};
    if (c < o.n_authors) {
      k.personas = {c};
    } else {
      int extra = c - o.n_authors;
      k.personas = {o.n_authors + 2 * extra, o.n_authors + 2 * extra + 1};
    }
    cands.push_back(k);
  }

  SynthCorpus corpus;
  for (int c = 0; c < n_candidates; ++c) {
    (c < o.n_authors ? corpus.candidate_names : corpus.ambiguous_names)
        .push_back(cands[c].person.Full());
  }

  for (int c = 0; c < n_candidates; ++c) {
    for (int i = 0; i < o.papers_per_author; ++i) {
      SynthPaper sp;
      Manuscript &m = sp.manuscript;
      std::vector<int> on_paper = {c};
      std::vector<int> personas = {cands[c].personas[i % cands[c].personas.size()]};
      if (o.n_authors > 1 && rng.Chance(o.coauthor_rate)) {
        int b;
        if (c < o.n_authors) {
          b = static_cast<int>(rng.Below(o.n_authors - 1));
          if (b >= c) ++b;
        } else {
          b = static_cast<int>(rng.Below(o.n_authors));
        }
        on_paper.push_back(b);
        personas.push_back(cands[b].personas[0]);
      }
      std::vector<Person> people;
      for (int k : on_paper) people.push_back(cands[k].person);
      if (rng.Chance(o.outsider_rate)) {
        int n_out = rng.Between(1, 2);
        for (int k = 0; k < n_out; ++k) people.push_back(rng.Pick(w.outsiders));
      }
      if (rng.Chance(o.initials_rate)) {
        const Person &p = rng.Pick(w.outsiders);
        people.push_back({Initial(p.first), p.surname});
      }
      for (size_t k = people.size(); k > 1; --k) std::swap(people[k - 1], people[rng.Below(k)]);
      std::set<std::string> seen;
      for (const auto &p : people) {
        if (seen.insert(p.Full()).second) m.authors.push_back(p.Full());
      }

      m.title = Capitalize(DrawWord(rng, w, personas, 0.5));
      for (int k = 0; k < 7; ++k) m.title += " " + DrawWord(rng, w, personas, 0.4);
      std::string abstract = Sentences(rng, w, personas, o.topic_rate, rng.Between(90, 130),
                                       1000, o.abstract_field_share);
      m.abstract = std::string(Trim(abstract));

      std::string text = m.title + "\n" + Join(m.authors, ", ") + "\n";
      for (size_t k = 0; k < people.size(); ++k) text += Email(people[k], static_cast<int>(k)) + "\n";
      text += "Abstract\n" + m.abstract + "\n1 Introduction\n";
      int remaining = o.body_words;
      int section = 2, page = 1;
      const std::vector<std::string> headings = {"Methods", "Results", "Conclusion"};
      bool table = rng.Chance(o.table_block_rate);
      while (remaining > 0) {
        int para = std::min(remaining, rng.Between(150, 400));
        text += Sentences(rng, w, personas, o.topic_rate, para, 14);
        remaining -= para;
        if (table) {
          text += TableBlock(rng, rng.Between(600, 800));
          table = false;
        }
        if (rng.Chance(0.3)) text += std::to_string(page++) + "\n";
        if (remaining > 0 && rng.Chance(0.3) && section - 2 < static_cast<int>(headings.size())) {
          text += std::to_string(section) + " " + headings[section - 2] + "\n";
          ++section;
        }
      }

      sp.reference_style = kStyles[rng.Below(kStyles.size())];
      text += "References\n";
      int n_refs = rng.Between(o.min_refs, o.max_refs);
      for (int r = 0; r < n_refs; ++r) {
        double u = rng.Uniform();
        int n_names = u < 0.3 ? 1 : u < 0.65 ? 2 : u < 0.85 ? 3 : 4;
        std::vector<Person> names;
        std::set<std::string> used;
        bool self = rng.Chance(o.self_cite_rate);
        for (int k = 0; k < n_names; ++k) {
          Person p;
          if (self && k == 0) {
            p = cands[rng.Pick(on_paper)].person;
          } else if (rng.Chance(o.community_rate)) {
            p = rng.Pick(w.communities[rng.Pick(personas)]);
          } else {
            p = rng.Pick(w.cited);
          }
          if (used.insert(p.surname).second) names.push_back(p);
        }
        std::vector<std::string> surnames;
        text += FormatReference(rng, w, sp.reference_style, r + 1, names, &surnames) + "\n";
        sp.reference_surnames.push_back(std::move(surnames));
      }
      if (rng.Chance(o.appendix_rate)) {
        text += "Appendix\n" + Sentences(rng, w, personas, o.topic_rate, 150, 14);
      }
      m.raw_text = std::move(text);
      corpus.papers.push_back(std::move(sp));
    }
  }

  for (size_t k = corpus.papers.size(); k > 1; --k) {
    std::swap(corpus.papers[k - 1], corpus.papers[rng.Below(k)]);
  }
  for (size_t k = 0; k < corpus.papers.size(); ++k) {
    char id[32];
    std::snprintf(id, sizeof id, "2401.%05zu", k + 1);
    corpus.papers[k].manuscript.id = id;
  }
  return corpus;
}

void WriteCorpus(const SynthCorpus &corpus, const std::string &dir) {
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "texts", ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
  std::string lines;
  json truth;
  truth["candidates"] = corpus.candidate_names;
  truth["ambiguous"] = corpus.ambiguous_names;
  truth["papers"] = json::array();
  for (const auto &sp : corpus.papers) {
    const Manuscript &m = sp.manuscript;
    std::string rel = "texts/" + m.id + ".txt";
    WriteFile((fs::path(dir) / rel).string(), m.raw_text);
    lines += json{{"id", m.id},
                  {"title", m.title},
                  {"abstract", m.abstract},
                  {"authors", m.authors},
                  {"text_path", rel}}
                 .dump() +
             "\n";
    truth["papers"].push_back(
        {{"id", m.id}, {"style", sp.reference_style}, {"references", sp.reference_surnames}});
  }
  WriteFile((fs::path(dir) / "corpus.jsonl").string(), lines);
  WriteFile((fs::path(dir) / "truth.json").string(), truth.dump() + "\n");
}

std::vector<Manuscript> ReadCorpus(const std::string &path) {
  const std::string data = ReadFile(path);
  const fs::path base = fs::path(path).parent_path();
  std::vector<Manuscript> out;
  std::set<std::string> ids;
  size_t line_no = 0;
  for (auto line : SplitLines(data)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw DataError(where + ": malformed corpus record");
    Manuscript m;
    try {
      m.id = j.at("id").get<std::string>();
      m.title = j.value("title", "");
      m.abstract = j.value("abstract", "");
      m.authors = j.at("authors").get<std::vector<std::string>>();
      if (j.contains("text")) {
        m.raw_text = j.at("text").get<std::string>();
      } else {
        fs::path text_path = j.at("text_path").get<std::string>();
        if (text_path.is_relative()) text_path = base / text_path;
        m.raw_text = ReadFile(text_path.string());
      }
    } catch (const json::exception &e) {
      throw DataError(where + ": " + e.what());
    }
    if (m.id.empty()) throw DataError(where + ": empty id");
    if (m.authors.empty()) throw DataError(where + ": manuscript " + m.id + " lists no authors");
    if (!ids.insert(m.id).second) throw DataError(where + ": duplicate id " + m.id);
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<disambig::CalibrationAuthor> CalibrationSet(TextEncoder &encoder, uint64_t seed,
                                                        int abstracts_each) {
  Rng rng(seed);
  const int n_unique = 20, n_ambiguous = 20;
  const int n_personas = n_unique + 2 * n_ambiguous;
  std::vector<int> field_of(n_personas);
  for (int a = 0; a < n_unique; ++a) field_of[a] = a % kFields;
  for (int e = 0; e < n_ambiguous; ++e) {
    int f = e % kFields;
    field_of[n_unique + 2 * e] = f;
    field_of[n_unique + 2 * e + 1] = (f + 1 + (e / kFields) % (kFields - 1)) % kFields;
  }
  World w = MakeWorld(rng, field_of, 0);
  std::vector<disambig::CalibrationAuthor> out;
  auto abstract = [&](std::vector<int> personas) {
    return Sentences(rng, w, personas, SynthOptions{}.topic_rate, rng.Between(90, 130), 1000,
                     kAbstractFieldShare);
  };
  // Co-authors come from the persona's own field.
  auto partner = [&](int own) {
    std::vector<int> same;
    for (int p = 0; p < n_personas; ++p) {
      if (p != own && field_of[p] == field_of[own]) same.push_back(p);
    }
    return rng.Pick(same);
  };
  for (int a = 0; a < n_unique + n_ambiguous; ++a) {
    disambig::CalibrationAuthor author;
    author.ambiguous = a >= n_unique;
    for (int k = 0; k < abstracts_each; ++k) {
      int own = author.ambiguous ? n_unique + 2 * (a - n_unique) + (k % 2) : a;
      // Mirrors the corpus: some papers are co-authored with another
      // persona, a few are off-topic.
      double u = rng.Uniform();
      std::vector<int> personas = {own};
      if (u < 0.2) {
        personas.push_back(partner(own));
      } else if (u < 0.25) {
        personas = {static_cast<int>(rng.Below(n_personas))};
      }
      author.abstracts.push_back(encoder.Encode(abstract(personas)));
    }
    out.push_back(std::move(author));
  }
  return out;
}

}  // namespace citeprint::synth
