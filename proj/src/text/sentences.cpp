#include "ehrcheck/text/sentences.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace ehrcheck::text {

namespace {

// Abbreviations that precede the word they modify; a period after them never
// ends a sentence.
constexpr std::array<std::string_view, 18> kTitleAbbrevs{
    "dr", "mr", "mrs", "ms", "prof", "sr", "st", "mt", "vs", "e.g", "i.e", "cf", "approx", "fig", "ref", "no",
    "nos", "dept"};

// Abbreviations that may also end a sentence; split only before a capital.
constexpr std::array<std::string_view, 38> kClinicalAbbrevs{
    "pt",  "pts", "b.i.d", "t.i.d", "q.i.d", "q.d",  "q.h.s", "h.s", "p.o", "p.r.n", "i.v", "i.m", "s.c",
    "q.o.d", "a.m", "p.m", "hx",  "dx",  "tx",  "rx",  "sx",  "fx",  "yo",   "y.o",  "etc", "jr",  "inc",
    "co",  "ltd", "mg",  "mcg", "ml", "hr",  "hrs", "min", "wk",  "wks", "sec"};

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']' || c == '}'; }

bool contains(auto const& list, std::string_view w) {
  return std::find(list.begin(), list.end(), w) != list.end();
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// The whitespace-delimited word ending at `dot` (exclusive of the dot), with
// leading brackets/quotes stripped.
std::string_view word_before(std::string_view text, std::size_t dot, std::size_t& word_start) {
  std::size_t b = dot;
  while (b > 0 && !is_space(text[b - 1])) --b;
  word_start = b;
  while (b < dot && (text[b] == '(' || text[b] == '[' || text[b] == '"' || text[b] == '\'')) ++b;
  return text.substr(b, dot - b);
}

bool line_leading(std::string_view text, std::size_t word_start) {
  std::size_t k = word_start;
  while (k > 0 && (text[k - 1] == ' ' || text[k - 1] == '\t')) --k;
  return k == 0 || text[k - 1] == '\n' || text[k - 1] == '\r';
}

bool all_digits(std::string_view w) {
  return !w.empty() && std::all_of(w.begin(), w.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

// Decides whether the period at `dot` ends a sentence given the next word.
bool period_ends_sentence(std::string_view text, std::size_t dot, std::size_t next) {
  std::size_t word_start = 0;
  const std::string_view word = word_before(text, dot, word_start);
  const std::string w = lower(word);
  const bool next_upper = next < text.size() && std::isupper(static_cast<unsigned char>(text[next]));
  const bool next_lower = next < text.size() && std::islower(static_cast<unsigned char>(text[next]));

  if (contains(kTitleAbbrevs, w)) return false;
  if (word.size() == 1 && std::isalpha(static_cast<unsigned char>(word[0]))) return false;
  if (all_digits(word) && line_leading(text, word_start)) return false;
  // Dotted forms not in the table ("a.k.a") behave like clinical abbreviations.
  const bool dotted = w.find('.') != std::string::npos &&
                      std::all_of(w.begin(), w.end(), [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '.'; });
  if (contains(kClinicalAbbrevs, w) || dotted) return next_upper;
  return !next_lower;
}

}  // namespace

std::vector<TokenSpan> sentence_spans(std::string_view text) {
  std::vector<std::size_t> cuts;  // exclusive ends of sentences
  const std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    const char c = text[i];
    if (c == '\n') {
      // Blank line: a paragraph break always ends the running sentence.
      std::size_t j = i + 1;
      while (j < n && (text[j] == ' ' || text[j] == '\t' || text[j] == '\r')) ++j;
      if (j < n && text[j] == '\n') cuts.push_back(i);
      ++i;
      continue;
    }
    if (c != '.' && c != '!' && c != '?') {
      ++i;
      continue;
    }
    std::size_t end = i + 1;
    bool emphatic = c != '.';
    while (end < n && (text[end] == '.' || text[end] == '!' || text[end] == '?')) {
      emphatic = emphatic || text[end] != '.';
      ++end;
    }
    while (end < n && is_closer(text[end])) ++end;
    if (end < n && !is_space(text[end])) {
      i = end;
      continue;
    }
    std::size_t next = end;
    while (next < n && is_space(text[next])) ++next;
    if (emphatic || period_ends_sentence(text, i, next)) cuts.push_back(end);
    i = end;
  }
  cuts.push_back(n);

  std::vector<TokenSpan> spans;
  std::size_t start = 0;
  for (std::size_t cut : cuts) {
    if (cut < start) continue;
    std::size_t b = start, e = cut;
    while (b < e && is_space(text[b])) ++b;
    while (e > b && is_space(text[e - 1])) --e;
    if (e > b) spans.push_back({b, e});
    start = cut;
  }
  return spans;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& s : sentence_spans(text)) out.emplace_back(text.substr(s.begin, s.end - s.begin));
  return out;
}

std::string normalize_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (is_space(c)) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace ehrcheck::text
