#include "ehrcheck/text/tokenizer.hpp"

#include <cctype>

#include "ehrcheck/errors.hpp"

namespace ehrcheck::text {

namespace {

bool is_word_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

template <typename Fn>
void scan(std::string_view text, Fn&& emit) {
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (std::isspace(c)) {
      ++i;
    } else if (is_word_byte(c)) {
      std::size_t j = i;
      while (j < n && is_word_byte(static_cast<unsigned char>(text[j]))) ++j;
      emit(i, j);
      i = j;
    } else {
      emit(i, i + 1);
      ++i;
    }
  }
}

}  // namespace

bool is_valid_utf8(std::string_view text) noexcept {
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    const auto c = static_cast<unsigned char>(text[i]);
    int extra = 0;
    if (c < 0x80) extra = 0;
    else if ((c & 0xE0) == 0xC0 && c >= 0xC2) extra = 1;
    else if ((c & 0xF0) == 0xE0) extra = 2;
    else if ((c & 0xF8) == 0xF0 && c <= 0xF4) extra = 3;
    else return false;
    if (i + static_cast<std::size_t>(extra) >= n && extra > 0) return false;
    for (int k = 1; k <= extra; ++k)
      if ((static_cast<unsigned char>(text[i + k]) & 0xC0) != 0x80) return false;
    i += static_cast<std::size_t>(extra) + 1;
  }
  return true;
}

std::vector<TokenSpan> WordPunctTokenizer::tokenize(std::string_view text) const {
  if (!is_valid_utf8(text)) throw TokenizeError("input is not valid UTF-8");
  std::vector<TokenSpan> out;
  scan(text, [&](std::size_t b, std::size_t e) { out.push_back({b, e}); });
  return out;
}

std::size_t WordPunctTokenizer::count(std::string_view text) const {
  if (!is_valid_utf8(text)) throw TokenizeError("input is not valid UTF-8");
  std::size_t k = 0;
  scan(text, [&](std::size_t, std::size_t) { ++k; });
  return k;
}

const Tokenizer& default_tokenizer() {
  static const WordPunctTokenizer tok;
  return tok;
}

std::vector<std::string> word_tokens(std::string_view text) {
  std::vector<std::string> out;
  scan(text, [&](std::size_t b, std::size_t e) {
    if (!is_word_byte(static_cast<unsigned char>(text[b]))) return;
    std::string w(text.substr(b, e - b));
    for (auto& ch : w) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    out.push_back(std::move(w));
  });
  return out;
}

}  // namespace ehrcheck::text
