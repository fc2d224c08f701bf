#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace ehrcheck::text {

// Half-open byte range into the tokenized string.
struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

// Token counting is pluggable so the chunk bound can follow whatever
// vocabulary the deployment's models use.
class Tokenizer {
public:
  virtual ~Tokenizer() = default;
  virtual std::vector<TokenSpan> tokenize(std::string_view text) const = 0;
  virtual std::size_t count(std::string_view text) const { return tokenize(text).size(); }
};

// Words (runs of ASCII alphanumerics or any non-ASCII UTF-8 bytes) and single
// punctuation characters are tokens; whitespace separates. Rejects malformed
// UTF-8 with TokenizeError.
class WordPunctTokenizer final : public Tokenizer {
public:
  std::vector<TokenSpan> tokenize(std::string_view text) const override;
  std::size_t count(std::string_view text) const override;
};

const Tokenizer& default_tokenizer();

// Lowercased word tokens only (punctuation dropped). Used by the lexical
// mock backends.
std::vector<std::string> word_tokens(std::string_view text);

bool is_valid_utf8(std::string_view text) noexcept;

}  // namespace ehrcheck::text
