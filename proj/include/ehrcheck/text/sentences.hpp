#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ehrcheck/text/tokenizer.hpp"

namespace ehrcheck::text {

// Rule-based, abbreviation-aware sentence segmenter.
//
// Boundaries fall after '.', '!' or '?' (plus any closing quotes/brackets)
// when followed by whitespace or end of text, and at blank lines. A period
// does not end a sentence when it closes:
//   - a title-like abbreviation ("Dr.", "Mr.", "e.g.", "vs.") -- never;
//   - any other known abbreviation ("pt.", "b.i.d.", "p.o.") -- unless the
//     next word is capitalized;
//   - a single-letter initial or a line-leading list enumerator ("1.");
//   - an ordinary word followed by a lowercase word.
//
// Returned spans cover trimmed, non-empty sentences in document order and are
// separated only by whitespace, so the split is lossless modulo whitespace.
std::vector<TokenSpan> sentence_spans(std::string_view text);

std::vector<std::string> split_sentences(std::string_view text);

// Collapses every whitespace run to a single space and trims the ends.
std::string normalize_whitespace(std::string_view text);

}  // namespace ehrcheck::text
