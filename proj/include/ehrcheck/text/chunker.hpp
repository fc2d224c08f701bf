#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "ehrcheck/domain.hpp"
#include "ehrcheck/text/tokenizer.hpp"

namespace ehrcheck::text {

struct ChunkerConfig {
  int max_tokens = 128;
  int window_sentences = 3;
  double split_percentile = 90.0;

  void validate() const;  // throws InputError
};

struct TextChunk {
  std::string chunk_id;
  std::string source_doc_id;
  std::string text;
  std::size_t token_count = 0;
  // Byte range of `text` inside the source document.
  std::size_t begin = 0;
  std::size_t end = 0;
};

// Batch dense embedding; one vector per input, same order.
using EmbedFn = std::function<std::vector<DenseVector>(const std::vector<std::string>&)>;

// Semantic chunking under a hard token bound.
//
// A text within the bound is returned whole. Otherwise the text is split into
// sentences; each sentence is embedded together with its neighbours (a
// centred window of `window_sentences`, truncated at the scope edges) and a
// split is placed after every sentence whose window-to-next-window cosine
// distance is strictly above the `split_percentile` percentile of all such
// distances in the current scope. Pieces still over the bound are processed
// again with the percentile recomputed inside the piece. When a scope yields
// no split, it is bisected at the sentence boundary nearest its token
// midpoint; a lone sentence over the bound is cut at token boundaries.
std::vector<TextChunk> semantic_chunks(std::string_view doc_id, std::string_view text, const ChunkerConfig& cfg,
                                       const EmbedFn& embed, const Tokenizer& tokenizer = default_tokenizer());

double cosine_distance(const DenseVector& a, const DenseVector& b);

}  // namespace ehrcheck::text
