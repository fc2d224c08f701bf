#include "ehrcheck/text/chunker.hpp"

#include <cmath>
#include <cstdlib>

#include "ehrcheck/errors.hpp"
#include "ehrcheck/text/sentences.hpp"
#include "ehrcheck/util/stats.hpp"

namespace ehrcheck::text {

void ChunkerConfig::validate() const {
  if (max_tokens < 1) throw InputError("max_tokens must be >= 1");
  if (window_sentences < 1) throw InputError("window_sentences must be >= 1");
  if (!(split_percentile > 0.0 && split_percentile < 100.0))
    throw InputError("split_percentile must lie strictly between 0 and 100");
}

double cosine_distance(const DenseVector& a, const DenseVector& b) {
  if (a.size() != b.size()) throw DimensionError("cosine distance between vectors of different dimension");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return (na == 0.0 && nb == 0.0) ? 0.0 : 1.0;
  return 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
}

namespace {

class Chunker {
public:
  Chunker(std::string_view text, const ChunkerConfig& cfg, const EmbedFn& embed, const Tokenizer& tok)
      : text_(text), cfg_(cfg), embed_(embed), tok_(tok), spans_(sentence_spans(text)) {}

  std::vector<TokenSpan> run() {
    if (!spans_.empty()) process(0, spans_.size());
    return out_;
  }

private:
  std::string_view range_text(std::size_t lo, std::size_t hi) const {
    return text_.substr(spans_[lo].begin, spans_[hi - 1].end - spans_[lo].begin);
  }

  std::size_t range_tokens(std::size_t lo, std::size_t hi) const { return tok_.count(range_text(lo, hi)); }

  void emit(std::size_t lo, std::size_t hi) { out_.push_back({spans_[lo].begin, spans_[hi - 1].end}); }

  void process(std::size_t lo, std::size_t hi) {
    const auto limit = static_cast<std::size_t>(cfg_.max_tokens);
    if (range_tokens(lo, hi) <= limit) {
      emit(lo, hi);
      return;
    }
    if (hi - lo == 1) {
      split_long_sentence(spans_[lo]);
      return;
    }
    const auto cuts = semantic_cuts(lo, hi);
    if (cuts.empty()) {
      const std::size_t mid = token_midpoint(lo, hi);
      process(lo, mid);
      process(mid, hi);
      return;
    }
    std::size_t start = lo;
    for (std::size_t cut : cuts) {
      process(start, cut);
      start = cut;
    }
    process(start, hi);
  }

  // Sentence indices k in (lo, hi) such that a split goes before sentence k.
  std::vector<std::size_t> semantic_cuts(std::size_t lo, std::size_t hi) {
    const std::size_t before = static_cast<std::size_t>(cfg_.window_sentences - 1) / 2;
    const std::size_t after = static_cast<std::size_t>(cfg_.window_sentences) / 2;
    std::vector<std::string> windows;
    windows.reserve(hi - lo);
    for (std::size_t i = lo; i < hi; ++i) {
      const std::size_t wlo = i >= lo + before ? i - before : lo;
      const std::size_t whi = std::min(hi, i + after + 1);
      windows.emplace_back(range_text(wlo, whi));
    }
    const auto vecs = embed_(windows);
    if (vecs.size() != windows.size()) throw BackendContractError("embedding count does not match window count");

    std::vector<double> dist;
    dist.reserve(vecs.size() - 1);
    for (std::size_t i = 0; i + 1 < vecs.size(); ++i) dist.push_back(cosine_distance(vecs[i], vecs[i + 1]));
    const double threshold = util::percentile(dist, cfg_.split_percentile);

    std::vector<std::size_t> cuts;
    for (std::size_t i = 0; i < dist.size(); ++i)
      if (dist[i] > threshold) cuts.push_back(lo + i + 1);
    return cuts;
  }

  std::size_t token_midpoint(std::size_t lo, std::size_t hi) const {
    std::vector<std::size_t> prefix{0};
    for (std::size_t i = lo; i < hi; ++i) prefix.push_back(prefix.back() + tok_.count(range_text(i, i + 1)));
    const double half = static_cast<double>(prefix.back()) / 2.0;
    std::size_t best = lo + 1;
    double best_gap = std::abs(static_cast<double>(prefix[1]) - half);
    for (std::size_t k = 2; k < prefix.size() - 1; ++k) {
      const double gap = std::abs(static_cast<double>(prefix[k]) - half);
      if (gap < best_gap) {
        best_gap = gap;
        best = lo + k;
      }
    }
    return best;
  }

  void split_long_sentence(TokenSpan sentence) {
    const std::string_view s = text_.substr(sentence.begin, sentence.end - sentence.begin);
    const auto tokens = tok_.tokenize(s);
    const auto limit = static_cast<std::size_t>(cfg_.max_tokens);
    std::size_t i = 0;
    while (i < tokens.size()) {
      std::size_t take = std::min(limit, tokens.size() - i);
      // A custom tokenizer may count a substring differently; shrink until it fits.
      while (take > 1 && tok_.count(s.substr(tokens[i].begin, tokens[i + take - 1].end - tokens[i].begin)) > limit)
        --take;
      out_.push_back({sentence.begin + tokens[i].begin, sentence.begin + tokens[i + take - 1].end});
      i += take;
    }
  }

  std::string_view text_;
  const ChunkerConfig& cfg_;
  const EmbedFn& embed_;
  const Tokenizer& tok_;
  std::vector<TokenSpan> spans_;
  std::vector<TokenSpan> out_;
};

}  // namespace

std::vector<TextChunk> semantic_chunks(std::string_view doc_id, std::string_view text, const ChunkerConfig& cfg,
                                       const EmbedFn& embed, const Tokenizer& tokenizer) {
  cfg.validate();
  if (normalize_whitespace(text).empty()) return {};

  std::vector<TextChunk> chunks;
  const std::size_t total = tokenizer.count(text);
  if (total <= static_cast<std::size_t>(cfg.max_tokens)) {
    chunks.push_back({std::string(doc_id) + ":c0", std::string(doc_id), std::string(text), total, 0, text.size()});
    return chunks;
  }

  Chunker chunker(text, cfg, embed, tokenizer);
  for (const auto& span : chunker.run()) {
    TextChunk c;
    c.chunk_id = std::string(doc_id) + ":c" + std::to_string(chunks.size());
    c.source_doc_id = std::string(doc_id);
    c.text = std::string(text.substr(span.begin, span.end - span.begin));
    c.token_count = tokenizer.count(c.text);
    c.begin = span.begin;
    c.end = span.end;
    chunks.push_back(std::move(c));
  }
  return chunks;
}

}  // namespace ehrcheck::text
