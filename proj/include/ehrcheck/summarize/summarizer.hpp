#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ehrcheck/domain.hpp"
#include "ehrcheck/gateway/gateway.hpp"
#include "ehrcheck/prompts.hpp"
#include "ehrcheck/text/tokenizer.hpp"

namespace ehrcheck::summarize {

struct SummarizerConfig {
  std::size_t note_chunk_tokens = 1000;
  std::size_t max_note_sentences = 4;
  std::size_t bundle_tokens = 5000;
  std::size_t max_draft_tokens = 1000;
  // Compaction rounds allowed per draft update before hard truncation.
  int max_compactions = 3;
  double temperature = 0.5;
  std::size_t workers = 1;
};

// Greedy sentence packing into pieces of at most `max_tokens`; a sentence
// longer than the bound is cut at token boundaries.
std::vector<std::string> pack_text(std::string_view text, std::size_t max_tokens,
                                   const text::Tokenizer& tok = text::default_tokenizer());

// Greedy, order-preserving packing of item sizes into bundles whose total is
// at most `cap`. An item larger than `cap` gets a bundle of its own. Returns
// item indices per bundle.
std::vector<std::vector<std::size_t>> pack_bundles(const std::vector<std::size_t>& sizes, std::size_t cap);

// Prefix of `text` holding at most `max_tokens` tokens.
std::string truncate_tokens(std::string_view text, std::size_t max_tokens,
                            const text::Tokenizer& tok = text::default_tokenizer());

struct NoteSummaryTrace {
  std::size_t chunks = 0;
  bool combined = false;
  bool reasked = false;
  bool truncated = false;
};

// Chunk summaries (one call each), a combine call when there is more than one
// chunk, then the sentence bound: one re-ask through the combine prompt, then
// truncation to the first `max_note_sentences` sentences.
std::string summarize_note(const ClinicalNote& note, gateway::Gateway& gw,
                           const PromptLibrary& prompts = PromptLibrary::builtin(), const SummarizerConfig& cfg = {},
                           NoteSummaryTrace* trace = nullptr);

struct BhcTrace {
  std::vector<std::string> note_summaries;        // chronological
  std::vector<std::vector<std::size_t>> bundles;  // indices into note_summaries
  std::size_t refine_calls = 0;
  std::size_t compactions = 0;
  std::size_t hard_truncations = 0;
};

// Rolling refinement: the first bundle drafts, later bundles refine, and any
// draft over `max_draft_tokens` is compacted. Output never exceeds the bound.
std::string generate_bhc(std::vector<ClinicalNote> notes, gateway::Gateway& gw,
                         const PromptLibrary& prompts = PromptLibrary::builtin(), const SummarizerConfig& cfg = {},
                         BhcTrace* trace = nullptr);

}  // namespace ehrcheck::summarize
