#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ehrcheck/domain.hpp"
#include "ehrcheck/gateway/gateway.hpp"
#include "ehrcheck/prompts.hpp"
#include "ehrcheck/text/chunker.hpp"

namespace ehrcheck::text {

struct DecomposeOptions {
  PropType prop_type = PropType::Sentence;
  ChunkerConfig chunker;
  // Run the four validity classifiers on propositions. Facts never are.
  bool classify_validity = true;
  double temperature = 0.1;
  int max_retries_heal = 2;
  // Concurrent chunks / propositions in flight; the gateway caps requests too.
  std::size_t workers = 1;
};

// Two-stage extraction: a presence check gates the extraction prompt. Returns
// the claims in model order with exact duplicates removed. Throws
// ExtractionError (carrying the last raw reply) when the gateway gives up.
std::vector<std::string> extract_atomic_claims(const TextChunk& chunk, gateway::Gateway& gw,
                                               const PromptLibrary& prompts = PromptLibrary::builtin(),
                                               const DecomposeOptions& opts = {});

// Four independent yes/no probes. A probe whose retries run out is reported
// as Flag::Unknown rather than failing the whole report.
ValidityReport classify_validity(std::string_view prop_text, gateway::Gateway& gw,
                                 const PromptLibrary& prompts = PromptLibrary::builtin(),
                                 const DecomposeOptions& opts = {});

// Chunk, then split into sentences or extract claims. Units are the chunk
// outputs in document order; ids are "<doc_id>:s<i>" or "<doc_id>:a<i>".
std::vector<std::string> decompose_units(std::string_view doc_id, std::string_view text, const DecomposeOptions& opts,
                                         gateway::Gateway& gw, const PromptLibrary& prompts = PromptLibrary::builtin());

std::vector<Proposition> decompose_text(std::string_view doc_id, std::string_view text, AuthorType author,
                                        const DecomposeOptions& opts, gateway::Gateway& gw,
                                        const PromptLibrary& prompts = PromptLibrary::builtin());

// Facts inherit the note's metadata and carry dense and sparse embeddings.
// Ids are "<note_id>:f<i>".
std::vector<Fact> decompose_note(const ClinicalNote& note, const DecomposeOptions& opts, gateway::Gateway& gw,
                                 const PromptLibrary& prompts = PromptLibrary::builtin());

std::string unit_id(std::string_view doc_id, PropType type, std::size_t index);

}  // namespace ehrcheck::text
