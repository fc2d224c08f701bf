#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ehrcheck/domain.hpp"
#include "ehrcheck/gateway/gateway.hpp"
#include "ehrcheck/index/fact_index.hpp"
#include "ehrcheck/judge/context.hpp"
#include "ehrcheck/prompts.hpp"
#include "ehrcheck/text/decompose.hpp"

namespace ehrcheck::judge {

inline constexpr const char* kNoReasonsSummary = "No propositions were assigned this label.";

struct JudgeOptions {
  double temperature = 0.1;
  int max_retries_heal = 2;
};

// Throws InputError for an invalid proposition (those are never judged),
// JudgeContractError when the verdict string is not one of the three labels.
VerdictRecord judge_proposition(const Proposition& prop, const ReferenceContext& ctx, gateway::Gateway& gw,
                                const PromptLibrary& prompts = PromptLibrary::builtin(), const JudgeOptions& opts = {});

std::string summarize_label(const std::vector<std::string>& reasons, Verdict label, gateway::Gateway& gw,
                            const PromptLibrary& prompts = PromptLibrary::builtin(), const JudgeOptions& opts = {});

struct VerifyConfig {
  AuthorType author = AuthorType::LLMWritten;
  text::DecomposeOptions decompose;
  index::IndexConfig retrieval;
  ContextFormat context_format = ContextFormat::RelevanceScore;
  FormatOptions format;
  JudgeOptions judge;
  // The run fails when more than this share of valid propositions error.
  double max_error_rate = 0.10;
  std::size_t workers = 1;
};

struct PropositionError {
  std::string prop_id;
  std::string message;
};

struct VerifyResult {
  ScoreSheet sheet;
  std::vector<Proposition> propositions;  // including invalid ones
  std::vector<VerdictRecord> verdicts;    // proposition order
  std::vector<PropositionError> errors;
};

// decompose -> drop invalid -> retrieve -> format -> judge -> summarize per
// label -> score sheet. EmptyInput when nothing is left to judge (the
// exception carries the number of invalid propositions).
VerifyResult verify_text(const std::string& doc_id, const std::string& candidate_text, const index::Snapshot& corpus,
                         const AdmissionWindow& window, const VerifyConfig& cfg, gateway::Gateway& gw,
                         const PromptLibrary& prompts = PromptLibrary::builtin());

// Judges already-decomposed propositions (the sweep reuses one decomposition
// across many retrieval settings).
VerifyResult verify_propositions(const std::string& doc_id, std::vector<Proposition> propositions,
                                 const index::Snapshot& corpus, const AdmissionWindow& window, const VerifyConfig& cfg,
                                 gateway::Gateway& gw, const PromptLibrary& prompts = PromptLibrary::builtin());

}  // namespace ehrcheck::judge
