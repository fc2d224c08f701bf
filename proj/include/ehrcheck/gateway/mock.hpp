#pragma once

#include <deque>
#include <functional>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "ehrcheck/gateway/backend.hpp"
#include "ehrcheck/prompts.hpp"

namespace ehrcheck::gateway {

// Lowercased word tokens with function words removed. Negators ("not",
// "no", "without") are kept: they carry meaning for support decisions.
std::vector<std::string> content_tokens(std::string_view text);

// Lexical stand-ins for the validity classifiers.
bool looks_imperative(std::string_view text);
bool looks_interrogative(std::string_view text);
bool looks_incomplete(std::string_view text);
bool looks_vague(std::string_view text);

struct HeuristicJudgeThresholds {
  double supported = 0.8;    // coverage >= this -> Supported
  double addressed = 0.2;    // coverage < this -> Not Addressed
};

// Fraction of the proposition's content tokens that occur in the reference.
double content_coverage(std::string_view proposition, std::string_view reference);
Verdict heuristic_verdict(std::string_view proposition, std::string_view reference,
                          const HeuristicJudgeThresholds& t = {});

// Deterministic chat backend that recognizes every engine prompt by its system
// prompt and answers with lexical heuristics: sentence splitting for claim
// extraction, content-token coverage for verdicts, leading-sentence
// truncation for summaries. Throws BackendContractError on unknown prompts.
class HeuristicChatBackend final : public ChatBackend {
public:
  explicit HeuristicChatBackend(const PromptLibrary& prompts = PromptLibrary::builtin(),
                                HeuristicJudgeThresholds thresholds = {});
  ChatReply chat(const ChatCall& call) override;
  BackendKind kind() const override { return BackendKind::MockHeuristic; }

private:
  PromptLibrary prompts_;
  HeuristicJudgeThresholds thresholds_;
};

// Feature-hashed bag of words: dense vectors are signed-hash projections
// normalized to unit length; sparse vectors map hashed token ids to
// L2-normalized term frequencies.
class HeuristicEmbeddingBackend final : public EmbeddingBackend {
public:
  explicit HeuristicEmbeddingBackend(std::size_t dim = 64);
  std::vector<DenseVector> embed_dense(const std::vector<std::string>& texts) override;
  std::vector<SparseVector> embed_sparse(const std::vector<std::string>& texts) override;
  BackendKind kind() const override { return BackendKind::MockHeuristic; }
  std::size_t dim() const noexcept { return dim_; }

private:
  std::size_t dim_;
};

// Jaccard overlap of content-token sets; a candidate equal to the query
// scores 1, an empty candidate scores 0.
class HeuristicRerankBackend final : public RerankBackend {
public:
  std::vector<double> rerank(const std::string& query, const std::vector<std::string>& candidates) override;
  BackendKind kind() const override { return BackendKind::MockHeuristic; }
};

// Plays back a fixed queue of replies and records every call. For tests and
// fixture generation.
class ScriptedChatBackend final : public ChatBackend {
public:
  ScriptedChatBackend() = default;
  explicit ScriptedChatBackend(std::vector<ChatReply> replies);
  void push(ChatReply reply);
  ChatReply chat(const ChatCall& call) override;
  BackendKind kind() const override { return BackendKind::MockReplay; }

  std::vector<ChatCall> calls() const;
  std::vector<double> temperatures() const;

private:
  mutable std::mutex mu_;
  std::deque<ChatReply> replies_;
  std::vector<ChatCall> calls_;
};

// Chat backend driven by a function; calls are recorded.
class FunctionChatBackend final : public ChatBackend {
public:
  using Fn = std::function<ChatReply(const ChatCall&)>;
  explicit FunctionChatBackend(Fn fn) : fn_(std::move(fn)) {}
  ChatReply chat(const ChatCall& call) override;
  BackendKind kind() const override { return BackendKind::MockReplay; }
  std::size_t call_count() const;

private:
  Fn fn_;
  mutable std::mutex mu_;
  std::size_t calls_ = 0;
};

}  // namespace ehrcheck::gateway
