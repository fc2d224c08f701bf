#pragma once

#include <string>
#include <vector>

#include "ehrcheck/domain.hpp"

namespace ehrcheck::gateway {

enum class BackendKind { HttpChat, HttpEmbed, HttpRerank, MockReplay, MockHeuristic };

struct ChatMessage {
  std::string role;  // "system", "user", "assistant"
  std::string content;
};

struct ChatCall {
  std::vector<ChatMessage> messages;
  double temperature = 0.1;
};

struct ChatReply {
  std::string content;
  // The backend stopped because it ran out of room (finish_reason "length").
  bool length_overflow = false;
};

// Implementations must be safe to call from several threads at once.
class ChatBackend {
public:
  virtual ~ChatBackend() = default;
  virtual ChatReply chat(const ChatCall& call) = 0;
  virtual BackendKind kind() const = 0;
};

class EmbeddingBackend {
public:
  virtual ~EmbeddingBackend() = default;
  virtual std::vector<DenseVector> embed_dense(const std::vector<std::string>& texts) = 0;
  virtual std::vector<SparseVector> embed_sparse(const std::vector<std::string>& texts) = 0;
  virtual BackendKind kind() const = 0;
};

class RerankBackend {
public:
  virtual ~RerankBackend() = default;
  virtual std::vector<double> rerank(const std::string& query, const std::vector<std::string>& candidates) = 0;
  virtual BackendKind kind() const = 0;
};

// Stable request keys used by replay fixtures. Chat keys cover the full
// message list and the temperature rounded to two decimals; embedding and
// rerank keys are per text (per candidate) so batching does not matter.
std::string chat_request_hash(const ChatCall& call);
std::string dense_request_hash(const std::string& text);
std::string sparse_request_hash(const std::string& text);
std::string rerank_request_hash(const std::string& query, const std::string& candidate);

}  // namespace ehrcheck::gateway
