#pragma once

#include <optional>
#include <string>

#include "ehrcheck/gateway/backend.hpp"

namespace ehrcheck::gateway {

struct HttpEndpoint {
  std::string base_url;  // scheme://host[:port], no trailing slash
  std::string model;
  std::string api_key;   // sent as a Bearer token when non-empty
  int timeout_seconds = 120;
};

// POST {base}/v1/chat/completions
//   {"model", "messages": [{"role", "content"}], "temperature"}
// -> choices[0].message.content; finish_reason "length" marks overflow.
class HttpChatBackend final : public ChatBackend {
public:
  explicit HttpChatBackend(HttpEndpoint endpoint) : ep_(std::move(endpoint)) {}
  ChatReply chat(const ChatCall& call) override;
  BackendKind kind() const override { return BackendKind::HttpChat; }

private:
  HttpEndpoint ep_;
};

// Dense: POST {base}/v1/embeddings {"model", "input": [...]} -> data[i].embedding
// (re-ordered by data[i].index).
// Sparse: POST {base}{sparse_path} {"model", "input": [...]} ->
//   data[i] = {"index", "indices": [...], "values": [...]}.
// When no sparse path is configured, sparse vectors come from the local
// lexical encoder so hybrid search still works against dense-only servers.
class HttpEmbeddingBackend final : public EmbeddingBackend {
public:
  HttpEmbeddingBackend(HttpEndpoint endpoint, std::optional<std::string> sparse_path = std::nullopt)
      : ep_(std::move(endpoint)), sparse_path_(std::move(sparse_path)) {}
  std::vector<DenseVector> embed_dense(const std::vector<std::string>& texts) override;
  std::vector<SparseVector> embed_sparse(const std::vector<std::string>& texts) override;
  BackendKind kind() const override { return BackendKind::HttpEmbed; }

private:
  HttpEndpoint ep_;
  std::optional<std::string> sparse_path_;
};

// POST {base}{path} {"model", "query", "documents": [...]} -> {"scores": [...]}
class HttpRerankBackend final : public RerankBackend {
public:
  explicit HttpRerankBackend(HttpEndpoint endpoint, std::string path = "/rerank")
      : ep_(std::move(endpoint)), path_(std::move(path)) {}
  std::vector<double> rerank(const std::string& query, const std::vector<std::string>& candidates) override;
  BackendKind kind() const override { return BackendKind::HttpRerank; }

private:
  HttpEndpoint ep_;
  std::string path_;
};

}  // namespace ehrcheck::gateway
