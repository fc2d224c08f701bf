#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include <nlohmann/json.hpp>

#include "ehrcheck/gateway/backend.hpp"

namespace ehrcheck::gateway {

using nlohmann::json;

// Fixture format: JSON Lines, one record per request:
//   {"kind": "chat",   "request_hash": "<sha256>", "response": {"content": "...", "length_overflow": false}}
//   {"kind": "dense",  "request_hash": "<sha256>", "response": [0.1, ...]}
//   {"kind": "sparse", "request_hash": "<sha256>", "response": {"indices": [...], "values": [...]}}
//   {"kind": "rerank", "request_hash": "<sha256>", "response": 0.42}
// Optional "note" fields are ignored and may carry a human-readable hint.
class ReplayStore {
public:
  static std::shared_ptr<ReplayStore> load(const std::filesystem::path& path);
  static std::shared_ptr<ReplayStore> from_lines(const std::string& jsonl);

  // Throws BackendContractError when no record matches.
  const json& lookup(const std::string& kind, const std::string& hash) const;
  bool contains(const std::string& kind, const std::string& hash) const;
  std::size_t size() const noexcept { return records_.size(); }

private:
  std::map<std::pair<std::string, std::string>, json> records_;
};

class ReplayChatBackend final : public ChatBackend {
public:
  explicit ReplayChatBackend(std::shared_ptr<const ReplayStore> store) : store_(std::move(store)) {}
  ChatReply chat(const ChatCall& call) override;
  BackendKind kind() const override { return BackendKind::MockReplay; }

private:
  std::shared_ptr<const ReplayStore> store_;
};

class ReplayEmbeddingBackend final : public EmbeddingBackend {
public:
  explicit ReplayEmbeddingBackend(std::shared_ptr<const ReplayStore> store) : store_(std::move(store)) {}
  std::vector<DenseVector> embed_dense(const std::vector<std::string>& texts) override;
  std::vector<SparseVector> embed_sparse(const std::vector<std::string>& texts) override;
  BackendKind kind() const override { return BackendKind::MockReplay; }

private:
  std::shared_ptr<const ReplayStore> store_;
};

class ReplayRerankBackend final : public RerankBackend {
public:
  explicit ReplayRerankBackend(std::shared_ptr<const ReplayStore> store) : store_(std::move(store)) {}
  std::vector<double> rerank(const std::string& query, const std::vector<std::string>& candidates) override;
  BackendKind kind() const override { return BackendKind::MockReplay; }

private:
  std::shared_ptr<const ReplayStore> store_;
};

// Collects records from recording backends and writes them sorted by
// (kind, hash), so the same set of requests always yields the same file.
class Recorder {
public:
  void add(const std::string& kind, const std::string& hash, json response, std::string note = {});
  std::string to_jsonl() const;
  void write(const std::filesystem::path& path) const;
  std::size_t size() const;

private:
  mutable std::mutex mu_;
  std::map<std::pair<std::string, std::string>, std::pair<json, std::string>> records_;
};

class RecordingChatBackend final : public ChatBackend {
public:
  RecordingChatBackend(std::shared_ptr<ChatBackend> inner, std::shared_ptr<Recorder> rec)
      : inner_(std::move(inner)), rec_(std::move(rec)) {}
  ChatReply chat(const ChatCall& call) override;
  BackendKind kind() const override { return inner_->kind(); }

private:
  std::shared_ptr<ChatBackend> inner_;
  std::shared_ptr<Recorder> rec_;
};

class RecordingEmbeddingBackend final : public EmbeddingBackend {
public:
  RecordingEmbeddingBackend(std::shared_ptr<EmbeddingBackend> inner, std::shared_ptr<Recorder> rec)
      : inner_(std::move(inner)), rec_(std::move(rec)) {}
  std::vector<DenseVector> embed_dense(const std::vector<std::string>& texts) override;
  std::vector<SparseVector> embed_sparse(const std::vector<std::string>& texts) override;
  BackendKind kind() const override { return inner_->kind(); }

private:
  std::shared_ptr<EmbeddingBackend> inner_;
  std::shared_ptr<Recorder> rec_;
};

class RecordingRerankBackend final : public RerankBackend {
public:
  RecordingRerankBackend(std::shared_ptr<RerankBackend> inner, std::shared_ptr<Recorder> rec)
      : inner_(std::move(inner)), rec_(std::move(rec)) {}
  std::vector<double> rerank(const std::string& query, const std::vector<std::string>& candidates) override;
  BackendKind kind() const override { return inner_->kind(); }

private:
  std::shared_ptr<RerankBackend> inner_;
  std::shared_ptr<Recorder> rec_;
};

}  // namespace ehrcheck::gateway
