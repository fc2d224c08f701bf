#pragma once

#include <atomic>
#include <memory>
#include <semaphore>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ehrcheck/gateway/backend.hpp"

namespace ehrcheck::gateway {

using nlohmann::json;

struct ChatRequest {
  std::string system_prompt;
  std::string user_prompt;
  double temperature = 0.1;
  json response_schema;
  int max_retries_heal = 2;
  double temperature_step = 0.1;
  double temperature_ceiling = 1.0;

  void validate() const;  // throws InputError
};

// Plain-text generation (no schema); only the temperature ladder applies.
struct TextRequest {
  std::string system_prompt;
  std::string user_prompt;
  double temperature = 0.1;
  double temperature_step = 0.1;
  double temperature_ceiling = 1.0;
};

struct GatewayOptions {
  int max_in_flight = 8;
  // A generation is degenerate when a repeating pattern covers more than
  // `degeneracy_ratio` of its final `degeneracy_window` characters.
  double degeneracy_ratio = 0.5;
  std::size_t degeneracy_window = 200;
};

struct GatewayCounters {
  std::size_t chat_calls = 0;
  std::size_t heal_calls = 0;
  std::size_t escalations = 0;
  std::size_t embed_calls = 0;
  std::size_t rerank_calls = 0;
};

// Fraction of the tail covered by its longest periodic suffix of at least two
// repeats (0 when the text is shorter than `window`).
double repetition_ratio(std::string_view text, std::size_t window);

// Pulls a JSON value out of a model reply: the whole reply, a fenced ```json
// block, or the outermost {...} span. nullopt when none parses.
std::optional<json> extract_json(std::string_view reply);

class Gateway {
public:
  Gateway(std::shared_ptr<ChatBackend> chat, std::shared_ptr<EmbeddingBackend> embed,
          std::shared_ptr<RerankBackend> rerank, GatewayOptions options = {});

  // Schema-conforming value or StructuredOutputError. Invalid replies are
  // healed by showing the model its own output (up to max_retries_heal
  // times); degenerate replies restart the original prompt one temperature
  // step higher, up to the ceiling.
  json chat_structured(const ChatRequest& req);
  std::string chat_text(const TextRequest& req);

  std::vector<DenseVector> embed_dense(const std::vector<std::string>& texts);
  std::vector<SparseVector> embed_sparse(const std::vector<std::string>& texts);
  std::vector<double> rerank(const std::string& query, const std::vector<std::string>& candidates);

  GatewayCounters counters() const;
  void reset_counters();

  bool has_chat() const noexcept { return chat_ != nullptr; }
  bool has_embedding() const noexcept { return embed_ != nullptr; }
  bool has_rerank() const noexcept { return rerank_ != nullptr; }

private:
  bool degenerate(const ChatReply& reply) const;
  ChatReply call_chat(const ChatCall& call);

  std::shared_ptr<ChatBackend> chat_;
  std::shared_ptr<EmbeddingBackend> embed_;
  std::shared_ptr<RerankBackend> rerank_;
  GatewayOptions options_;
  std::unique_ptr<std::counting_semaphore<>> in_flight_;
  std::atomic<std::size_t> chat_calls_{0}, heal_calls_{0}, escalations_{0}, embed_calls_{0}, rerank_calls_{0};
};

}  // namespace ehrcheck::gateway
