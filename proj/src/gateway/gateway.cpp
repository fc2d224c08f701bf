#include "ehrcheck/gateway/gateway.hpp"

#include <cmath>

#include "ehrcheck/errors.hpp"
#include "ehrcheck/gateway/json_schema.hpp"

namespace ehrcheck::gateway {

namespace {

constexpr double kTempEps = 1e-9;

// Temperature after `steps` escalations, snapped to 1e-9 so repeated
// addition does not drift (0.1 + 3*0.1 renders as 0.4, not 0.4000000000000001).
double stepped(double start, double step, int steps) {
  return std::round((start + step * steps) * 1e9) / 1e9;
}

class SemaphoreGuard {
public:
  explicit SemaphoreGuard(std::counting_semaphore<>& s) : s_(s) { s_.acquire(); }
  ~SemaphoreGuard() { s_.release(); }
  SemaphoreGuard(const SemaphoreGuard&) = delete;
  SemaphoreGuard& operator=(const SemaphoreGuard&) = delete;

private:
  std::counting_semaphore<>& s_;
};

std::string heal_instruction(const std::string& error, const json& schema) {
  return "Your previous response could not be used: " + error +
         ".\nPlease correct the output to valid JSON that conforms to this JSON schema:\n" + schema.dump() +
         "\nReturn only JSON. No explanation is needed.";
}

}  // namespace

void ChatRequest::validate() const {
  if (!(temperature >= 0.0 && temperature <= temperature_ceiling + kTempEps && temperature_ceiling <= 1.0 + kTempEps))
    throw InputError("temperature must satisfy 0 <= temperature <= ceiling <= 1");
  if (max_retries_heal < 0) throw InputError("max_retries_heal must be >= 0");
  if (!(temperature_step > 0.0)) throw InputError("temperature_step must be positive");
  if (!is_closed_object_schema(response_schema))
    throw InputError("response schema must be a closed object schema (additionalProperties: false)");
}

double repetition_ratio(std::string_view text, std::size_t window) {
  if (window == 0 || text.size() < window) return 0.0;
  const std::string_view tail = text.substr(text.size() - window);
  const std::size_t n = tail.size();
  double best = 0.0;
  for (std::size_t p = 1; p <= n / 2; ++p) {
    std::size_t run = 0;
    for (std::size_t i = n - 1; i >= p; --i) {
      if (tail[i] != tail[i - p]) break;
      ++run;
      if (i == p) break;
    }
    if (run >= p) best = std::max(best, static_cast<double>(run + p) / static_cast<double>(n));
  }
  return best;
}

std::optional<json> extract_json(std::string_view reply) {
  auto attempt = [](std::string_view s) -> std::optional<json> {
    auto v = json::parse(s, nullptr, /*allow_exceptions=*/false);
    if (v.is_discarded()) return std::nullopt;
    return v;
  };
  if (auto v = attempt(reply)) return v;
  if (auto fence = reply.find("```"); fence != std::string_view::npos) {
    auto body_start = reply.find('\n', fence);
    auto close = body_start == std::string_view::npos ? std::string_view::npos : reply.find("```", body_start);
    if (close != std::string_view::npos) {
      if (auto v = attempt(reply.substr(body_start + 1, close - body_start - 1))) return v;
    }
  }
  const auto open = reply.find('{');
  const auto last = reply.rfind('}');
  if (open != std::string_view::npos && last != std::string_view::npos && last > open)
    return attempt(reply.substr(open, last - open + 1));
  return std::nullopt;
}

Gateway::Gateway(std::shared_ptr<ChatBackend> chat, std::shared_ptr<EmbeddingBackend> embed,
                 std::shared_ptr<RerankBackend> rerank, GatewayOptions options)
    : chat_(std::move(chat)),
      embed_(std::move(embed)),
      rerank_(std::move(rerank)),
      options_(options),
      in_flight_(std::make_unique<std::counting_semaphore<>>(std::max(1, options.max_in_flight))) {}

bool Gateway::degenerate(const ChatReply& reply) const {
  return reply.length_overflow ||
         repetition_ratio(reply.content, options_.degeneracy_window) > options_.degeneracy_ratio;
}

ChatReply Gateway::call_chat(const ChatCall& call) {
  if (!chat_) throw BackendError("no chat backend configured");
  SemaphoreGuard guard(*in_flight_);
  ++chat_calls_;
  return chat_->chat(call);
}

json Gateway::chat_structured(const ChatRequest& req) {
  req.validate();
  const std::vector<ChatMessage> base{{"system", req.system_prompt}, {"user", req.user_prompt}};
  std::vector<TranscriptEntry> transcript;
  int escalation = 0;
  int heals_left = req.max_retries_heal;
  double temperature = req.temperature;

  std::vector<ChatMessage> messages = base;
  std::string kind = "initial";
  for (;;) {
    const ChatReply reply = call_chat(ChatCall{messages, temperature});
    TranscriptEntry entry{kind, temperature, reply.content, {}};

    if (degenerate(reply)) {
      entry.failure = reply.length_overflow ? "length overflow" : "degenerate repetition";
      transcript.push_back(entry);
      const double next = stepped(req.temperature, req.temperature_step, escalation + 1);
      if (next > req.temperature_ceiling + kTempEps)
        throw StructuredOutputError("temperature ceiling reached without a usable reply", std::move(transcript));
      ++escalation;
      ++escalations_;
      temperature = next;
      messages = base;
      kind = "escalate";
      continue;
    }

    std::string error;
    if (auto parsed = extract_json(reply.content)) {
      if (auto bad = validate_schema(req.response_schema, *parsed)) error = "schema violation at " + *bad;
      else {
        transcript.push_back(entry);
        return *parsed;
      }
    } else {
      error = "output is not parseable JSON";
    }
    entry.failure = error;
    transcript.push_back(entry);
    if (heals_left == 0) throw StructuredOutputError("structured output invalid after healing: " + error, std::move(transcript));
    --heals_left;
    ++heal_calls_;
    messages = base;
    messages.push_back({"assistant", reply.content});
    messages.push_back({"user", heal_instruction(error, req.response_schema)});
    kind = "heal";
  }
}

std::string Gateway::chat_text(const TextRequest& req) {
  if (!(req.temperature >= 0.0 && req.temperature <= req.temperature_ceiling + kTempEps))
    throw InputError("temperature must satisfy 0 <= temperature <= ceiling");
  const std::vector<ChatMessage> messages{{"system", req.system_prompt}, {"user", req.user_prompt}};
  std::vector<TranscriptEntry> transcript;
  double temperature = req.temperature;
  for (int escalation = 0;; ) {
    const ChatReply reply = call_chat(ChatCall{messages, temperature});
    if (!degenerate(reply)) return reply.content;
    transcript.push_back({escalation == 0 ? "initial" : "escalate", temperature, reply.content, "degenerate"});
    const double next = stepped(req.temperature, req.temperature_step, escalation + 1);
    if (next > req.temperature_ceiling + kTempEps)
      throw StructuredOutputError("temperature ceiling reached without a usable reply", std::move(transcript));
    ++escalation;
    ++escalations_;
    temperature = next;
  }
}

std::vector<DenseVector> Gateway::embed_dense(const std::vector<std::string>& texts) {
  if (!embed_) throw BackendError("no embedding backend configured");
  if (texts.empty()) throw InputError("embed_dense requires at least one text");
  std::vector<DenseVector> out;
  {
    SemaphoreGuard guard(*in_flight_);
    ++embed_calls_;
    out = embed_->embed_dense(texts);
  }
  if (out.size() != texts.size()) throw BackendContractError("embedding backend returned a different number of vectors");
  for (const auto& v : out)
    if (v.size() != out.front().size()) throw BackendContractError("embedding backend returned mixed dimensions");
  return out;
}

std::vector<SparseVector> Gateway::embed_sparse(const std::vector<std::string>& texts) {
  if (!embed_) throw BackendError("no embedding backend configured");
  if (texts.empty()) throw InputError("embed_sparse requires at least one text");
  std::vector<SparseVector> out;
  {
    SemaphoreGuard guard(*in_flight_);
    ++embed_calls_;
    out = embed_->embed_sparse(texts);
  }
  if (out.size() != texts.size()) throw BackendContractError("sparse backend returned a different number of vectors");
  for (const auto& m : out)
    for (const auto& [id, w] : m)
      if (!(w >= 0.0)) throw BackendContractError("sparse backend returned a negative weight");
  return out;
}

std::vector<double> Gateway::rerank(const std::string& query, const std::vector<std::string>& candidates) {
  if (!rerank_) throw BackendError("no rerank backend configured");
  if (candidates.empty()) throw InputError("rerank requires at least one candidate");
  std::vector<double> out;
  {
    SemaphoreGuard guard(*in_flight_);
    ++rerank_calls_;
    out = rerank_->rerank(query, candidates);
  }
  if (out.size() != candidates.size()) throw BackendContractError("rerank backend returned a different number of scores");
  return out;
}

GatewayCounters Gateway::counters() const {
  return {chat_calls_.load(), heal_calls_.load(), escalations_.load(), embed_calls_.load(), rerank_calls_.load()};
}

void Gateway::reset_counters() {
  chat_calls_ = 0;
  heal_calls_ = 0;
  escalations_ = 0;
  embed_calls_ = 0;
  rerank_calls_ = 0;
}

}  // namespace ehrcheck::gateway
