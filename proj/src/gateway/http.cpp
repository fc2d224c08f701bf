#include "ehrcheck/gateway/http.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <nlohmann/json.hpp>

#include "ehrcheck/errors.hpp"
#include "ehrcheck/gateway/mock.hpp"

namespace ehrcheck::gateway {

using nlohmann::json;

namespace {

json post_json(const HttpEndpoint& ep, const std::string& path, const json& body) {
  httplib::Client client(ep.base_url);
  client.set_connection_timeout(ep.timeout_seconds, 0);
  client.set_read_timeout(ep.timeout_seconds, 0);
  client.set_write_timeout(ep.timeout_seconds, 0);
  httplib::Headers headers;
  if (!ep.api_key.empty()) headers.emplace("Authorization", "Bearer " + ep.api_key);

  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res) throw BackendError("HTTP request to " + ep.base_url + path + " failed: " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300)
    throw BackendError("HTTP " + std::to_string(res->status) + " from " + ep.base_url + path + ": " + res->body);
  json parsed = json::parse(res->body, nullptr, false);
  if (parsed.is_discarded()) throw BackendContractError("non-JSON response from " + ep.base_url + path);
  return parsed;
}

// data[] entries re-ordered by their "index" field when present.
std::vector<json> ordered_data(const json& response, std::size_t expected) {
  if (!response.contains("data") || !response["data"].is_array())
    throw BackendContractError("embedding response lacks a data array");
  const auto& data = response["data"];
  if (data.size() != expected) throw BackendContractError("embedding response has the wrong number of entries");
  std::vector<json> out(expected);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::size_t slot = data[i].contains("index") ? data[i]["index"].get<std::size_t>() : i;
    if (slot >= expected) throw BackendContractError("embedding response index out of range");
    out[slot] = data[i];
  }
  return out;
}

}  // namespace

ChatReply HttpChatBackend::chat(const ChatCall& call) {
  json messages = json::array();
  for (const auto& m : call.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
  json body{{"model", ep_.model}, {"messages", messages}, {"temperature", call.temperature}};
  const json res = post_json(ep_, "/v1/chat/completions", body);
  try {
    const auto& choice = res.at("choices").at(0);
    ChatReply reply;
    reply.content = choice.at("message").at("content").get<std::string>();
    reply.length_overflow = choice.value("finish_reason", "") == "length";
    return reply;
  } catch (const json::exception& e) {
    throw BackendContractError(std::string("malformed chat completion response: ") + e.what());
  }
}

std::vector<DenseVector> HttpEmbeddingBackend::embed_dense(const std::vector<std::string>& texts) {
  const json res = post_json(ep_, "/v1/embeddings", json{{"model", ep_.model}, {"input", texts}});
  std::vector<DenseVector> out;
  for (const auto& d : ordered_data(res, texts.size())) out.push_back(d.at("embedding").get<DenseVector>());
  return out;
}

std::vector<SparseVector> HttpEmbeddingBackend::embed_sparse(const std::vector<std::string>& texts) {
  if (!sparse_path_) return HeuristicEmbeddingBackend{}.embed_sparse(texts);
  const json res = post_json(ep_, *sparse_path_, json{{"model", ep_.model}, {"input", texts}});
  std::vector<SparseVector> out;
  for (const auto& d : ordered_data(res, texts.size())) {
    const auto& idx = d.at("indices");
    const auto& val = d.at("values");
    if (idx.size() != val.size()) throw BackendContractError("sparse entry has mismatched indices/values");
    SparseVector m;
    for (std::size_t i = 0; i < idx.size(); ++i) m[idx[i].get<std::uint32_t>()] = val[i].get<double>();
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<double> HttpRerankBackend::rerank(const std::string& query, const std::vector<std::string>& candidates) {
  const json res = post_json(ep_, path_, json{{"model", ep_.model}, {"query", query}, {"documents", candidates}});
  if (!res.contains("scores") || !res["scores"].is_array())
    throw BackendContractError("rerank response lacks a scores array");
  if (res["scores"].size() != candidates.size())
    throw BackendContractError("rerank response has the wrong number of scores");
  return res["scores"].get<std::vector<double>>();
}

}  // namespace ehrcheck::gateway
