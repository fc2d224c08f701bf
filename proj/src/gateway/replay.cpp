#include "ehrcheck/gateway/replay.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ehrcheck/errors.hpp"
#include "ehrcheck/util/hash.hpp"

namespace ehrcheck::gateway {

std::string chat_request_hash(const ChatCall& call) {
  json msgs = json::array();
  for (const auto& m : call.messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
  char temp[16];
  std::snprintf(temp, sizeof temp, "%.2f", call.temperature);
  return util::sha256_hex(json{{"messages", msgs}, {"temperature", temp}}.dump());
}

std::string dense_request_hash(const std::string& text) { return util::sha256_hex("dense\n" + text); }
std::string sparse_request_hash(const std::string& text) { return util::sha256_hex("sparse\n" + text); }
std::string rerank_request_hash(const std::string& query, const std::string& candidate) {
  return util::sha256_hex("rerank\n" + query + "\x1f" + candidate);
}

std::shared_ptr<ReplayStore> ReplayStore::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open replay fixture: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_lines(ss.str());
}

std::shared_ptr<ReplayStore> ReplayStore::from_lines(const std::string& jsonl) {
  auto store = std::make_shared<ReplayStore>();
  std::istringstream in(jsonl);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json rec = json::parse(line, nullptr, false);
    if (!rec.is_object() || !rec.contains("kind") || !rec.contains("request_hash") || !rec.contains("response"))
      throw FormatError("replay fixture line " + std::to_string(lineno) + " is not a valid record");
    store->records_[{rec["kind"].get<std::string>(), rec["request_hash"].get<std::string>()}] = rec["response"];
  }
  return store;
}

bool ReplayStore::contains(const std::string& kind, const std::string& hash) const {
  return records_.contains({kind, hash});
}

const json& ReplayStore::lookup(const std::string& kind, const std::string& hash) const {
  auto it = records_.find({kind, hash});
  if (it == records_.end()) throw BackendContractError("replay fixture has no " + kind + " record for " + hash);
  return it->second;
}

ChatReply ReplayChatBackend::chat(const ChatCall& call) {
  const json& r = store_->lookup("chat", chat_request_hash(call));
  return {r.at("content").get<std::string>(), r.value("length_overflow", false)};
}

namespace {

SparseVector sparse_from_json(const json& r) {
  SparseVector m;
  const auto& idx = r.at("indices");
  const auto& val = r.at("values");
  if (idx.size() != val.size()) throw BackendContractError("sparse record has mismatched indices/values");
  for (std::size_t i = 0; i < idx.size(); ++i) m[idx[i].get<std::uint32_t>()] = val[i].get<double>();
  return m;
}

json sparse_to_json(const SparseVector& m) {
  json idx = json::array(), val = json::array();
  for (const auto& [k, v] : m) {
    idx.push_back(k);
    val.push_back(v);
  }
  return json{{"indices", idx}, {"values", val}};
}

}  // namespace

std::vector<DenseVector> ReplayEmbeddingBackend::embed_dense(const std::vector<std::string>& texts) {
  std::vector<DenseVector> out;
  for (const auto& t : texts) out.push_back(store_->lookup("dense", dense_request_hash(t)).get<DenseVector>());
  return out;
}

std::vector<SparseVector> ReplayEmbeddingBackend::embed_sparse(const std::vector<std::string>& texts) {
  std::vector<SparseVector> out;
  for (const auto& t : texts) out.push_back(sparse_from_json(store_->lookup("sparse", sparse_request_hash(t))));
  return out;
}

std::vector<double> ReplayRerankBackend::rerank(const std::string& query, const std::vector<std::string>& candidates) {
  std::vector<double> out;
  for (const auto& c : candidates) out.push_back(store_->lookup("rerank", rerank_request_hash(query, c)).get<double>());
  return out;
}

void Recorder::add(const std::string& kind, const std::string& hash, json response, std::string note) {
  std::lock_guard lock(mu_);
  records_[{kind, hash}] = {std::move(response), std::move(note)};
}

std::string Recorder::to_jsonl() const {
  std::lock_guard lock(mu_);
  std::string out;
  for (const auto& [key, value] : records_) {
    json rec{{"kind", key.first}, {"request_hash", key.second}, {"response", value.first}};
    if (!value.second.empty()) rec["note"] = value.second;
    out += rec.dump() + "\n";
  }
  return out;
}

void Recorder::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write replay fixture: " + path.string());
  out << to_jsonl();
}

std::size_t Recorder::size() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

ChatReply RecordingChatBackend::chat(const ChatCall& call) {
  ChatReply r = inner_->chat(call);
  std::string note;
  if (call.messages.size() > 1) {
    const std::string& user = call.messages[1].content;
    std::size_t cut = std::min<std::size_t>(80, user.size());
    while (cut > 0 && cut < user.size() && (static_cast<unsigned char>(user[cut]) & 0xC0) == 0x80) --cut;
    note = user.substr(0, cut);
  }
  rec_->add("chat", chat_request_hash(call), json{{"content", r.content}, {"length_overflow", r.length_overflow}},
            std::move(note));
  return r;
}

std::vector<DenseVector> RecordingEmbeddingBackend::embed_dense(const std::vector<std::string>& texts) {
  auto out = inner_->embed_dense(texts);
  for (std::size_t i = 0; i < texts.size() && i < out.size(); ++i) rec_->add("dense", dense_request_hash(texts[i]), out[i]);
  return out;
}

std::vector<SparseVector> RecordingEmbeddingBackend::embed_sparse(const std::vector<std::string>& texts) {
  auto out = inner_->embed_sparse(texts);
  for (std::size_t i = 0; i < texts.size() && i < out.size(); ++i)
    rec_->add("sparse", sparse_request_hash(texts[i]), sparse_to_json(out[i]));
  return out;
}

std::vector<double> RecordingRerankBackend::rerank(const std::string& query, const std::vector<std::string>& candidates) {
  auto out = inner_->rerank(query, candidates);
  for (std::size_t i = 0; i < candidates.size() && i < out.size(); ++i)
    rec_->add("rerank", rerank_request_hash(query, candidates[i]), out[i]);
  return out;
}

}  // namespace ehrcheck::gateway
