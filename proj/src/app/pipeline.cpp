#include "ehrcheck/app/pipeline.hpp"

#include "ehrcheck/errors.hpp"
#include "ehrcheck/gateway/http.hpp"
#include "ehrcheck/gateway/mock.hpp"
#include "ehrcheck/text/decompose.hpp"
#include "ehrcheck/util/parallel.hpp"

namespace ehrcheck::app {

using namespace ehrcheck::gateway;

std::unique_ptr<Gateway> make_gateway(const BackendConfig& cfg, const PromptLibrary& prompts,
                                      std::shared_ptr<Recorder> recorder) {
  std::shared_ptr<ChatBackend> chat;
  std::shared_ptr<EmbeddingBackend> embed;
  std::shared_ptr<RerankBackend> rerank;
  switch (cfg.mode) {
    case BackendMode::Heuristic:
      chat = std::make_shared<HeuristicChatBackend>(prompts);
      embed = std::make_shared<HeuristicEmbeddingBackend>(cfg.embedding_dim);
      rerank = std::make_shared<HeuristicRerankBackend>();
      break;
    case BackendMode::Replay: {
      if (cfg.replay_path.empty()) throw InputError("replay mode needs backend.replay_path");
      auto store = ReplayStore::load(cfg.replay_path);
      chat = std::make_shared<ReplayChatBackend>(store);
      embed = std::make_shared<ReplayEmbeddingBackend>(store);
      rerank = std::make_shared<ReplayRerankBackend>(store);
      break;
    }
    case BackendMode::Http: {
      if (cfg.chat_url.empty() || cfg.embed_url.empty())
        throw InputError("http mode needs chat and embedding endpoints (EHRCHECK_CHAT_URL, EHRCHECK_EMBED_URL)");
      chat = std::make_shared<HttpChatBackend>(HttpEndpoint{cfg.chat_url, cfg.chat_model, cfg.api_key, cfg.timeout_seconds});
      std::optional<std::string> sparse;
      if (!cfg.sparse_path.empty()) sparse = cfg.sparse_path;
      embed = std::make_shared<HttpEmbeddingBackend>(
          HttpEndpoint{cfg.embed_url, cfg.embed_model, cfg.api_key, cfg.timeout_seconds}, sparse);
      if (!cfg.rerank_url.empty())
        rerank = std::make_shared<HttpRerankBackend>(
            HttpEndpoint{cfg.rerank_url, cfg.rerank_model, cfg.api_key, cfg.timeout_seconds}, cfg.rerank_path);
      break;
    }
  }
  if (recorder) {
    chat = std::make_shared<RecordingChatBackend>(chat, recorder);
    embed = std::make_shared<RecordingEmbeddingBackend>(embed, recorder);
    if (rerank) rerank = std::make_shared<RecordingRerankBackend>(rerank, recorder);
  }
  GatewayOptions opts;
  opts.max_in_flight = cfg.max_in_flight;
  return std::make_unique<Gateway>(chat, embed, rerank, opts);
}

PromptLibrary load_prompts(const AppConfig& cfg) {
  return cfg.prompts_dir.empty() ? PromptLibrary::builtin() : PromptLibrary::from_directory(cfg.prompts_dir);
}

index::FactIndex build_index(const std::vector<ClinicalNote>& notes, PropType fact_type, const AppConfig& cfg,
                             gateway::Gateway& gw, const PromptLibrary& prompts) {
  text::DecomposeOptions opts;
  opts.prop_type = fact_type;
  opts.chunker = cfg.chunker;
  opts.classify_validity = false;
  opts.temperature = cfg.judge.temperature;
  opts.max_retries_heal = cfg.judge.max_retries_heal;
  std::vector<std::vector<Fact>> per_note(notes.size());
  util::parallel_for(notes.size(), cfg.workers,
                     [&](std::size_t i) { per_note[i] = text::decompose_note(notes[i], opts, gw, prompts); });
  index::FactIndex idx(cfg.retrieval.dense_dim);
  std::vector<Fact> all;
  for (auto& facts : per_note)
    for (auto& f : facts) all.push_back(std::move(f));
  idx.ingest(std::move(all));
  return idx;
}

}  // namespace ehrcheck::app
