#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ehrcheck/app/corpus.hpp"
#include "ehrcheck/judge/judge.hpp"
#include "ehrcheck/summarize/summarizer.hpp"

namespace ehrcheck::app {

enum class BackendMode { Heuristic, Replay, Http };

struct BackendConfig {
  BackendMode mode = BackendMode::Heuristic;
  std::string replay_path;  // Replay: fixture JSONL
  std::string chat_url;
  std::string embed_url;
  std::string rerank_url;
  std::string api_key;
  std::string chat_model;
  std::string embed_model;
  std::string rerank_model;
  std::string sparse_path;  // optional sparse-embedding route on embed_url
  std::string rerank_path = "/rerank";
  int max_in_flight = 8;
  std::size_t embedding_dim = 64;  // heuristic backend only
  int timeout_seconds = 120;
};

struct SweepGrid {
  std::vector<RetrievalMethod> retrieval_methods{RetrievalMethod::Dense, RetrievalMethod::Hybrid,
                                                 RetrievalMethod::Rerank};
  std::vector<int> top_n{5, 10, 25, 50};
  std::vector<ContextFormat> context_formats{ContextFormat::RelevanceScore, ContextFormat::AbsoluteTime,
                                             ContextFormat::RelativeTime};
  std::vector<Scope> scopes{Scope::CurrentAdmission, Scope::AllAdmissions};
  std::vector<PropType> prop_types{PropType::Sentence, PropType::AtomicClaim};
  std::size_t workers = 1;
  std::size_t bootstrap_iterations = 1000;
  std::uint64_t seed = 0;
};

// One declarative document; every key is optional and falls back to the
// defaults below.
struct AppConfig {
  BackendConfig backend;
  text::ChunkerConfig chunker;
  index::IndexConfig retrieval;
  ContextFormat context_format = ContextFormat::RelevanceScore;
  PropType prop_type = PropType::Sentence;
  judge::RelativeAnchor relative_anchor = judge::RelativeAnchor::NoteDate;
  judge::JudgeOptions judge;
  double max_error_rate = 0.10;
  std::size_t workers = 1;
  std::string prompts_dir;  // empty: builtin templates
  summarize::SummarizerConfig summarizer;
  CohortCriteria cohort;
  SweepGrid sweep;

  judge::VerifyConfig verify_config(AuthorType author) const;
};

// Missing keys keep their current values; unknown keys are rejected.
void apply_config(AppConfig& cfg, const nlohmann::json& doc);
AppConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const AppConfig& cfg);

// Fills endpoint fields that are still empty from EHRCHECK_CHAT_URL,
// EHRCHECK_EMBED_URL, EHRCHECK_RERANK_URL and EHRCHECK_API_KEY.
void apply_environment(BackendConfig& cfg);

std::string to_string(BackendMode m);
std::optional<BackendMode> parse_backend_mode(std::string_view s);

}  // namespace ehrcheck::app
