#include "ehrcheck/app/config.hpp"

#include <cstdlib>
#include <set>

#include "ehrcheck/errors.hpp"

namespace ehrcheck::app {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw InputError("config: \"" + where + "\" must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items())
    if (!ok.contains(key)) throw InputError("config: unknown key \"" + (where.empty() ? key : where + "." + key) + "\"");
}

template <class T>
void read(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw InputError(std::string("config: bad value for \"") + key + "\"");
  }
}

template <class E, class Parse>
E parse_enum(const json& v, Parse parse, const char* what) {
  if (!v.is_string()) throw InputError(std::string("config: ") + what + " must be a string");
  auto e = parse(v.get<std::string>());
  if (!e) throw InputError(std::string("config: unknown ") + what + " \"" + v.get<std::string>() + "\"");
  return *e;
}

template <class E, class Parse>
void read_enum(const json& obj, const char* key, E& out, Parse parse) {
  if (obj.contains(key)) out = parse_enum<E>(obj.at(key), parse, key);
}

template <class E, class Parse>
void read_enum_list(const json& obj, const char* key, std::vector<E>& out, Parse parse) {
  if (!obj.contains(key)) return;
  if (!obj.at(key).is_array() || obj.at(key).empty()) throw InputError(std::string("config: ") + key + " must be a non-empty list");
  out.clear();
  for (const auto& v : obj.at(key)) out.push_back(parse_enum<E>(v, parse, key));
}

std::optional<judge::RelativeAnchor> parse_anchor(std::string_view s) {
  if (s == "note_date" || s == "NoteDate") return judge::RelativeAnchor::NoteDate;
  if (s == "timestamp" || s == "Timestamp") return judge::RelativeAnchor::Timestamp;
  return std::nullopt;
}

template <class E>
json enum_list(const std::vector<E>& v) {
  json out = json::array();
  for (auto e : v) out.push_back(to_string(e));
  return out;
}

}  // namespace

std::string to_string(BackendMode m) {
  switch (m) {
    case BackendMode::Heuristic: return "heuristic";
    case BackendMode::Replay: return "replay";
    case BackendMode::Http: return "http";
  }
  return "?";
}

std::optional<BackendMode> parse_backend_mode(std::string_view s) {
  if (s == "heuristic") return BackendMode::Heuristic;
  if (s == "replay") return BackendMode::Replay;
  if (s == "http") return BackendMode::Http;
  return std::nullopt;
}

void apply_config(AppConfig& cfg, const json& doc) {
  check_keys(doc, "", {"backend", "chunker", "retrieval", "context_format", "prop_type", "relative_anchor", "judge",
                       "max_error_rate", "workers", "prompts_dir", "summarizer", "cohort", "sweep"});
  if (doc.contains("backend")) {
    const auto& b = doc["backend"];
    check_keys(b, "backend", {"mode", "replay_path", "chat_url", "embed_url", "rerank_url", "api_key", "chat_model",
                              "embed_model", "rerank_model", "sparse_path", "rerank_path", "max_in_flight",
                              "embedding_dim", "timeout_seconds"});
    read_enum(b, "mode", cfg.backend.mode, parse_backend_mode);
    read(b, "replay_path", cfg.backend.replay_path);
    read(b, "chat_url", cfg.backend.chat_url);
    read(b, "embed_url", cfg.backend.embed_url);
    read(b, "rerank_url", cfg.backend.rerank_url);
    read(b, "api_key", cfg.backend.api_key);
    read(b, "chat_model", cfg.backend.chat_model);
    read(b, "embed_model", cfg.backend.embed_model);
    read(b, "rerank_model", cfg.backend.rerank_model);
    read(b, "sparse_path", cfg.backend.sparse_path);
    read(b, "rerank_path", cfg.backend.rerank_path);
    read(b, "max_in_flight", cfg.backend.max_in_flight);
    read(b, "embedding_dim", cfg.backend.embedding_dim);
    read(b, "timeout_seconds", cfg.backend.timeout_seconds);
  }
  if (doc.contains("chunker")) {
    const auto& c = doc["chunker"];
    check_keys(c, "chunker", {"max_tokens", "window_sentences", "split_percentile"});
    read(c, "max_tokens", cfg.chunker.max_tokens);
    read(c, "window_sentences", cfg.chunker.window_sentences);
    read(c, "split_percentile", cfg.chunker.split_percentile);
    cfg.chunker.validate();
  }
  if (doc.contains("retrieval")) {
    const auto& r = doc["retrieval"];
    check_keys(r, "retrieval", {"method", "top_n", "k_per_query", "scope"});
    read_enum(r, "method", cfg.retrieval.retrieval_method, parse_retrieval_method);
    read(r, "top_n", cfg.retrieval.top_n);
    read(r, "k_per_query", cfg.retrieval.k_per_query);
    read_enum(r, "scope", cfg.retrieval.scope, parse_scope);
    cfg.retrieval.validate();
  }
  read_enum(doc, "context_format", cfg.context_format, parse_context_format);
  read_enum(doc, "prop_type", cfg.prop_type, parse_prop_type);
  read_enum(doc, "relative_anchor", cfg.relative_anchor, parse_anchor);
  if (doc.contains("judge")) {
    const auto& j = doc["judge"];
    check_keys(j, "judge", {"temperature", "max_retries_heal"});
    read(j, "temperature", cfg.judge.temperature);
    read(j, "max_retries_heal", cfg.judge.max_retries_heal);
  }
  read(doc, "max_error_rate", cfg.max_error_rate);
  read(doc, "workers", cfg.workers);
  read(doc, "prompts_dir", cfg.prompts_dir);
  if (doc.contains("summarizer")) {
    const auto& s = doc["summarizer"];
    check_keys(s, "summarizer", {"note_chunk_tokens", "max_note_sentences", "bundle_tokens", "max_draft_tokens",
                                 "max_compactions", "temperature"});
    read(s, "note_chunk_tokens", cfg.summarizer.note_chunk_tokens);
    read(s, "max_note_sentences", cfg.summarizer.max_note_sentences);
    read(s, "bundle_tokens", cfg.summarizer.bundle_tokens);
    read(s, "max_draft_tokens", cfg.summarizer.max_draft_tokens);
    read(s, "max_compactions", cfg.summarizer.max_compactions);
    read(s, "temperature", cfg.summarizer.temperature);
  }
  if (doc.contains("cohort")) {
    const auto& c = doc["cohort"];
    check_keys(c, "cohort", {"bhc_header", "section_end", "discharge_category", "physician_category",
                             "min_physician_notes", "min_prior_notes"});
    read(c, "bhc_header", cfg.cohort.bhc_header);
    read(c, "section_end", cfg.cohort.section_end);
    read(c, "discharge_category", cfg.cohort.discharge_category);
    read(c, "physician_category", cfg.cohort.physician_category);
    read(c, "min_physician_notes", cfg.cohort.min_physician_notes);
    read(c, "min_prior_notes", cfg.cohort.min_prior_notes);
  }
  if (doc.contains("sweep")) {
    const auto& s = doc["sweep"];
    check_keys(s, "sweep", {"retrieval_methods", "top_n", "context_formats", "scopes", "prop_types", "workers",
                            "bootstrap_iterations", "seed"});
    read_enum_list(s, "retrieval_methods", cfg.sweep.retrieval_methods, parse_retrieval_method);
    read(s, "top_n", cfg.sweep.top_n);
    read_enum_list(s, "context_formats", cfg.sweep.context_formats, parse_context_format);
    read_enum_list(s, "scopes", cfg.sweep.scopes, parse_scope);
    read_enum_list(s, "prop_types", cfg.sweep.prop_types, parse_prop_type);
    read(s, "workers", cfg.sweep.workers);
    read(s, "bootstrap_iterations", cfg.sweep.bootstrap_iterations);
    read(s, "seed", cfg.sweep.seed);
    if (cfg.sweep.top_n.empty()) throw InputError("config: sweep.top_n must be non-empty");
    for (int n : cfg.sweep.top_n)
      if (n < 1) throw InputError("config: sweep.top_n values must be positive");
  }
  if (!(cfg.max_error_rate >= 0.0 && cfg.max_error_rate <= 1.0))
    throw InputError("config: max_error_rate must be in [0, 1]");
}

AppConfig load_config(const std::filesystem::path& path) {
  const json doc = json::parse(read_file(path), nullptr, false);
  if (doc.is_discarded()) throw InputError("config " + path.string() + " is not valid JSON");
  AppConfig cfg;
  apply_config(cfg, doc);
  return cfg;
}

json config_to_json(const AppConfig& c) {
  // Secrets stay out of anything that may be written to disk.
  return json{
      {"backend",
       {{"mode", to_string(c.backend.mode)},
        {"replay_path", c.backend.replay_path},
        {"chat_url", c.backend.chat_url},
        {"embed_url", c.backend.embed_url},
        {"rerank_url", c.backend.rerank_url},
        {"chat_model", c.backend.chat_model},
        {"embed_model", c.backend.embed_model},
        {"rerank_model", c.backend.rerank_model},
        {"sparse_path", c.backend.sparse_path},
        {"rerank_path", c.backend.rerank_path},
        {"max_in_flight", c.backend.max_in_flight},
        {"embedding_dim", c.backend.embedding_dim},
        {"timeout_seconds", c.backend.timeout_seconds}}},
      {"chunker",
       {{"max_tokens", c.chunker.max_tokens},
        {"window_sentences", c.chunker.window_sentences},
        {"split_percentile", c.chunker.split_percentile}}},
      {"retrieval",
       {{"method", to_string(c.retrieval.retrieval_method)},
        {"top_n", c.retrieval.top_n},
        {"k_per_query", c.retrieval.k_per_query},
        {"scope", to_string(c.retrieval.scope)}}},
      {"context_format", to_string(c.context_format)},
      {"prop_type", to_string(c.prop_type)},
      {"relative_anchor", c.relative_anchor == judge::RelativeAnchor::NoteDate ? "note_date" : "timestamp"},
      {"judge", {{"temperature", c.judge.temperature}, {"max_retries_heal", c.judge.max_retries_heal}}},
      {"max_error_rate", c.max_error_rate},
      {"workers", c.workers},
      {"prompts_dir", c.prompts_dir},
      {"summarizer",
       {{"note_chunk_tokens", c.summarizer.note_chunk_tokens},
        {"max_note_sentences", c.summarizer.max_note_sentences},
        {"bundle_tokens", c.summarizer.bundle_tokens},
        {"max_draft_tokens", c.summarizer.max_draft_tokens},
        {"max_compactions", c.summarizer.max_compactions},
        {"temperature", c.summarizer.temperature}}},
      {"cohort",
       {{"bhc_header", c.cohort.bhc_header},
        {"section_end", c.cohort.section_end},
        {"discharge_category", c.cohort.discharge_category},
        {"physician_category", c.cohort.physician_category},
        {"min_physician_notes", c.cohort.min_physician_notes},
        {"min_prior_notes", c.cohort.min_prior_notes}}},
      {"sweep",
       {{"retrieval_methods", enum_list(c.sweep.retrieval_methods)},
        {"top_n", c.sweep.top_n},
        {"context_formats", enum_list(c.sweep.context_formats)},
        {"scopes", enum_list(c.sweep.scopes)},
        {"prop_types", enum_list(c.sweep.prop_types)},
        {"workers", c.sweep.workers},
        {"bootstrap_iterations", c.sweep.bootstrap_iterations},
        {"seed", c.sweep.seed}}},
  };
}

void apply_environment(BackendConfig& cfg) {
  auto fill = [](std::string& field, const char* var) {
    if (!field.empty()) return;
    if (const char* v = std::getenv(var)) field = v;
  };
  fill(cfg.chat_url, "EHRCHECK_CHAT_URL");
  fill(cfg.embed_url, "EHRCHECK_EMBED_URL");
  fill(cfg.rerank_url, "EHRCHECK_RERANK_URL");
  fill(cfg.api_key, "EHRCHECK_API_KEY");
}

judge::VerifyConfig AppConfig::verify_config(AuthorType author) const {
  judge::VerifyConfig v;
  v.author = author;
  v.decompose.prop_type = prop_type;
  v.decompose.chunker = chunker;
  v.decompose.temperature = judge.temperature;
  v.decompose.max_retries_heal = judge.max_retries_heal;
  v.retrieval = retrieval;
  v.context_format = context_format;
  v.format.anchor = relative_anchor;
  v.judge = judge;
  v.max_error_rate = max_error_rate;
  v.workers = workers;
  return v;
}

}  // namespace ehrcheck::app
