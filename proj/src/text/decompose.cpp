#include "ehrcheck/text/decompose.hpp"

#include <algorithm>

#include "ehrcheck/errors.hpp"
#include "ehrcheck/gateway/json_schema.hpp"
#include "ehrcheck/text/sentences.hpp"
#include "ehrcheck/util/parallel.hpp"

namespace ehrcheck::text {

using gateway::json;

namespace {

gateway::ChatRequest make_request(const PromptLibrary& prompts, PromptId system, PromptId user, std::string_view text,
                                  json schema, const DecomposeOptions& opts) {
  gateway::ChatRequest req;
  req.system_prompt = prompts.get(system);
  req.user_prompt = render_template(prompts.get(user), {{"text", json_escape(text)}});
  req.temperature = opts.temperature;
  req.max_retries_heal = opts.max_retries_heal;
  req.response_schema = std::move(schema);
  return req;
}

std::string last_output(const StructuredOutputError& e) {
  return e.transcript().empty() ? std::string{} : e.transcript().back().output;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::string unit_id(std::string_view doc_id, PropType type, std::size_t index) {
  return std::string(doc_id) + (type == PropType::Sentence ? ":s" : ":a") + std::to_string(index);
}

std::vector<std::string> extract_atomic_claims(const TextChunk& chunk, gateway::Gateway& gw,
                                               const PromptLibrary& prompts, const DecomposeOptions& opts) {
  if (trim(chunk.text).empty()) return {};
  try {
    const json presence = gw.chat_structured(
        make_request(prompts, PromptId::ClaimSystem, PromptId::ClaimPresence, chunk.text,
                     gateway::object_schema({{"contains_atomic_claim", gateway::boolean_schema()}}), opts));
    if (!presence["contains_atomic_claim"].get<bool>()) return {};

    const json extracted = gw.chat_structured(
        make_request(prompts, PromptId::ClaimSystem, PromptId::ClaimExtract, chunk.text,
                     gateway::object_schema({{"claims", gateway::string_array_schema()}}), opts));
    std::vector<std::string> claims;
    for (const auto& c : extracted["claims"]) {
      std::string claim = trim(c.get<std::string>());
      if (claim.empty() || std::find(claims.begin(), claims.end(), claim) != claims.end()) continue;
      claims.push_back(std::move(claim));
    }
    return claims;
  } catch (const StructuredOutputError& e) {
    throw ExtractionError("claim extraction failed for " + chunk.chunk_id + ": " + e.what(), last_output(e));
  }
}

ValidityReport classify_validity(std::string_view prop_text, gateway::Gateway& gw, const PromptLibrary& prompts,
                                 const DecomposeOptions& opts) {
  if (trim(prop_text).empty()) throw InputError("validity classification needs non-empty text");
  struct Probe {
    PromptId prompt;
    const char* key;
    Flag ValidityReport::*flag;
  };
  static constexpr Probe probes[] = {
      {PromptId::ValidityImperative, "contains_imperative_statement", &ValidityReport::imperative},
      {PromptId::ValidityInterrogative, "contains_interrogative_statement", &ValidityReport::interrogative},
      {PromptId::ValidityIncomplete, "contains_incomplete_statement", &ValidityReport::incomplete},
      {PromptId::ValidityVague, "contains_vague_statement", &ValidityReport::vague},
  };
  ValidityReport report;
  for (const auto& p : probes) {
    try {
      const json r = gw.chat_structured(make_request(prompts, PromptId::ValiditySystem, p.prompt, prop_text,
                                                     gateway::object_schema({{p.key, gateway::boolean_schema()}}),
                                                     opts));
      report.*p.flag = r[p.key].get<bool>() ? Flag::True : Flag::False;
    } catch (const StructuredOutputError&) {
      report.*p.flag = Flag::Unknown;
    }
  }
  return report;
}

std::vector<std::string> decompose_units(std::string_view doc_id, std::string_view text, const DecomposeOptions& opts,
                                         gateway::Gateway& gw, const PromptLibrary& prompts) {
  opts.chunker.validate();
  if (trim(text).empty()) return {};
  const EmbedFn embed = [&gw](const std::vector<std::string>& batch) { return gw.embed_dense(batch); };
  const auto chunks = semantic_chunks(doc_id, text, opts.chunker, embed);

  std::vector<std::vector<std::string>> per_chunk(chunks.size());
  if (opts.prop_type == PropType::Sentence) {
    for (std::size_t i = 0; i < chunks.size(); ++i) per_chunk[i] = split_sentences(chunks[i].text);
  } else {
    util::parallel_for(chunks.size(), opts.workers,
                       [&](std::size_t i) { per_chunk[i] = extract_atomic_claims(chunks[i], gw, prompts, opts); });
  }
  std::vector<std::string> units;
  for (auto& c : per_chunk)
    for (auto& u : c) units.push_back(normalize_whitespace(u));
  return units;
}

std::vector<Proposition> decompose_text(std::string_view doc_id, std::string_view text, AuthorType author,
                                        const DecomposeOptions& opts, gateway::Gateway& gw,
                                        const PromptLibrary& prompts) {
  const auto units = decompose_units(doc_id, text, opts, gw, prompts);
  std::vector<Proposition> props(units.size());
  for (std::size_t i = 0; i < units.size(); ++i) {
    props[i].prop_id = unit_id(doc_id, opts.prop_type, i);
    props[i].source_doc_id = std::string(doc_id);
    props[i].author_type = author;
    props[i].prop_type = opts.prop_type;
    props[i].text = units[i];
  }
  if (opts.classify_validity)
    util::parallel_for(props.size(), opts.workers,
                       [&](std::size_t i) { props[i].validity = classify_validity(props[i].text, gw, prompts, opts); });
  return props;
}

std::vector<Fact> decompose_note(const ClinicalNote& note, const DecomposeOptions& opts, gateway::Gateway& gw,
                                 const PromptLibrary& prompts) {
  const auto units = decompose_units(note.note_id, note.text, opts, gw, prompts);
  if (units.empty()) return {};
  auto dense = gw.embed_dense(units);
  auto sparse = gw.embed_sparse(units);
  std::vector<Fact> facts(units.size());
  for (std::size_t i = 0; i < units.size(); ++i) {
    Fact& f = facts[i];
    f.fact_id = note.note_id + ":f" + std::to_string(i);
    f.note_id = note.note_id;
    f.text = units[i];
    f.dense_vec = std::move(dense[i]);
    f.sparse_vec = std::move(sparse[i]);
    f.timestamp = note.timestamp;
    f.category = note.category;
    f.description = note.description;
    f.admission_id = note.admission_id;
  }
  return facts;
}

}  // namespace ehrcheck::text
