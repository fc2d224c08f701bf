#include "ehrcheck/summarize/summarizer.hpp"

#include <algorithm>

#include "ehrcheck/errors.hpp"
#include "ehrcheck/text/sentences.hpp"
#include "ehrcheck/util/parallel.hpp"

namespace ehrcheck::summarize {

namespace {

std::string ask(gateway::Gateway& gw, const PromptLibrary& prompts, PromptId id,
                const std::vector<std::pair<std::string, std::string>>& vars, const SummarizerConfig& cfg) {
  gateway::TextRequest req;
  req.system_prompt = prompts.get(PromptId::WriterSystem);
  req.user_prompt = render_template(prompts.get(id), vars);
  req.temperature = cfg.temperature;
  return text::normalize_whitespace(gw.chat_text(req));
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

std::string truncate_tokens(std::string_view text, std::size_t max_tokens, const text::Tokenizer& tok) {
  const auto spans = tok.tokenize(text);
  if (spans.size() <= max_tokens) return std::string(text);
  if (max_tokens == 0) return {};
  return std::string(text.substr(0, spans[max_tokens - 1].end));
}

std::vector<std::string> pack_text(std::string_view text, std::size_t max_tokens, const text::Tokenizer& tok) {
  if (max_tokens == 0) throw InputError("chunk bound must be positive");
  std::vector<std::string> pieces;
  std::string current;
  std::size_t current_tokens = 0;
  auto flush = [&] {
    if (!current.empty()) pieces.push_back(std::move(current));
    current.clear();
    current_tokens = 0;
  };
  for (const auto& sentence : text::split_sentences(text)) {
    const auto spans = tok.tokenize(sentence);
    if (spans.size() > max_tokens) {
      flush();
      std::string_view rest = sentence;
      std::size_t start = 0;
      while (start < spans.size()) {
        const std::size_t stop = std::min(start + max_tokens, spans.size());
        pieces.emplace_back(rest.substr(spans[start].begin, spans[stop - 1].end - spans[start].begin));
        start = stop;
      }
      continue;
    }
    if (current_tokens + spans.size() > max_tokens) flush();
    current += (current.empty() ? "" : " ") + sentence;
    current_tokens += spans.size();
  }
  flush();
  return pieces;
}

std::vector<std::vector<std::size_t>> pack_bundles(const std::vector<std::size_t>& sizes, std::size_t cap) {
  std::vector<std::vector<std::size_t>> bundles;
  std::size_t total = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (bundles.empty() || total + sizes[i] > cap) {
      bundles.emplace_back();
      total = 0;
    }
    bundles.back().push_back(i);
    total += sizes[i];
  }
  return bundles;
}

std::string summarize_note(const ClinicalNote& note, gateway::Gateway& gw, const PromptLibrary& prompts,
                           const SummarizerConfig& cfg, NoteSummaryTrace* trace) {
  NoteSummaryTrace local;
  NoteSummaryTrace& t = trace ? *trace : local;
  t = {};
  const auto chunks = pack_text(note.text, cfg.note_chunk_tokens);
  if (chunks.empty()) return {};
  t.chunks = chunks.size();

  std::vector<std::string> partial;
  for (const auto& c : chunks) partial.push_back(ask(gw, prompts, PromptId::NoteChunkSummary, {{"text", c}}, cfg));
  std::string summary = partial.front();
  if (partial.size() > 1) {
    summary = ask(gw, prompts, PromptId::CombineSummaries, {{"text", join(partial, "\n\n")}}, cfg);
    t.combined = true;
  }
  if (text::split_sentences(summary).size() > cfg.max_note_sentences) {
    summary = ask(gw, prompts, PromptId::CombineSummaries, {{"text", summary}}, cfg);
    t.reasked = true;
    auto sentences = text::split_sentences(summary);
    if (sentences.size() > cfg.max_note_sentences) {
      sentences.resize(cfg.max_note_sentences);
      summary = join(sentences, " ");
      t.truncated = true;
    }
  }
  return summary;
}

std::string generate_bhc(std::vector<ClinicalNote> notes, gateway::Gateway& gw, const PromptLibrary& prompts,
                         const SummarizerConfig& cfg, BhcTrace* trace) {
  if (notes.empty()) throw EmptyInput("no notes to summarize");
  BhcTrace local;
  BhcTrace& t = trace ? *trace : local;
  t = {};
  std::stable_sort(notes.begin(), notes.end(), [](const ClinicalNote& a, const ClinicalNote& b) {
    return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.note_id < b.note_id;
  });

  std::vector<std::string> summaries(notes.size());
  util::parallel_for(notes.size(), cfg.workers,
                     [&](std::size_t i) { summaries[i] = summarize_note(notes[i], gw, prompts, cfg); });
  std::erase_if(summaries, [](const std::string& s) { return s.empty(); });
  if (summaries.empty()) throw EmptyInput("every note was empty");
  t.note_summaries = summaries;

  const auto& tok = text::default_tokenizer();
  std::vector<std::size_t> sizes;
  for (const auto& s : summaries) sizes.push_back(tok.count(s));
  t.bundles = pack_bundles(sizes, cfg.bundle_tokens);

  auto bound = [&](std::string draft) {
    for (int round = 0; tok.count(draft) > cfg.max_draft_tokens && round < cfg.max_compactions; ++round) {
      draft = ask(gw, prompts, PromptId::BhcCompact, {{"brief_hospital_course", draft}}, cfg);
      ++t.compactions;
    }
    if (tok.count(draft) > cfg.max_draft_tokens) {
      draft = truncate_tokens(draft, cfg.max_draft_tokens, tok);
      ++t.hard_truncations;
    }
    return draft;
  };

  std::string draft;
  for (std::size_t b = 0; b < t.bundles.size(); ++b) {
    std::vector<std::string> parts;
    for (auto i : t.bundles[b]) parts.push_back(summaries[i]);
    const std::string bundle = join(parts, "\n\n");
    if (b == 0) {
      draft = ask(gw, prompts, PromptId::BhcInitial, {{"text", bundle}}, cfg);
    } else {
      draft = ask(gw, prompts, PromptId::BhcRefine, {{"brief_hospital_course", draft}, {"new_text", bundle}}, cfg);
      ++t.refine_calls;
    }
    draft = bound(std::move(draft));
  }
  return draft;
}

}  // namespace ehrcheck::summarize
