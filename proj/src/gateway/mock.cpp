#include "ehrcheck/gateway/mock.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "ehrcheck/errors.hpp"
#include "ehrcheck/text/sentences.hpp"
#include "ehrcheck/text/tokenizer.hpp"
#include "ehrcheck/util/hash.hpp"

namespace ehrcheck::gateway {

using nlohmann::json;

namespace {

const std::unordered_set<std::string>& stopwords() {
  static const std::unordered_set<std::string> words{
      "a",     "an",    "the",   "of",    "to",    "and",   "or",    "in",     "on",     "at",    "by",
      "for",   "with",  "from",  "as",    "is",    "was",   "were",  "be",     "been",   "being", "are",
      "has",   "have",  "had",   "this",  "that",  "these", "those", "it",     "its",    "he",    "she",
      "they",  "his",   "her",   "their", "him",   "them",  "we",    "i",      "you",    "our",   "your",
      "which", "who",   "whom",  "what",  "when",  "where", "why",   "how",    "there",  "here",  "than",
      "then",  "so",    "such",  "into",  "onto",  "over",  "under", "about",  "after",  "before", "during",
      "while", "also",  "very",  "can",   "could", "would", "should", "may",   "might",  "will",  "shall",
      "do",    "does",  "did",   "s",     "if",    "but",   "because", "any",  "all",    "some",  "each"};
  return words;
}

std::string first_word_lower(std::string_view text) {
  const auto words = text::word_tokens(text);
  return words.empty() ? std::string{} : words.front();
}

std::string last_raw_token(std::string_view text) {
  auto trimmed = text::normalize_whitespace(text);
  const auto pos = trimmed.rfind(' ');
  return pos == std::string::npos ? trimmed : trimmed.substr(pos + 1);
}

bool in(const std::string& w, std::initializer_list<std::string_view> list) {
  return std::find(list.begin(), list.end(), w) != list.end();
}

// Splits a rendered prompt back into its variable values, using the literal
// text between placeholders of the template as separators.
std::optional<std::vector<std::string>> extract_vars(std::string_view tmpl, std::string_view rendered) {
  std::vector<std::string_view> literals;
  std::size_t i = 0;
  for (;;) {
    const auto open = tmpl.find("{{", i);
    if (open == std::string_view::npos) {
      literals.push_back(tmpl.substr(i));
      break;
    }
    literals.push_back(tmpl.substr(i, open - i));
    const auto close = tmpl.find("}}", open);
    if (close == std::string_view::npos) return std::nullopt;
    i = close + 2;
  }
  if (!rendered.starts_with(literals.front()) || !rendered.ends_with(literals.back())) return std::nullopt;
  std::vector<std::string> values;
  std::size_t pos = literals.front().size();
  const std::size_t stop = rendered.size() - literals.back().size();
  for (std::size_t k = 1; k + 1 < literals.size(); ++k) {
    const auto next = rendered.find(literals[k], pos);
    if (next == std::string_view::npos || next > stop) return std::nullopt;
    values.emplace_back(rendered.substr(pos, next - pos));
    pos = next + literals[k].size();
  }
  if (pos > stop) return std::nullopt;
  values.emplace_back(rendered.substr(pos, stop - pos));
  return values;
}

std::string unescape_json_string(const std::string& escaped) {
  auto v = json::parse("\"" + escaped + "\"", nullptr, false);
  return v.is_string() ? v.get<std::string>() : escaped;
}

std::string leading_sentences(std::string_view text, std::size_t n) {
  const auto sentences = text::split_sentences(text);
  std::string out;
  for (std::size_t i = 0; i < std::min(n, sentences.size()); ++i) {
    if (!out.empty()) out += ' ';
    out += text::normalize_whitespace(sentences[i]);
  }
  return out;
}

std::string leading_words(std::string_view text, std::size_t n) {
  const auto norm = text::normalize_whitespace(text);
  std::size_t pos = 0;
  for (std::size_t k = 0; k < n; ++k) {
    pos = norm.find(' ', pos + (k > 0 ? 1 : 0));
    if (pos == std::string::npos) return norm;
  }
  return norm.substr(0, pos);
}

std::string fmt_fraction(std::size_t k, std::size_t n) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%zu of %zu", k, n);
  return buf;
}

}  // namespace

std::vector<std::string> content_tokens(std::string_view text) {
  std::vector<std::string> out;
  for (auto& w : text::word_tokens(text))
    if (!stopwords().contains(w)) out.push_back(std::move(w));
  return out;
}

bool looks_imperative(std::string_view text) {
  const std::string w = first_word_lower(text);
  return in(w, {"close", "open", "read", "take", "give", "call", "return", "follow", "stop", "avoid", "check",
                "please", "make", "keep", "let", "hold", "resume", "discontinue", "apply", "use", "go",
                "remember", "ensure", "consider", "schedule", "contact"});
}

bool looks_interrogative(std::string_view text) { return text.find('?') != std::string_view::npos; }

bool looks_incomplete(std::string_view text) {
  const auto words = text::word_tokens(text);
  if (words.size() < 3) return true;
  if (in(words.front(), {"because", "when", "although", "if", "since", "while", "unless", "whereas"})) return true;
  return in(words.back(), {"a", "an", "the", "of", "to", "and", "or", "with", "for", "in", "on", "at", "by", "from"});
}

bool looks_vague(std::string_view text) {
  const std::string w = first_word_lower(text);
  if (in(w, {"he", "she", "they", "it", "this", "that", "these", "those", "his", "her", "their"})) return true;
  if (in(w, {"found", "noted", "seen", "started", "given", "treated", "continued", "diagnosed", "admitted",
             "transferred", "discharged", "was", "were", "is", "are", "has", "had"}))
    return true;
  const std::string last = last_raw_token(text);
  return last == "Dr." || last == "Dr";
}

double content_coverage(std::string_view proposition, std::string_view reference) {
  const auto prop = content_tokens(proposition);
  if (prop.empty()) return 0.0;
  const auto ref_words = text::word_tokens(reference);
  const std::unordered_set<std::string> ref(ref_words.begin(), ref_words.end());
  std::size_t hit = 0;
  for (const auto& t : prop) hit += ref.contains(t) ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(prop.size());
}

Verdict heuristic_verdict(std::string_view proposition, std::string_view reference, const HeuristicJudgeThresholds& t) {
  const double c = content_coverage(proposition, reference);
  if (c >= t.supported) return Verdict::Supported;
  if (c < t.addressed) return Verdict::NotAddressed;
  return Verdict::NotSupported;
}

HeuristicChatBackend::HeuristicChatBackend(const PromptLibrary& prompts, HeuristicJudgeThresholds thresholds)
    : prompts_(prompts), thresholds_(thresholds) {}

ChatReply HeuristicChatBackend::chat(const ChatCall& call) {
  if (call.messages.size() < 2) throw BackendContractError("heuristic backend expects system and user messages");
  const std::string& system = call.messages[0].content;
  // Heal turns are answered from the original request.
  const std::string& user = call.messages[1].content;
  auto vars_for = [&](PromptId id) { return extract_vars(prompts_.get(id), user); };

  if (system == prompts_.get(PromptId::ClaimSystem)) {
    if (auto v = vars_for(PromptId::ClaimPresence)) {
      const std::string text = unescape_json_string(v->at(0));
      return {json{{"contains_atomic_claim", !looks_incomplete(text)}}.dump(), false};
    }
    if (auto v = vars_for(PromptId::ClaimExtract)) {
      json claims = json::array();
      for (const auto& s : text::split_sentences(unescape_json_string(v->at(0))))
        claims.push_back(text::normalize_whitespace(s));
      return {json{{"claims", claims}}.dump(), false};
    }
  } else if (system == prompts_.get(PromptId::ValiditySystem)) {
    struct Probe {
      PromptId id;
      const char* key;
      bool (*fn)(std::string_view);
    };
    static constexpr Probe probes[] = {
        {PromptId::ValidityImperative, "contains_imperative_statement", looks_imperative},
        {PromptId::ValidityInterrogative, "contains_interrogative_statement", looks_interrogative},
        {PromptId::ValidityIncomplete, "contains_incomplete_statement", looks_incomplete},
        {PromptId::ValidityVague, "contains_vague_statement", looks_vague},
    };
    for (const auto& p : probes) {
      if (auto v = vars_for(p.id)) return {json{{p.key, p.fn(unescape_json_string(v->at(0)))}}.dump(), false};
    }
  } else if (system == prompts_.get(PromptId::JudgeSystem)) {
    if (auto v = vars_for(PromptId::JudgeVerdict)) {
      const json input = json::parse(v->at(0), nullptr, false);
      if (input.is_object() && input.contains("text") && input.contains("reference")) {
        const auto text = input["text"].get<std::string>();
        const auto reference = input["reference"].get<std::string>();
        const auto prop = content_tokens(text);
        const double cov = content_coverage(text, reference);
        const auto verdict = heuristic_verdict(text, reference, thresholds_);
        const auto hits = static_cast<std::size_t>(std::llround(cov * static_cast<double>(prop.size())));
        const std::string reason = fmt_fraction(hits, prop.size()) +
                                   " content words of the text appear in the reference context.";
        return {json{{"verdict", to_string(verdict)}, {"reason", reason}}.dump(), false};
      }
    }
    if (auto v = vars_for(PromptId::LabelSummary)) {
      const json input = json::parse(v->at(1), nullptr, false);
      std::vector<std::string> reasons;
      if (input.is_object() && input.contains("reasons"))
        for (const auto& r : input["reasons"])
          if (std::find(reasons.begin(), reasons.end(), r.get<std::string>()) == reasons.end())
            reasons.push_back(r.get<std::string>());
      std::string summary;
      for (const auto& r : reasons) summary += (summary.empty() ? "" : " ") + r;
      if (summary.empty()) summary = "No reasons were provided.";
      return {json{{"summary", summary}}.dump(), false};
    }
  } else if (system == prompts_.get(PromptId::WriterSystem)) {
    if (auto v = vars_for(PromptId::NoteChunkSummary)) return {leading_sentences(v->at(0), 2), false};
    if (auto v = vars_for(PromptId::CombineSummaries)) return {leading_sentences(v->at(0), 4), false};
    if (auto v = vars_for(PromptId::BhcInitial)) return {leading_sentences(v->at(0), 3), false};
    if (auto v = vars_for(PromptId::BhcRefine)) {
      const std::string addition = leading_sentences(v->at(1), 2);
      return {text::normalize_whitespace(v->at(0)) + (addition.empty() ? "" : " " + addition), false};
    }
    if (auto v = vars_for(PromptId::BhcCompact)) {
      const auto sentences = text::split_sentences(v->at(0));
      if (sentences.size() > 1) return {leading_sentences(v->at(0), (sentences.size() + 1) / 2), false};
      const auto words = text::word_tokens(v->at(0));
      return {leading_words(v->at(0), std::max<std::size_t>(1, words.size() / 2)), false};
    }
  }
  throw BackendContractError("heuristic chat backend does not recognize this prompt");
}

HeuristicEmbeddingBackend::HeuristicEmbeddingBackend(std::size_t dim) : dim_(dim) {
  if (dim_ == 0) throw InputError("embedding dimension must be positive");
}

std::vector<DenseVector> HeuristicEmbeddingBackend::embed_dense(const std::vector<std::string>& texts) {
  std::vector<DenseVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    DenseVector v(dim_, 0.0);
    for (const auto& w : text::word_tokens(t)) {
      const auto h = util::fnv1a64(w);
      v[h % dim_] += ((h >> 32) & 1U) ? 1.0 : -1.0;
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    if (norm > 0.0) {
      norm = std::sqrt(norm);
      for (double& x : v) x /= norm;
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<SparseVector> HeuristicEmbeddingBackend::embed_sparse(const std::vector<std::string>& texts) {
  std::vector<SparseVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    SparseVector m;
    for (const auto& w : content_tokens(t)) m[static_cast<std::uint32_t>(util::fnv1a64(w) & 0xFFFFFU)] += 1.0;
    double norm = 0.0;
    for (const auto& [id, w] : m) norm += w * w;
    norm = std::sqrt(norm);
    if (norm > 0.0)
      for (auto& [id, w] : m) w /= norm;
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<double> HeuristicRerankBackend::rerank(const std::string& query, const std::vector<std::string>& candidates) {
  const auto qv = content_tokens(query);
  const std::set<std::string> q(qv.begin(), qv.end());
  std::vector<double> scores;
  scores.reserve(candidates.size());
  for (const auto& c : candidates) {
    const auto cv = content_tokens(c);
    const std::set<std::string> cs(cv.begin(), cv.end());
    std::size_t inter = 0;
    for (const auto& w : cs) inter += q.contains(w) ? 1 : 0;
    const std::size_t uni = q.size() + cs.size() - inter;
    scores.push_back(uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni));
  }
  return scores;
}

ScriptedChatBackend::ScriptedChatBackend(std::vector<ChatReply> replies) : replies_(replies.begin(), replies.end()) {}

void ScriptedChatBackend::push(ChatReply reply) {
  std::lock_guard lock(mu_);
  replies_.push_back(std::move(reply));
}

ChatReply ScriptedChatBackend::chat(const ChatCall& call) {
  std::lock_guard lock(mu_);
  calls_.push_back(call);
  if (replies_.empty()) throw BackendContractError("scripted chat backend ran out of replies");
  ChatReply r = std::move(replies_.front());
  replies_.pop_front();
  return r;
}

std::vector<ChatCall> ScriptedChatBackend::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::vector<double> ScriptedChatBackend::temperatures() const {
  std::lock_guard lock(mu_);
  std::vector<double> out;
  for (const auto& c : calls_) out.push_back(c.temperature);
  return out;
}

ChatReply FunctionChatBackend::chat(const ChatCall& call) {
  {
    std::lock_guard lock(mu_);
    ++calls_;
  }
  return fn_(call);
}

std::size_t FunctionChatBackend::call_count() const {
  std::lock_guard lock(mu_);
  return calls_;
}

}  // namespace ehrcheck::gateway
