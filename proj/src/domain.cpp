#include "ehrcheck/domain.hpp"

#include <cctype>
#include <cstdio>
#include <numeric>

#include "ehrcheck/errors.hpp"

namespace ehrcheck {

BinaryVerdict binarize(Verdict v) noexcept {
  return v == Verdict::Supported ? BinaryVerdict::Supported : BinaryVerdict::NotSupportedOrAddressed;
}

Verdict lift(BinaryVerdict b) noexcept {
  return b == BinaryVerdict::Supported ? Verdict::Supported : Verdict::NotSupported;
}

Fraction Fraction::make(std::int64_t num, std::int64_t den) {
  if (den == 0) throw InputError("fraction with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
  return g > 1 ? Fraction{num / g, den / g} : Fraction{num, den};
}

std::size_t ScoreSheet::count(Verdict v) const noexcept {
  switch (v) {
    case Verdict::Supported: return n_supported;
    case Verdict::NotSupported: return n_not_supported;
    case Verdict::NotAddressed: return n_not_addressed;
  }
  return 0;
}

Fraction ScoreSheet::pct_exact(Verdict v) const {
  if (n_propositions == 0) return Fraction{};
  return Fraction::make(100 * static_cast<std::int64_t>(count(v)), static_cast<std::int64_t>(n_propositions));
}

ScoreSheet build_score_sheet(std::string doc_id, const std::vector<VerdictRecord>& verdicts,
                             const std::map<Verdict, std::string>& summaries) {
  if (verdicts.empty()) throw EmptyInput("cannot build a score sheet from zero verdicts");
  ScoreSheet sheet;
  sheet.doc_id = std::move(doc_id);
  sheet.n_propositions = verdicts.size();
  for (const auto& v : verdicts) {
    switch (v.label) {
      case Verdict::Supported: ++sheet.n_supported; break;
      case Verdict::NotSupported: ++sheet.n_not_supported; break;
      case Verdict::NotAddressed: ++sheet.n_not_addressed; break;
    }
  }
  for (Verdict v : kAllVerdicts) {
    auto it = summaries.find(v);
    sheet.summary_per_label[v] = it == summaries.end() ? std::string{} : it->second;
  }
  return sheet;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Supported: return "Supported";
    case Verdict::NotSupported: return "Not Supported";
    case Verdict::NotAddressed: return "Not Addressed";
  }
  return {};
}

std::string to_string(BinaryVerdict v) {
  return v == BinaryVerdict::Supported ? "Supported" : "Not Supported or Addressed";
}

std::string to_string(AuthorType v) { return v == AuthorType::LLMWritten ? "llm" : "human"; }
std::string to_string(PropType v) { return v == PropType::Sentence ? "sentence" : "atomic_claim"; }

std::string to_string(RetrievalMethod v) {
  switch (v) {
    case RetrievalMethod::Dense: return "dense";
    case RetrievalMethod::Hybrid: return "hybrid";
    case RetrievalMethod::Rerank: return "rerank";
  }
  return {};
}

std::string to_string(ContextFormat v) {
  switch (v) {
    case ContextFormat::RelevanceScore: return "relevance_score";
    case ContextFormat::AbsoluteTime: return "absolute_time";
    case ContextFormat::RelativeTime: return "relative_time";
  }
  return {};
}

std::string to_string(Scope v) { return v == Scope::CurrentAdmission ? "current_admission" : "all_admissions"; }

std::string to_string(Flag v) {
  switch (v) {
    case Flag::False: return "false";
    case Flag::True: return "true";
    case Flag::Unknown: return "unknown";
  }
  return {};
}

namespace {

// Lowercase, alphanumerics only: "Not Supported" == "not_supported" == "NOTSUPPORTED".
std::string squash(std::string_view s) {
  std::string out;
  for (char c : s)
    if (std::isalnum(static_cast<unsigned char>(c))) out.push_back(static_cast<char>(std::tolower(c)));
  return out;
}

}  // namespace

std::optional<Verdict> parse_verdict(std::string_view s) {
  const auto k = squash(s);
  if (k == "supported") return Verdict::Supported;
  if (k == "notsupported") return Verdict::NotSupported;
  if (k == "notaddressed") return Verdict::NotAddressed;
  return std::nullopt;
}

std::optional<AuthorType> parse_author_type(std::string_view s) {
  const auto k = squash(s);
  if (k == "llm" || k == "llmwritten") return AuthorType::LLMWritten;
  if (k == "human" || k == "humanwritten") return AuthorType::HumanWritten;
  return std::nullopt;
}

std::optional<PropType> parse_prop_type(std::string_view s) {
  const auto k = squash(s);
  if (k == "sentence") return PropType::Sentence;
  if (k == "atomicclaim" || k == "claim") return PropType::AtomicClaim;
  return std::nullopt;
}

std::optional<RetrievalMethod> parse_retrieval_method(std::string_view s) {
  const auto k = squash(s);
  if (k == "dense") return RetrievalMethod::Dense;
  if (k == "hybrid") return RetrievalMethod::Hybrid;
  if (k == "rerank") return RetrievalMethod::Rerank;
  return std::nullopt;
}

std::optional<ContextFormat> parse_context_format(std::string_view s) {
  const auto k = squash(s);
  if (k == "relevancescore" || k == "score") return ContextFormat::RelevanceScore;
  if (k == "absolutetime" || k == "absolute") return ContextFormat::AbsoluteTime;
  if (k == "relativetime" || k == "relative") return ContextFormat::RelativeTime;
  return std::nullopt;
}

std::optional<Scope> parse_scope(std::string_view s) {
  const auto k = squash(s);
  if (k == "currentadmission" || k == "current") return Scope::CurrentAdmission;
  if (k == "alladmissions" || k == "all") return Scope::AllAdmissions;
  return std::nullopt;
}

std::string render_percent(double pct) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", pct);
  return buf;
}

}  // namespace ehrcheck
