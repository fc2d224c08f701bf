#pragma once

// Core data model shared across the engine, plus the verdict label algebra.
// Every type here is an immutable-by-convention value type.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ehrcheck/time.hpp"

namespace ehrcheck {

struct ClinicalNote {
  std::string note_id;
  std::string patient_id;
  std::string admission_id;
  std::string category;
  std::string description;
  Timestamp timestamp{};
  std::string text;
};

struct AdmissionWindow {
  std::string admission_id;
  Timestamp start{};
  Timestamp end{};
};

enum class AuthorType { LLMWritten, HumanWritten };
enum class PropType { Sentence, AtomicClaim };

// A validity flag is tri-state: the classifier may fail to produce an answer.
enum class Flag { False, True, Unknown };

struct ValidityReport {
  Flag imperative = Flag::False;
  Flag interrogative = Flag::False;
  Flag incomplete = Flag::False;
  Flag vague = Flag::False;
  bool human_overridden = false;

  // True only when every flag is known to be False.
  bool valid() const noexcept {
    return imperative == Flag::False && interrogative == Flag::False && incomplete == Flag::False &&
           vague == Flag::False;
  }
  bool has_unknown() const noexcept {
    return imperative == Flag::Unknown || interrogative == Flag::Unknown || incomplete == Flag::Unknown ||
           vague == Flag::Unknown;
  }
  bool operator==(const ValidityReport&) const = default;
};

struct Proposition {
  std::string prop_id;
  std::string source_doc_id;
  AuthorType author_type = AuthorType::LLMWritten;
  PropType prop_type = PropType::Sentence;
  std::string text;
  ValidityReport validity;
};

using DenseVector = std::vector<double>;
// Sorted by token id; weights are non-negative.
using SparseVector = std::map<std::uint32_t, double>;

struct Fact {
  std::string fact_id;
  std::string note_id;
  std::string text;
  DenseVector dense_vec;
  SparseVector sparse_vec;
  Timestamp timestamp{};
  std::string category;
  std::string description;
  std::string admission_id;
};

enum class Verdict { Supported, NotSupported, NotAddressed };
enum class BinaryVerdict { Supported, NotSupportedOrAddressed };

enum class RetrievalMethod { Dense, Hybrid, Rerank };
enum class ContextFormat { RelevanceScore, AbsoluteTime, RelativeTime };
enum class Scope { CurrentAdmission, AllAdmissions };

inline constexpr std::array<Verdict, 3> kAllVerdicts{Verdict::Supported, Verdict::NotSupported,
                                                     Verdict::NotAddressed};

BinaryVerdict binarize(Verdict v) noexcept;
// Identity on the binary space: binarize(lift(b)) == b.
Verdict lift(BinaryVerdict b) noexcept;

struct VerdictRecord {
  std::string prop_id;
  Verdict label = Verdict::NotAddressed;
  std::string reason;
  RetrievalMethod retrieval_method = RetrievalMethod::Dense;
  int top_n = 1;
  ContextFormat context_format = ContextFormat::RelevanceScore;
  Scope scope = Scope::AllAdmissions;
  std::vector<std::pair<std::string, double>> context_facts;
};

// Exact rational, always reduced, positive denominator.
struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;
  static Fraction make(std::int64_t num, std::int64_t den);
  double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
  Fraction operator+(const Fraction& o) const { return make(num * o.den + o.num * den, den * o.den); }
  bool operator==(const Fraction&) const = default;
};

struct ScoreSheet {
  std::string doc_id;
  std::size_t n_propositions = 0;
  std::size_t n_supported = 0;
  std::size_t n_not_supported = 0;
  std::size_t n_not_addressed = 0;
  // Propositions that failed validity checks; never part of the percentages.
  std::size_t n_invalid = 0;
  std::map<Verdict, std::string> summary_per_label;

  Fraction pct_exact(Verdict v) const;
  double pct_supported() const { return pct_exact(Verdict::Supported).value(); }
  double pct_not_supported() const { return pct_exact(Verdict::NotSupported).value(); }
  double pct_not_addressed() const { return pct_exact(Verdict::NotAddressed).value(); }
  std::size_t count(Verdict v) const noexcept;
};

// Throws EmptyInput on an empty list. Labels missing from `summaries` get an
// empty string.
ScoreSheet build_score_sheet(std::string doc_id, const std::vector<VerdictRecord>& verdicts,
                             const std::map<Verdict, std::string>& summaries);

// Enum <-> string. Verdict strings use the judge's surface forms
// ("Supported", "Not Supported", "Not Addressed").
std::string to_string(Verdict v);
std::string to_string(BinaryVerdict v);
std::string to_string(AuthorType v);
std::string to_string(PropType v);
std::string to_string(RetrievalMethod v);
std::string to_string(ContextFormat v);
std::string to_string(Scope v);
std::string to_string(Flag v);

// Case- and separator-insensitive parsing; nullopt on no match.
std::optional<Verdict> parse_verdict(std::string_view s);
std::optional<AuthorType> parse_author_type(std::string_view s);
std::optional<PropType> parse_prop_type(std::string_view s);
std::optional<RetrievalMethod> parse_retrieval_method(std::string_view s);
std::optional<ContextFormat> parse_context_format(std::string_view s);
std::optional<Scope> parse_scope(std::string_view s);

std::string render_percent(double pct);  // one decimal place

}  // namespace ehrcheck
