#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ehrcheck/domain.hpp"
#include "ehrcheck/metrics/agreement.hpp"

namespace ehrcheck::app {

struct IngestOptions {
  // Skip malformed lines (recording a warning) instead of failing.
  bool lenient = false;
};

struct Corpus {
  std::vector<ClinicalNote> notes;  // file order
  std::map<std::string, AdmissionWindow> admissions;
  std::vector<std::string> warnings;

  std::vector<std::string> patients() const;  // sorted
  std::vector<ClinicalNote> notes_for_patient(const std::string& patient_id) const;
  // Declared window, or the span of the admission's notes when none was given.
  AdmissionWindow window_for(const std::string& admission_id) const;
};

// Notes: one JSON object per line with note_id, patient_id, admission_id,
// category, description, timestamp (ISO-8601) and text. Errors name the line.
Corpus parse_notes(const std::string& jsonl, const IngestOptions& opts = {});
Corpus load_notes(const std::filesystem::path& path, const IngestOptions& opts = {});

// Admissions: one JSON object per line with admission_id, start, end.
std::map<std::string, AdmissionWindow> parse_admissions(const std::string& jsonl);
void load_admissions(Corpus& corpus, const std::filesystem::path& path);

nlohmann::json note_to_json(const ClinicalNote& note);
ClinicalNote note_from_json(const nlohmann::json& j);

// Texts under review, one JSON object per line.
struct Candidate {
  std::string doc_id;
  std::string patient_id;
  std::string admission_id;
  AuthorType author_type = AuthorType::LLMWritten;
  std::string text;
};

std::vector<Candidate> load_candidates(const std::filesystem::path& path);
nlohmann::json candidate_to_json(const Candidate& c);

// Delimited (tab or comma, detected from the header) with columns prop_id,
// rater_id, label.
std::vector<metrics::Annotation> parse_annotations(const std::string& text);
std::vector<metrics::Annotation> load_annotations(const std::filesystem::path& path);

struct CohortCriteria {
  // Case-insensitive pattern for the section header line.
  std::string bhc_header = "brief hospital course";
  // A line matching this ends the section.
  std::string section_end = R"(^[A-Z][A-Z0-9 ,/&()'-]*[A-Z]:)";
  std::string discharge_category = "Discharge summary";
  std::string physician_category = "Physician";
  std::size_t min_physician_notes = 2;
  std::size_t min_prior_notes = 10;
};

// Text between the header match and the next section header; nullopt when
// the header is absent or the section is empty.
std::optional<std::string> extract_bhc(const std::string& text, const CohortCriteria& criteria = {});

struct CohortMember {
  std::string patient_id;
  std::string admission_id;  // last admission
  std::string discharge_note_id;
  std::string bhc_text;
  std::size_t physician_notes = 0;  // in the last admission
  std::size_t prior_notes = 0;      // before the discharge summary, any admission
};

// Inclusion: the last admission's discharge summary has an extractable BHC,
// that admission has enough physician notes, and enough notes precede the
// discharge summary. Patients in sorted order.
std::vector<CohortMember> cohort_filter(const Corpus& corpus, const CohortCriteria& criteria = {});

// Reference notes for a member: everything before its discharge summary.
std::vector<ClinicalNote> reference_notes(const Corpus& corpus, const CohortMember& member);

std::string read_file(const std::filesystem::path& path);
// Writes through a temporary file and a rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace ehrcheck::app
