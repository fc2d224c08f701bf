#pragma once

// Shared builders and datasets for the test binaries and the fixture tool.

#include <cstdio>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "ehrcheck/app/corpus.hpp"
#include "ehrcheck/domain.hpp"
#include "ehrcheck/gateway/gateway.hpp"
#include "ehrcheck/gateway/mock.hpp"
#include "ehrcheck/index/fact_index.hpp"
#include "ehrcheck/summarize/summarizer.hpp"
#include "ehrcheck/time.hpp"

namespace testsupport {

using namespace ehrcheck;

inline std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(EHRCHECK_FIXTURE_DIR) / name; }

inline ClinicalNote note(std::string id, std::string patient, std::string admission, std::string category,
                         std::string description, const std::string& ts, std::string text) {
  return ClinicalNote{std::move(id),          std::move(patient),   std::move(admission), std::move(category),
                      std::move(description), parse_timestamp(ts), std::move(text)};
}

inline Fact fact(std::string id, std::string text, const std::string& ts, std::string category,
                 std::string description, std::string admission = "A1") {
  Fact f;
  f.fact_id = std::move(id);
  f.note_id = f.fact_id.substr(0, f.fact_id.find(':'));
  f.text = std::move(text);
  f.timestamp = parse_timestamp(ts);
  f.category = std::move(category);
  f.description = std::move(description);
  f.admission_id = std::move(admission);
  return f;
}

inline std::unique_ptr<gateway::Gateway> heuristic_gateway(std::size_t dim = 64) {
  return std::make_unique<gateway::Gateway>(std::make_shared<gateway::HeuristicChatBackend>(),
                                            std::make_shared<gateway::HeuristicEmbeddingBackend>(dim),
                                            std::make_shared<gateway::HeuristicRerankBackend>());
}

inline std::unique_ptr<gateway::Gateway> chat_gateway(std::shared_ptr<gateway::ChatBackend> chat) {
  return std::make_unique<gateway::Gateway>(std::move(chat), std::make_shared<gateway::HeuristicEmbeddingBackend>(16),
                                            std::make_shared<gateway::HeuristicRerankBackend>());
}

// Discharge narrative with six sentences and thirty hand-listed claims.
inline const std::string kCholangitisBhc =
    "The patient, a 77-year-old male, was admitted with a diagnosis of acute cholangitis, presenting with nausea, "
    "vomiting, and abdominal pain, and a history of coronary artery disease, atrial fibrillation, cardiomyopathy, and "
    "chronic obstructive pulmonary disease. Initial imaging revealed gallstones, and the patient underwent a series of "
    "interventions, including fluid boluses, IV antibiotics, and a central line placement. Due to worsening septic "
    "shock, the patient required vasopressors and was intubated. An ERCP procedure was performed, which revealed pus, "
    "sludge, and stones in the common bile duct, and a stent was placed for drainage. Post-procedure, the patient's "
    "condition improved, with stabilization of blood pressure, improvement in abdominal pain, and eventual weaning off "
    "vasopressors. The patient was extubated and transferred to the floor, where he continued to receive treatment for "
    "sepsis, acute renal failure, and pain control, with plans for repeat ERCP in 4 weeks.";

inline const std::vector<std::string> kCholangitisSentences{
    "The patient, a 77-year-old male, was admitted with a diagnosis of acute cholangitis, presenting with nausea, "
    "vomiting, and abdominal pain, and a history of coronary artery disease, atrial fibrillation, cardiomyopathy, and "
    "chronic obstructive pulmonary disease.",
    "Initial imaging revealed gallstones, and the patient underwent a series of interventions, including fluid "
    "boluses, IV antibiotics, and a central line placement.",
    "Due to worsening septic shock, the patient required vasopressors and was intubated.",
    "An ERCP procedure was performed, which revealed pus, sludge, and stones in the common bile duct, and a stent was "
    "placed for drainage.",
    "Post-procedure, the patient's condition improved, with stabilization of blood pressure, improvement in abdominal "
    "pain, and eventual weaning off vasopressors.",
    "The patient was extubated and transferred to the floor, where he continued to receive treatment for sepsis, acute "
    "renal failure, and pain control, with plans for repeat ERCP in 4 weeks.",
};

// Claims grouped by the sentence they come from.
inline const std::vector<std::vector<std::string>> kCholangitisClaims{
    {"The patient was a 77-year-old male.", "The patient was admitted with a diagnosis of acute cholangitis.",
     "The patient presented with nausea.", "The patient presented with vomiting.",
     "The patient presented with abdominal pain.", "The patient had a history of coronary artery disease.",
     "The patient had a history of atrial fibrillation.", "The patient had a history of cardiomyopathy.",
     "The patient had a history of chronic obstructive pulmonary disease."},
    {"Initial imaging revealed gallstones.", "The patient underwent fluid boluses.",
     "The patient underwent IV antibiotics.", "The patient underwent a central line placement."},
    {"The patient required vasopressors due to worsening septic shock.",
     "The patient was intubated due to worsening septic shock."},
    {"An ERCP procedure was performed.", "The ERCP procedure revealed pus in the common bile duct.",
     "The ERCP procedure revealed sludge in the common bile duct.",
     "The ERCP procedure revealed stones in the common bile duct.", "A stent was placed for drainage."},
    {"The patient's condition improved post-procedure.", "The patient's blood pressure stabilized post-procedure.",
     "The patient experienced improvement in abdominal pain post-procedure.",
     "The patient was weaned off vasopressors post-procedure."},
    {"The patient was extubated post-procedure.", "The patient was transferred to the floor post-procedure.",
     "The patient continued to receive treatment for sepsis on the floor.",
     "The patient continued to receive treatment for acute renal failure on the floor.",
     "The patient continued to receive treatment for pain control on the floor.",
     "The patient had plans for repeat ERCP in 4 weeks."},
};

// Seven retrieved facts about a medication mix-up, with the retriever's
// scores, used for the three reference context layouts.
inline const std::string kAmbienProposition =
    "Taking Ambien instead of methadone led to the patient's altered mental state.";

inline std::vector<Fact> ambien_facts() {
  const char* resident = "Physician Resident Admission Note";
  const char* attending = "Physician Attending Progress Note";
  return {
      fact("n1:f0", "The patient had altered mental status.", "2198-08-02 19:30:00", "Physician", resident),
      fact("n1:f1", "The altered mental status was from infection.", "2198-08-02 19:30:00", "Physician", resident),
      fact("n1:f2",
           "The patient's complex pain medication regimen at home may have complicated the altered mental status.",
           "2198-08-02 19:30:00", "Physician", resident),
      fact("n2:f0", "The patient has altered mental status, not delirium.", "2198-08-03 05:13:00", "Nursing",
           "Nursing Progress Note"),
      fact("n3:f0", "The patient's altered mental status is likely related to infection.", "2198-08-03 09:11:00",
           "Physician", attending),
      fact("n3:f1", "The patient presents with altered mental status.", "2198-08-03 09:11:00", "Physician", attending),
      fact("n4:f0", "He took ambien instead of his methadone yesterday afternoon.", "2198-08-03 15:27:00", "Nursing",
           "Nursing Transfer Note"),
  };
}

inline std::vector<index::SearchHit> ambien_hits() {
  using index::ScoreKind;
  return {{"n4:f0", 0.83, ScoreKind::DotProduct}, {"n1:f0", 0.76, ScoreKind::DotProduct},
          {"n3:f1", 0.72, ScoreKind::DotProduct}, {"n3:f0", 0.712, ScoreKind::DotProduct},
          {"n1:f1", 0.708, ScoreKind::DotProduct}, {"n2:f0", 0.70, ScoreKind::DotProduct},
          {"n1:f2", 0.69, ScoreKind::DotProduct}};
}

inline AdmissionWindow ambien_window() {
  return {"A1", parse_timestamp("2198-08-02 17:41:00"), parse_timestamp("2198-08-04 12:12:00")};
}

inline const std::string kAmbienRelevanceContext =
    "Electronic Health Record Context\n"
    "Ordered by Relevance Score (Highest to Lowest):\n"
    "1. Score: 0.83, Note Category: Nursing, Note Description: Nursing Transfer Note | Text: He took ambien instead of "
    "his methadone yesterday afternoon.\n"
    "2. Score: 0.76, Note Category: Physician, Note Description: Physician Resident Admission Note | Text: The patient "
    "had altered mental status.\n"
    "3. Score: 0.72, Note Category: Physician, Note Description: Physician Attending Progress Note | Text: The patient "
    "presents with altered mental status.\n"
    "4. Score: 0.71, Note Category: Physician, Note Description: Physician Attending Progress Note | Text: The "
    "patient's altered mental status is likely related to infection.\n"
    "5. Score: 0.71, Note Category: Physician, Note Description: Physician Resident Admission Note | Text: The altered "
    "mental status was from infection.\n"
    "6. Score: 0.70, Note Category: Nursing, Note Description: Nursing Progress Note | Text: The patient has altered "
    "mental status, not delirium.\n"
    "7. Score: 0.69, Note Category: Physician, Note Description: Physician Resident Admission Note | Text: The "
    "patient's complex pain medication regimen at home may have complicated the altered mental status.";

inline const std::string kAmbienAbsoluteContext =
    "Hospital Admission Start: 2198-08-02 17:41:00\n"
    "Hospital Admission End: 2198-08-04 12:12:00\n"
    "Electronic Health Record Context\n"
    "Ordered by Time (Earliest to Latest):\n"
    "1. Date: 2198-08-02, Time: 19:30:00, Note Category: Physician, Note Description: Physician Resident Admission "
    "Note | Text: The patient had altered mental status.\n"
    "2. Date: 2198-08-02, Time: 19:30:00, Note Category: Physician, Note Description: Physician Resident Admission "
    "Note | Text: The altered mental status was from infection.\n"
    "3. Date: 2198-08-02, Time: 19:30:00, Note Category: Physician, Note Description: Physician Resident Admission "
    "Note | Text: The patient's complex pain medication regimen at home may have complicated the altered mental "
    "status.\n"
    "4. Date: 2198-08-03, Time: 05:13:00, Note Category: Nursing, Note Description: Nursing Progress Note | Text: The "
    "patient has altered mental status, not delirium.\n"
    "5. Date: 2198-08-03, Time: 09:11:00, Note Category: Physician, Note Description: Physician Attending Progress "
    "Note | Text: The patient's altered mental status is likely related to infection.\n"
    "6. Date: 2198-08-03, Time: 09:11:00, Note Category: Physician, Note Description: Physician Attending Progress "
    "Note | Text: The patient presents with altered mental status.\n"
    "7. Date: 2198-08-03, Time: 15:27:00, Note Category: Nursing, Note Description: Nursing Transfer Note | Text: He "
    "took ambien instead of his methadone yesterday afternoon.";

inline const std::string kAmbienRelativeContext =
    "Hospital Admission Start: 1 days 18 hours ago\n"
    "Hospital Admission End: Now\n"
    "Electronic Health Record Context\n"
    "Ordered by Time (Earliest to Latest):\n"
    "1. When: 2 days 12 hours ago, Note Category: Physician, Note Description: Physician Resident Admission Note | "
    "Text: The patient had altered mental status.\n"
    "2. When: 2 days 12 hours ago, Note Category: Physician, Note Description: Physician Resident Admission Note | "
    "Text: The altered mental status was from infection.\n"
    "3. When: 2 days 12 hours ago, Note Category: Physician, Note Description: Physician Resident Admission Note | "
    "Text: The patient's complex pain medication regimen at home may have complicated the altered mental status.\n"
    "4. When: 1 days 12 hours ago, Note Category: Nursing, Note Description: Nursing Progress Note | Text: The "
    "patient has altered mental status, not delirium.\n"
    "5. When: 1 days 12 hours ago, Note Category: Physician, Note Description: Physician Attending Progress Note | "
    "Text: The patient's altered mental status is likely related to infection.\n"
    "6. When: 1 days 12 hours ago, Note Category: Physician, Note Description: Physician Attending Progress Note | "
    "Text: The patient presents with altered mental status.\n"
    "7. When: 1 days 12 hours ago, Note Category: Nursing, Note Description: Nursing Transfer Note | Text: He took "
    "ambien instead of his methadone yesterday afternoon.";

inline const std::string kAmbienNotSupportedReason =
    "The text states that taking Ambien instead of methadone led to the patient's altered mental state, but the "
    "reference context suggests that the patient's altered mental status is likely related to infection.";
inline const std::string kAmbienSupportedReason =
    "The text states that taking Ambien instead of methadone led to the patient's altered mental state, which is "
    "supported by the nursing transfer note that the patient took Ambien instead of his methadone yesterday "
    "afternoon.";

// Five short notes from one admission and a five-sentence candidate. Under
// the heuristic judge with top_n = 10 every fact reaches the context, so the
// verdicts follow from word coverage alone: three fully covered sentences,
// one partly covered (5 of 7 content words) and one with no overlap.
inline std::vector<ClinicalNote> pneumonia_notes() {
  return {
      note("N1", "P1", "A1", "Physician", "Admission Note", "2150-03-01 08:00:00",
           "Patient admitted with community acquired pneumonia. Started on ceftriaxone and azithromycin."),
      note("N2", "P1", "A1", "Nursing", "Progress Note", "2150-03-01 20:00:00",
           "Oxygen saturation improved on two liters nasal cannula."),
      note("N3", "P1", "A1", "Physician", "Progress Note", "2150-03-02 09:00:00",
           "Creatinine peaked at 2.1 and returned to baseline."),
      note("N4", "P1", "A1", "Radiology", "Chest Xray", "2150-03-02 11:00:00",
           "Chest radiograph showed right lower lobe consolidation."),
      note("N5", "P1", "A1", "Physician", "Progress Note", "2150-03-03 10:00:00",
           "Patient tolerated oral antibiotics before discharge."),
  };
}

inline const std::string kPneumoniaCandidate =
    "Patient admitted with community acquired pneumonia. Chest radiograph showed right lower lobe consolidation. "
    "Creatinine peaked at 2.1 and returned to baseline. Oxygen saturation worsened on four liters nasal cannula. "
    "Blood cultures grew methicillin resistant staphylococcus.";

inline AdmissionWindow pneumonia_window() {
  return {"A1", parse_timestamp("2150-03-01 06:00:00"), parse_timestamp("2150-03-03 14:00:00")};
}

inline summarize::SummarizerConfig summarizer_test_config() {
  summarize::SummarizerConfig cfg;
  cfg.note_chunk_tokens = 40;
  cfg.bundle_tokens = 70;
  cfg.max_draft_tokens = 60;
  return cfg;
}

// Notes sized so that, under summarizer_test_config(), some need several
// chunks and the summaries span more than one bundle.
inline std::vector<ClinicalNote> summarizer_notes() {
  static const std::vector<std::string> lines{
      "Patient arrived with fever and productive cough.",
      "Chest radiograph showed right lower lobe consolidation.",
      "Ceftriaxone and azithromycin were started.",
      "Blood cultures returned without growth.",
      "Oxygen was weaned to room air.",
      "Creatinine improved with intravenous fluids.",
      "Physical therapy cleared the patient for discharge home.",
      "Home medications were resumed without changes.",
  };
  std::vector<ClinicalNote> notes;
  for (int i = 0; i < 7; ++i) {
    std::string text;
    const int n = 2 + (i * 5) % 9;
    for (int k = 0; k < n; ++k) text += (text.empty() ? "" : " ") + lines[(i + k) % lines.size()];
    char ts[32];
    std::snprintf(ts, sizeof ts, "2170-05-%02d 09:00:00", 1 + i);
    notes.push_back(note("S" + std::to_string(i), "P9", "A9", i % 2 ? "Nursing" : "Physician", "Progress Note", ts,
                         text));
  }
  return notes;
}

// Three patients, two admissions each, with a discharge summary closing the
// second admission, plus one LLM-written and one human-written candidate per
// patient. Deterministic.
struct SyntheticStudy {
  app::Corpus corpus;
  std::vector<app::Candidate> candidates;
  std::vector<metrics::Annotation> annotations;
};

inline SyntheticStudy synthetic_study() {
  static const std::vector<std::string> findings{
      "Patient has pneumonia treated with ceftriaxone.",
      "Blood pressure was stable overnight.",
      "Creatinine rose to 1.8 after contrast.",
      "Patient denies chest pain.",
      "Heparin drip was started for atrial fibrillation.",
      "Physical therapy recommended discharge home.",
      "Potassium was repleted orally.",
      "Chest radiograph showed a small left effusion.",
  };
  SyntheticStudy s;
  for (int p = 0; p < 3; ++p) {
    const std::string pid = "P" + std::to_string(p);
    for (int a = 0; a < 2; ++a) {
      const std::string aid = pid + "A" + std::to_string(a);
      const int day = 1 + a * 10;
      char start[32], end[32];
      std::snprintf(start, sizeof start, "2180-01-%02dT00:00:00Z", day);
      std::snprintf(end, sizeof end, "2180-01-%02dT12:00:00Z", day + 4);
      s.corpus.admissions[aid] = {aid, parse_timestamp(start), parse_timestamp(end)};
      for (int k = 0; k < 6; ++k) {
        char ts[32];
        std::snprintf(ts, sizeof ts, "2180-01-%02dT%02d:00:00Z", day + k / 2, 8 + k);
        const std::string text = findings[(p + a + k) % findings.size()] + " " +
                                 findings[(p * 3 + k + 1) % findings.size()] + " " +
                                 findings[(a * 5 + k + 2) % findings.size()];
        s.corpus.notes.push_back(note(aid + "N" + std::to_string(k), pid, aid, k % 2 == 0 ? "Physician" : "Nursing",
                                      k % 2 == 0 ? "Progress Note" : "Nursing Note", ts, text));
      }
    }
    s.corpus.notes.push_back(note(pid + "DS", pid, pid + "A1", "Discharge summary", "Report", "2180-01-15T12:00:00Z",
                                  "BRIEF HOSPITAL COURSE:\n" + findings[p] + "\nDISCHARGE MEDICATIONS:\nNone"));
    const std::vector<std::pair<std::string, AuthorType>> authors{{"L", AuthorType::LLMWritten},
                                                                   {"H", AuthorType::HumanWritten}};
    for (const auto& [tag, author] : authors) {
      const std::string text = findings[p] + " " + findings[(p + 1) % findings.size()] +
                               " Patient had a stroke during the stay. " + findings[(p + 4) % findings.size()];
      s.candidates.push_back({pid + tag, pid, pid + "A1", author, text});
      for (const char* kind : {"s", "a"}) {
        for (int i = 0; i < 4; ++i) {
          const std::string id = pid + tag + ":" + kind + std::to_string(i);
          const Verdict base = i == 2 ? Verdict::NotAddressed : Verdict::Supported;
          for (int r = 0; r < 3; ++r) {
            const Verdict label = (r == 2 && (p + i) % 3 == 0) ? Verdict::NotSupported : base;
            s.annotations.push_back({id, "R" + std::to_string(r), label});
          }
        }
      }
    }
  }
  return s;
}

// Random facts for oracle comparisons. Dense vectors are not normalized;
// sparse vectors draw from a small vocabulary so overlaps are common.
inline std::vector<Fact> random_facts(std::mt19937_64& rng, std::size_t n, std::size_t dim, int admissions = 3) {
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> vocab(0, 40), len(1, 6), adm(0, admissions - 1), minute(0, 600);
  std::uniform_real_distribution<double> w(0.05, 1.0);
  std::vector<Fact> facts;
  for (std::size_t i = 0; i < n; ++i) {
    Fact f;
    f.fact_id = "n" + std::to_string(i / 4) + ":f" + std::to_string(i);
    f.note_id = "n" + std::to_string(i / 4);
    f.text = "fact " + std::to_string(i % 97);  // repeats exercise dedup
    f.dense_vec.resize(dim);
    for (auto& x : f.dense_vec) x = g(rng);
    const int terms = len(rng);
    for (int t = 0; t < terms; ++t) f.sparse_vec[static_cast<std::uint32_t>(vocab(rng))] = w(rng);
    f.timestamp = parse_timestamp("2100-01-01 00:00:00") + std::chrono::minutes(minute(rng));
    f.category = "Physician";
    f.description = "Progress Note";
    f.admission_id = "A" + std::to_string(adm(rng));
    facts.push_back(std::move(f));
  }
  return facts;
}

}  // namespace testsupport
