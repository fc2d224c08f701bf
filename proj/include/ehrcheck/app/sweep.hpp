#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ehrcheck/app/config.hpp"
#include "ehrcheck/app/corpus.hpp"
#include "ehrcheck/gateway/gateway.hpp"
#include "ehrcheck/metrics/agreement.hpp"

namespace ehrcheck::app {

struct SweepCell {
  RetrievalMethod retrieval_method = RetrievalMethod::Dense;
  int top_n = 5;
  ContextFormat context_format = ContextFormat::RelevanceScore;
  Scope scope = Scope::AllAdmissions;
  PropType prop_type = PropType::Sentence;

  nlohmann::json to_json() const;
  static SweepCell from_json(const nlohmann::json& j);
  bool operator==(const SweepCell&) const = default;
};

// Cartesian product, ordered by proposition type, method, N, format, scope.
std::vector<SweepCell> expand_grid(const SweepGrid& grid);

struct SweepInputs {
  Corpus corpus;
  std::vector<Candidate> candidates;
  std::optional<metrics::GroundTruth> truth;
};

struct SweepSummary {
  std::size_t cells_total = 0;
  std::size_t cells_run = 0;
  std::size_t cells_skipped = 0;
};

// Reference notes for a candidate: the patient's notes up to the end of the
// candidate's admission, minus that admission's discharge summaries.
std::vector<ClinicalNote> candidate_reference_notes(const Corpus& corpus, const Candidate& candidate,
                                                    const CohortCriteria& criteria);

// Runs every grid cell into out_dir/cells/<config hash>/. A cell whose
// cell.json already exists is skipped, so an interrupted sweep resumes where
// it stopped. Decompositions and indexes are cached under out_dir as well.
// Outputs carry no timestamps: identical inputs give identical bytes.
SweepSummary run_sweep(const SweepInputs& inputs, const AppConfig& cfg, gateway::Gateway& gw,
                       const PromptLibrary& prompts, const std::filesystem::path& out_dir);

}  // namespace ehrcheck::app
