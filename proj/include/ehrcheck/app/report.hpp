#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ehrcheck/domain.hpp"
#include "ehrcheck/judge/judge.hpp"
#include "ehrcheck/metrics/agreement.hpp"

namespace ehrcheck::app {

nlohmann::json proposition_to_json(const Proposition& p);
Proposition proposition_from_json(const nlohmann::json& j);
nlohmann::json verdict_to_json(const VerdictRecord& v);
nlohmann::json score_sheet_to_json(const ScoreSheet& s);
nlohmann::json agreement_to_json(const metrics::AgreementReport& r);

struct ReportFiles {
  std::filesystem::path table;     // report.tsv
  std::filesystem::path document;  // report.json
  std::size_t rows = 0;
};

// Reads every completed cell under `results_dir`/cells and writes one row
// per (cell, author type). The best ternary agreement within each
// (author type, proposition type) group is flagged. InputError when the
// directory holds no completed cells.
ReportFiles emit_report(const std::filesystem::path& results_dir);

}  // namespace ehrcheck::app
