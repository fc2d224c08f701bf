#include "ehrcheck/app/sweep.hpp"

#include <map>
#include <set>
#include <sstream>

#include "ehrcheck/app/pipeline.hpp"
#include "ehrcheck/app/report.hpp"
#include "ehrcheck/errors.hpp"
#include "ehrcheck/text/decompose.hpp"
#include "ehrcheck/util/hash.hpp"
#include "ehrcheck/util/parallel.hpp"

namespace ehrcheck::app {

namespace fs = std::filesystem;
using nlohmann::json;

json SweepCell::to_json() const {
  return json{{"retrieval_method", to_string(retrieval_method)},
              {"top_n", top_n},
              {"context_format", to_string(context_format)},
              {"scope", to_string(scope)},
              {"prop_type", to_string(prop_type)}};
}

SweepCell SweepCell::from_json(const json& j) {
  SweepCell c;
  auto need = [](auto opt, const char* what) {
    if (!opt) throw FormatError(std::string("cell has a bad ") + what);
    return *opt;
  };
  c.retrieval_method = need(parse_retrieval_method(j.at("retrieval_method").get<std::string>()), "retrieval_method");
  c.top_n = j.at("top_n").get<int>();
  c.context_format = need(parse_context_format(j.at("context_format").get<std::string>()), "context_format");
  c.scope = need(parse_scope(j.at("scope").get<std::string>()), "scope");
  c.prop_type = need(parse_prop_type(j.at("prop_type").get<std::string>()), "prop_type");
  return c;
}

std::vector<SweepCell> expand_grid(const SweepGrid& grid) {
  std::vector<SweepCell> cells;
  for (auto p : grid.prop_types)
    for (auto m : grid.retrieval_methods)
      for (int n : grid.top_n)
        for (auto f : grid.context_formats)
          for (auto s : grid.scopes) cells.push_back({m, n, f, s, p});
  return cells;
}

std::vector<ClinicalNote> candidate_reference_notes(const Corpus& corpus, const Candidate& candidate,
                                                    const CohortCriteria& criteria) {
  const AdmissionWindow window = corpus.window_for(candidate.admission_id);
  std::vector<ClinicalNote> out;
  for (const auto& n : corpus.notes) {
    if (n.patient_id != candidate.patient_id || n.timestamp > window.end) continue;
    if (n.admission_id == candidate.admission_id && n.category == criteria.discharge_category) continue;
    out.push_back(n);
  }
  return out;
}

namespace {

std::string short_hash(const std::string& s) { return util::sha256_hex(s).substr(0, 16); }

json chunker_json(const text::ChunkerConfig& c) {
  return json{{"max_tokens", c.max_tokens}, {"window_sentences", c.window_sentences},
              {"split_percentile", c.split_percentile}};
}

std::string jsonl(const std::vector<json>& rows) {
  std::string out;
  for (const auto& r : rows) out += r.dump() + "\n";
  return out;
}

struct Prepared {
  // doc_id -> propositions, per proposition type
  std::map<PropType, std::map<std::string, std::vector<Proposition>>> props;
  // reference key -> snapshot, per proposition type
  std::map<PropType, std::map<std::string, std::shared_ptr<const index::Snapshot>>> snapshots;
};

std::string reference_key(const Candidate& c) { return c.patient_id + "\x1f" + c.admission_id; }

std::vector<Proposition> prepare_propositions(const Candidate& c, PropType type, const AppConfig& cfg,
                                              gateway::Gateway& gw, const PromptLibrary& prompts,
                                              const fs::path& cache_dir) {
  const json key{{"doc_id", c.doc_id}, {"text", c.text}, {"author", to_string(c.author_type)},
                 {"prop_type", to_string(type)}, {"chunker", chunker_json(cfg.chunker)},
                 {"prompts", prompts.version()}};
  const fs::path path = cache_dir / ("props_" + short_hash(key.dump()) + ".jsonl");
  if (fs::exists(path)) {
    std::vector<Proposition> props;
    std::istringstream in(read_file(path));
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) props.push_back(proposition_from_json(json::parse(line)));
    return props;
  }
  text::DecomposeOptions opts;
  opts.prop_type = type;
  opts.chunker = cfg.chunker;
  opts.classify_validity = true;
  opts.temperature = cfg.judge.temperature;
  opts.max_retries_heal = cfg.judge.max_retries_heal;
  opts.workers = cfg.workers;
  auto props = text::decompose_text(c.doc_id, c.text, c.author_type, opts, gw, prompts);
  std::vector<json> rows;
  for (const auto& p : props) rows.push_back(proposition_to_json(p));
  write_file_atomic(path, jsonl(rows));
  return props;
}

std::shared_ptr<const index::Snapshot> prepare_index(const std::vector<ClinicalNote>& notes, PropType type,
                                                     const AppConfig& cfg, gateway::Gateway& gw,
                                                     const PromptLibrary& prompts, const fs::path& cache_dir) {
  json note_keys = json::array();
  for (const auto& n : notes) note_keys.push_back(note_to_json(n));
  const json key{{"notes", note_keys}, {"prop_type", to_string(type)}, {"chunker", chunker_json(cfg.chunker)},
                 {"prompts", prompts.version()}};
  const fs::path path = cache_dir / ("index_" + short_hash(key.dump()) + ".jsonl");
  if (fs::exists(path)) return index::FactIndex::load(path).snapshot();
  auto idx = build_index(notes, type, cfg, gw, prompts);
  const auto snap = idx.snapshot();
  write_file_atomic(path, index::serialize_facts(snap->facts(), snap->dense_dim()));
  return snap;
}

json run_agreement(const std::vector<Candidate>& candidates, const std::vector<VerdictRecord>& verdicts,
                   const std::map<std::string, AuthorType>& author_of_prop, const metrics::GroundTruth& truth,
                   const AppConfig& cfg) {
  json out = json::object();
  std::set<AuthorType> authors;
  for (const auto& c : candidates) authors.insert(c.author_type);
  for (AuthorType a : authors) {
    std::map<std::string, Verdict> pred;
    for (const auto& v : verdicts)
      if (author_of_prop.at(v.prop_id) == a && truth.contains(v.prop_id)) pred[v.prop_id] = v.label;
    if (pred.empty()) {
      out[to_string(a)] = nullptr;
      continue;
    }
    metrics::ReportOptions ro;
    ro.iterations = cfg.sweep.bootstrap_iterations;
    ro.seed = cfg.sweep.seed;
    out[to_string(a)] = {
        {"ternary", agreement_to_json(metrics::agreement_report(pred, truth, metrics::LabelSpace::Ternary, ro))},
        {"binary", agreement_to_json(metrics::agreement_report(pred, truth, metrics::LabelSpace::Binary, ro))}};
  }
  return out;
}

}  // namespace

SweepSummary run_sweep(const SweepInputs& inputs, const AppConfig& cfg, gateway::Gateway& gw,
                       const PromptLibrary& prompts, const fs::path& out_dir) {
  const auto cells = expand_grid(cfg.sweep);
  SweepSummary summary;
  summary.cells_total = cells.size();
  if (inputs.candidates.empty()) throw InputError("sweep has no candidate texts");
  const fs::path cache_dir = out_dir / "cache";
  fs::create_directories(cache_dir);
  fs::create_directories(out_dir / "cells");

  std::set<std::string> doc_ids;
  for (const auto& c : inputs.candidates)
    if (!doc_ids.insert(c.doc_id).second) throw DuplicateError("duplicate candidate doc_id " + c.doc_id);

  Prepared prep;
  std::set<PropType> types;
  for (const auto& cell : cells) types.insert(cell.prop_type);
  std::map<std::string, AuthorType> author_of_prop;
  for (PropType t : types) {
    for (const auto& c : inputs.candidates) {
      auto props = prepare_propositions(c, t, cfg, gw, prompts, cache_dir);
      for (const auto& p : props) author_of_prop[p.prop_id] = c.author_type;
      prep.props[t][c.doc_id] = std::move(props);
      auto& snaps = prep.snapshots[t];
      const auto key = reference_key(c);
      if (!snaps.contains(key))
        snaps[key] = prepare_index(candidate_reference_notes(inputs.corpus, c, cfg.cohort), t, cfg, gw, prompts,
                                   cache_dir);
    }
  }

  std::vector<std::string> hashes(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& cell = cells[i];
    json docs = json::array();
    for (const auto& c : inputs.candidates) {
      json props = json::array();
      for (const auto& p : prep.props[cell.prop_type][c.doc_id]) props.push_back(proposition_to_json(p));
      docs.push_back({{"doc_id", c.doc_id},
                      {"propositions", short_hash(props.dump())},
                      {"snapshot", prep.snapshots[cell.prop_type][reference_key(c)]->id()}});
    }
    const json key{{"cell", cell.to_json()},
                   {"judge", {{"temperature", cfg.judge.temperature}, {"max_retries_heal", cfg.judge.max_retries_heal}}},
                   {"relative_anchor", cfg.relative_anchor == judge::RelativeAnchor::NoteDate ? "note_date" : "timestamp"},
                   {"max_error_rate", cfg.max_error_rate},
                   {"prompts", prompts.version()},
                   {"documents", docs},
                   {"truth", inputs.truth.has_value()},
                   {"bootstrap", {{"iterations", cfg.sweep.bootstrap_iterations}, {"seed", cfg.sweep.seed}}}};
    hashes[i] = util::sha256_hex(key.dump());
  }

  std::vector<char> ran(cells.size(), 0);
  util::parallel_for(cells.size(), cfg.sweep.workers, [&](std::size_t i) {
    const auto& cell = cells[i];
    const fs::path dir = out_dir / "cells" / hashes[i];
    if (fs::exists(dir / "cell.json")) return;
    ran[i] = 1;

    AppConfig cell_cfg = cfg;
    cell_cfg.retrieval.retrieval_method = cell.retrieval_method;
    cell_cfg.retrieval.top_n = cell.top_n;
    cell_cfg.retrieval.k_per_query = 0;
    cell_cfg.retrieval.scope = cell.scope;
    cell_cfg.context_format = cell.context_format;
    cell_cfg.prop_type = cell.prop_type;

    std::vector<json> verdict_rows, sheet_rows;
    std::vector<VerdictRecord> all_verdicts;
    std::map<std::string, std::map<std::string, std::size_t>> pooled;
    for (const auto& c : inputs.candidates) {
      const auto& snap = prep.snapshots.at(cell.prop_type).at(reference_key(c));
      const auto window = inputs.corpus.window_for(c.admission_id);
      const auto vc = cell_cfg.verify_config(c.author_type);
      auto& counts = pooled[to_string(c.author_type)];
      try {
        auto result = judge::verify_propositions(c.doc_id, prep.props.at(cell.prop_type).at(c.doc_id), *snap, window,
                                                 vc, gw, prompts);
        for (const auto& v : result.verdicts) {
          json row = verdict_to_json(v);
          row["doc_id"] = c.doc_id;
          row["config_hash"] = hashes[i];
          row["snapshot_id"] = snap->id();
          verdict_rows.push_back(std::move(row));
          ++counts[to_string(v.label)];
          all_verdicts.push_back(v);
        }
        json sheet = score_sheet_to_json(result.sheet);
        sheet["config_hash"] = hashes[i];
        sheet["snapshot_id"] = snap->id();
        sheet["errors"] = json::array();
        for (const auto& e : result.errors) sheet["errors"].push_back({{"prop_id", e.prop_id}, {"message", e.message}});
        sheet_rows.push_back(std::move(sheet));
        counts["invalid"] += result.sheet.n_invalid;
      } catch (const EmptyInput& e) {
        sheet_rows.push_back({{"doc_id", c.doc_id}, {"config_hash", hashes[i]}, {"snapshot_id", snap->id()},
                              {"error", e.what()}, {"n_invalid", e.invalid_count()}});
        counts["invalid"] += e.invalid_count();
      }
    }
    write_file_atomic(dir / "verdicts.jsonl", jsonl(verdict_rows));
    write_file_atomic(dir / "score_sheets.jsonl", jsonl(sheet_rows));
    json manifest{{"cell", cell.to_json()}, {"config_hash", hashes[i]}, {"documents", inputs.candidates.size()}};
    json by_author = json::object();
    for (const auto& [author, counts] : pooled) {
      json row = json::object();
      std::size_t judged = 0;
      for (Verdict v : kAllVerdicts) {
        const auto it = counts.find(to_string(v));
        const std::size_t n = it == counts.end() ? 0 : it->second;
        row[to_string(v)] = n;
        judged += n;
      }
      row["judged"] = judged;
      row["invalid"] = counts.contains("invalid") ? counts.at("invalid") : 0;
      by_author[author] = row;
    }
    manifest["counts"] = by_author;
    if (inputs.truth) {
      const json agreement = run_agreement(inputs.candidates, all_verdicts, author_of_prop, *inputs.truth, cfg);
      write_file_atomic(dir / "agreement.json", agreement.dump(2) + "\n");
      manifest["agreement"] = true;
    }
    // Written last: its presence marks the cell complete.
    write_file_atomic(dir / "cell.json", manifest.dump(2) + "\n");
  });

  for (char r : ran) r ? ++summary.cells_run : ++summary.cells_skipped;
  return summary;
}

}  // namespace ehrcheck::app
