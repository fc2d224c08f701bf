#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ehrcheck/app/config.hpp"
#include "ehrcheck/app/corpus.hpp"
#include "ehrcheck/app/pipeline.hpp"
#include "ehrcheck/app/report.hpp"
#include "ehrcheck/app/sweep.hpp"
#include "ehrcheck/errors.hpp"
#include "ehrcheck/judge/judge.hpp"
#include "ehrcheck/summarize/summarizer.hpp"
#include "ehrcheck/text/decompose.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ehrcheck;
using namespace ehrcheck::app;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kBackend = 3 };

struct Common {
  std::string config;
  std::string backend;
  std::string replay;
  std::string record;
  std::string prompts_dir;
  std::size_t workers = 0;
  std::string notes;
  std::string admissions;
  bool lenient = false;
  std::string out;
};

struct Overrides {
  std::string method, format, scope, prop_type;
  int top_n = 0;
};

template <class T>
T parse_or_throw(std::optional<T> v, const std::string& what, const std::string& s) {
  if (!v) throw InputError("unknown " + what + " '" + s + "'");
  return *v;
}

AppConfig resolve_config(const Common& c, const Overrides& o) {
  AppConfig cfg = c.config.empty() ? AppConfig{} : load_config(c.config);
  if (!c.backend.empty()) cfg.backend.mode = parse_or_throw(parse_backend_mode(c.backend), "backend", c.backend);
  if (!c.replay.empty()) {
    cfg.backend.replay_path = c.replay;
    if (c.backend.empty()) cfg.backend.mode = BackendMode::Replay;
  }
  if (!c.prompts_dir.empty()) cfg.prompts_dir = c.prompts_dir;
  if (c.workers > 0) cfg.workers = c.workers;
  if (!o.method.empty())
    cfg.retrieval.retrieval_method = parse_or_throw(parse_retrieval_method(o.method), "retrieval method", o.method);
  if (!o.format.empty())
    cfg.context_format = parse_or_throw(parse_context_format(o.format), "context format", o.format);
  if (!o.scope.empty()) cfg.retrieval.scope = parse_or_throw(parse_scope(o.scope), "scope", o.scope);
  if (!o.prop_type.empty()) cfg.prop_type = parse_or_throw(parse_prop_type(o.prop_type), "proposition type", o.prop_type);
  if (o.top_n > 0) cfg.retrieval.top_n = o.top_n;
  apply_environment(cfg.backend);
  return cfg;
}

struct Session {
  AppConfig cfg;
  PromptLibrary prompts;
  std::shared_ptr<gateway::Recorder> recorder;
  std::unique_ptr<gateway::Gateway> gw;
  std::string record_path;

  Session(const Common& c, const Overrides& o)
      : cfg(resolve_config(c, o)), prompts(load_prompts(cfg)), record_path(c.record) {
    if (!record_path.empty()) recorder = std::make_shared<gateway::Recorder>();
    gw = make_gateway(cfg.backend, prompts, recorder);
  }
  ~Session() {
    if (recorder) {
      try {
        recorder->write(record_path);
      } catch (const std::exception& e) {
        std::cerr << "warning: could not write " << record_path << ": " << e.what() << "\n";
      }
    }
  }
};

Corpus read_corpus(const Common& c) {
  if (c.notes.empty()) throw InputError("--notes is required");
  Corpus corpus = load_notes(c.notes, IngestOptions{c.lenient});
  if (!c.admissions.empty()) load_admissions(corpus, c.admissions);
  for (const auto& w : corpus.warnings) std::cerr << "warning: " << w << "\n";
  return corpus;
}

void emit(const std::string& out, const std::string& content) {
  if (out.empty() || out == "-") {
    std::cout << content;
  } else {
    write_file_atomic(out, content);
  }
}

std::string jsonl(const std::vector<json>& rows) {
  std::string s;
  for (const auto& r : rows) s += r.dump() + "\n";
  return s;
}

metrics::GroundTruth ground_truth(const std::string& annotations, const std::string& adjudicated) {
  auto result = metrics::majority_vote(load_annotations(annotations));
  if (!adjudicated.empty()) {
    std::map<std::string, Verdict> labels;
    for (const auto& a : load_annotations(adjudicated)) labels[a.prop_id] = a.label;
    metrics::merge_adjudicated(result, labels);
  }
  std::size_t pending = 0;
  for (const auto& id : result.adjudication_queue)
    if (!result.truth.contains(id)) ++pending;
  if (pending > 0) std::cerr << "warning: " << pending << " items await adjudication and are left out\n";
  return result.truth;
}

void add_common(CLI::App* cmd, Common& c, bool corpus) {
  cmd->add_option("--config", c.config, "JSON configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--backend", c.backend, "heuristic, replay or http");
  cmd->add_option("--replay", c.replay, "replay fixture (implies --backend replay)")->check(CLI::ExistingFile);
  cmd->add_option("--record", c.record, "write every backend reply to this fixture");
  cmd->add_option("--prompts-dir", c.prompts_dir, "directory of prompt templates")->check(CLI::ExistingDirectory);
  cmd->add_option("--workers", c.workers, "parallel workers");
  cmd->add_option("--out", c.out, "output file or directory");
  if (corpus) {
    cmd->add_option("--notes", c.notes, "notes JSONL")->check(CLI::ExistingFile);
    cmd->add_option("--admissions", c.admissions, "admission windows JSONL")->check(CLI::ExistingFile);
    cmd->add_flag("--lenient", c.lenient, "skip malformed note lines");
  }
}

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--method", o.method, "dense, hybrid or rerank");
  cmd->add_option("--top-n", o.top_n, "facts in the reference context");
  cmd->add_option("--format", o.format, "relevance_score, absolute_time or relative_time");
  cmd->add_option("--scope", o.scope, "current_admission or all_admissions");
  cmd->add_option("--prop-type", o.prop_type, "sentence or atomic_claim");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Checks long-form clinical text against a patient's notes"};
  app.require_subcommand(1);
  Common c;
  Overrides o;

  auto* ingest = app.add_subcommand("ingest", "validate a notes file and apply the cohort filter");
  add_common(ingest, c, true);
  bool show_cohort = false;
  ingest->add_flag("--cohort", show_cohort, "list patients meeting the inclusion criteria");

  auto* decompose = app.add_subcommand("decompose", "split candidate texts into propositions");
  add_common(decompose, c, false);
  add_overrides(decompose, o);
  std::string candidates_path;
  decompose->add_option("--candidates", candidates_path, "candidate texts JSONL")->required()->check(CLI::ExistingFile);

  auto* index = app.add_subcommand("index", "decompose notes into facts and save the index");
  add_common(index, c, true);
  add_overrides(index, o);

  auto* summarize = app.add_subcommand("summarize", "write a hospital-course summary from a patient's notes");
  add_common(summarize, c, true);
  std::string patient;
  summarize->add_option("--patient", patient, "patient id")->required();

  auto* verify = app.add_subcommand("verify", "judge candidate texts against the notes");
  add_common(verify, c, true);
  add_overrides(verify, o);
  verify->add_option("--candidates", candidates_path, "candidate texts JSONL")->required()->check(CLI::ExistingFile);
  std::string index_path;
  verify->add_option("--index", index_path, "prebuilt fact index (skips note decomposition)")->check(CLI::ExistingFile);

  auto* sweep = app.add_subcommand("sweep", "run the retrieval and formatting grid");
  add_common(sweep, c, true);
  sweep->add_option("--candidates", candidates_path, "candidate texts JSONL")->required()->check(CLI::ExistingFile);
  std::string annotations_path, adjudicated_path;
  sweep->add_option("--annotations", annotations_path, "rater labels (prop_id, rater_id, label)")->check(CLI::ExistingFile);
  sweep->add_option("--adjudicated", adjudicated_path, "adjudicated labels for split items")->check(CLI::ExistingFile);

  auto* agree = app.add_subcommand("agree", "agreement statistics");
  add_common(agree, c, false);
  agree->add_option("--annotations", annotations_path, "rater labels")->required()->check(CLI::ExistingFile);
  agree->add_option("--adjudicated", adjudicated_path, "adjudicated labels")->check(CLI::ExistingFile);
  std::string predictions_path;
  agree->add_option("--predictions", predictions_path, "verdicts JSONL to score against the majority labels")
      ->check(CLI::ExistingFile);
  std::size_t iterations = 1000;
  std::uint64_t seed = 0;
  agree->add_option("--iterations", iterations, "bootstrap iterations");
  agree->add_option("--seed", seed, "bootstrap seed");

  auto* report = app.add_subcommand("report", "tabulate a sweep results directory");
  std::string results_dir;
  report->add_option("results", results_dir, "sweep output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (ingest->parsed()) {
      const Corpus corpus = read_corpus(c);
      json out{{"notes", corpus.notes.size()},
               {"patients", corpus.patients().size()},
               {"admissions", corpus.admissions.size()},
               {"warnings", corpus.warnings}};
      if (show_cohort) {
        const AppConfig cfg = c.config.empty() ? AppConfig{} : load_config(c.config);
        json members = json::array();
        for (const auto& m : cohort_filter(corpus, cfg.cohort))
          members.push_back({{"patient_id", m.patient_id},
                             {"admission_id", m.admission_id},
                             {"discharge_note_id", m.discharge_note_id},
                             {"physician_notes", m.physician_notes},
                             {"prior_notes", m.prior_notes}});
        out["cohort"] = members;
      }
      emit(c.out, out.dump(2) + "\n");
    } else if (decompose->parsed()) {
      Session s(c, o);
      text::DecomposeOptions opts;
      opts.prop_type = s.cfg.prop_type;
      opts.chunker = s.cfg.chunker;
      opts.temperature = s.cfg.judge.temperature;
      opts.max_retries_heal = s.cfg.judge.max_retries_heal;
      opts.workers = s.cfg.workers;
      std::vector<json> rows;
      for (const auto& cand : load_candidates(candidates_path))
        for (const auto& p : text::decompose_text(cand.doc_id, cand.text, cand.author_type, opts, *s.gw, s.prompts))
          rows.push_back(proposition_to_json(p));
      emit(c.out, jsonl(rows));
    } else if (index->parsed()) {
      if (c.out.empty()) throw InputError("index needs --out");
      const Corpus corpus = read_corpus(c);
      Session s(c, o);
      const auto idx = build_index(corpus.notes, s.cfg.prop_type, s.cfg, *s.gw, s.prompts);
      idx.save(c.out);
      std::cerr << idx.snapshot()->facts().size() << " facts, snapshot " << idx.snapshot()->id() << "\n";
    } else if (summarize->parsed()) {
      const Corpus corpus = read_corpus(c);
      Session s(c, o);
      std::vector<ClinicalNote> notes;
      for (const auto& n : corpus.notes_for_patient(patient))
        if (n.category != s.cfg.cohort.discharge_category) notes.push_back(n);
      summarize::BhcTrace trace;
      const std::string bhc = summarize::generate_bhc(notes, *s.gw, s.prompts, s.cfg.summarizer, &trace);
      std::cerr << notes.size() << " notes, " << trace.bundles.size() << " bundles, " << trace.compactions
                << " compactions\n";
      emit(c.out, bhc + "\n");
    } else if (verify->parsed()) {
      const Corpus corpus = read_corpus(c);
      Session s(c, o);
      std::shared_ptr<const index::Snapshot> fixed;
      if (!index_path.empty()) fixed = index::FactIndex::load(index_path).snapshot();
      std::vector<json> verdicts, sheets;
      for (const auto& cand : load_candidates(candidates_path)) {
        std::shared_ptr<const index::Snapshot> snap = fixed;
        if (!snap)
          snap = build_index(candidate_reference_notes(corpus, cand, s.cfg.cohort), s.cfg.prop_type, s.cfg, *s.gw,
                             s.prompts)
                     .snapshot();
        const auto result = judge::verify_text(cand.doc_id, cand.text, *snap, corpus.window_for(cand.admission_id),
                                               s.cfg.verify_config(cand.author_type), *s.gw, s.prompts);
        for (const auto& v : result.verdicts) {
          json row = verdict_to_json(v);
          row["doc_id"] = cand.doc_id;
          row["snapshot_id"] = snap->id();
          verdicts.push_back(std::move(row));
        }
        json sheet = score_sheet_to_json(result.sheet);
        sheet["snapshot_id"] = snap->id();
        sheets.push_back(sheet);
        std::cout << cand.doc_id << "\tsupported " << render_percent(result.sheet.pct_supported())
                  << "\tnot supported " << render_percent(result.sheet.pct_not_supported()) << "\tnot addressed "
                  << render_percent(result.sheet.pct_not_addressed()) << "\tinvalid " << result.sheet.n_invalid
                  << "\n";
      }
      if (!c.out.empty()) {
        fs::create_directories(c.out);
        write_file_atomic(fs::path(c.out) / "verdicts.jsonl", jsonl(verdicts));
        write_file_atomic(fs::path(c.out) / "score_sheets.jsonl", jsonl(sheets));
      }
    } else if (sweep->parsed()) {
      if (c.out.empty()) throw InputError("sweep needs --out");
      SweepInputs inputs{read_corpus(c), load_candidates(candidates_path), std::nullopt};
      if (!annotations_path.empty()) inputs.truth = ground_truth(annotations_path, adjudicated_path);
      Session s(c, o);
      fs::create_directories(c.out);
      write_file_atomic(fs::path(c.out) / "config.json", config_to_json(s.cfg).dump(2) + "\n");
      const auto summary = run_sweep(inputs, s.cfg, *s.gw, s.prompts, c.out);
      std::cout << summary.cells_total << " cells: " << summary.cells_run << " run, " << summary.cells_skipped
                << " already complete\n";
    } else if (agree->parsed()) {
      metrics::ReportOptions ro;
      ro.iterations = iterations;
      ro.seed = seed;
      json out = json::object();
      if (predictions_path.empty()) {
        const auto annotations = load_annotations(annotations_path);
        out["ternary"] = agreement_to_json(metrics::inter_rater_report(annotations, metrics::LabelSpace::Ternary, ro));
        out["binary"] = agreement_to_json(metrics::inter_rater_report(annotations, metrics::LabelSpace::Binary, ro));
      } else {
        const auto truth = ground_truth(annotations_path, adjudicated_path);
        std::map<std::string, Verdict> pred;
        std::istringstream in(read_file(predictions_path));
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
          ++lineno;
          if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
          try {
            const json j = json::parse(line);
            const auto label = j.at("label").get<std::string>();
            pred[j.at("prop_id").get<std::string>()] = parse_or_throw(parse_verdict(label), "verdict", label);
          } catch (const json::exception& e) {
            throw FormatError(predictions_path + ":" + std::to_string(lineno) + ": " + e.what());
          }
        }
        out["ternary"] = agreement_to_json(metrics::agreement_report(pred, truth, metrics::LabelSpace::Ternary, ro));
        out["binary"] = agreement_to_json(metrics::agreement_report(pred, truth, metrics::LabelSpace::Binary, ro));
      }
      emit(c.out, out.dump(2) + "\n");
    } else if (report->parsed()) {
      const auto files = emit_report(results_dir);
      std::cout << files.rows << " rows written to " << files.table.string() << " and " << files.document.string()
                << "\n";
    }
  } catch (const BackendError& e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return kBackend;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
  return kOk;
}
