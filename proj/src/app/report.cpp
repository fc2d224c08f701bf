#include "ehrcheck/app/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <tuple>

#include "ehrcheck/app/corpus.hpp"
#include "ehrcheck/app/sweep.hpp"
#include "ehrcheck/errors.hpp"

namespace ehrcheck::app {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

Flag parse_flag(const std::string& s) {
  if (s == "false") return Flag::False;
  if (s == "true") return Flag::True;
  if (s == "unknown") return Flag::Unknown;
  throw FormatError("bad validity flag '" + s + "'");
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json interval(const metrics::Interval& i) { return json{{"lo", i.lo}, {"hi", i.hi}}; }

}  // namespace

json proposition_to_json(const Proposition& p) {
  return json{{"prop_id", p.prop_id},
              {"source_doc_id", p.source_doc_id},
              {"author_type", to_string(p.author_type)},
              {"prop_type", to_string(p.prop_type)},
              {"text", p.text},
              {"validity",
               {{"imperative", to_string(p.validity.imperative)},
                {"interrogative", to_string(p.validity.interrogative)},
                {"incomplete", to_string(p.validity.incomplete)},
                {"vague", to_string(p.validity.vague)},
                {"human_overridden", p.validity.human_overridden}}}};
}

Proposition proposition_from_json(const json& j) {
  try {
    Proposition p;
    p.prop_id = j.at("prop_id").get<std::string>();
    p.source_doc_id = j.at("source_doc_id").get<std::string>();
    const auto author = parse_author_type(j.at("author_type").get<std::string>());
    const auto type = parse_prop_type(j.at("prop_type").get<std::string>());
    if (!author || !type) throw FormatError("proposition " + p.prop_id + " has a bad author or type");
    p.author_type = *author;
    p.prop_type = *type;
    p.text = j.at("text").get<std::string>();
    const auto& v = j.at("validity");
    p.validity.imperative = parse_flag(v.at("imperative").get<std::string>());
    p.validity.interrogative = parse_flag(v.at("interrogative").get<std::string>());
    p.validity.incomplete = parse_flag(v.at("incomplete").get<std::string>());
    p.validity.vague = parse_flag(v.at("vague").get<std::string>());
    p.validity.human_overridden = v.at("human_overridden").get<bool>();
    return p;
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad proposition record: ") + e.what());
  }
}

json verdict_to_json(const VerdictRecord& v) {
  json facts = json::array();
  for (const auto& [id, score] : v.context_facts) facts.push_back({{"fact_id", id}, {"score", score}});
  return json{{"prop_id", v.prop_id},
              {"label", to_string(v.label)},
              {"reason", v.reason},
              {"retrieval_method", to_string(v.retrieval_method)},
              {"top_n", v.top_n},
              {"context_format", to_string(v.context_format)},
              {"scope", to_string(v.scope)},
              {"context_facts", facts}};
}

json score_sheet_to_json(const ScoreSheet& s) {
  json summaries = json::object();
  for (const auto& [label, text] : s.summary_per_label) summaries[to_string(label)] = text;
  json pct = json::object();
  for (Verdict v : kAllVerdicts) {
    const Fraction f = s.pct_exact(v);
    pct[to_string(v)] = {{"num", f.num}, {"den", f.den}, {"value", f.value()}};
  }
  return json{{"doc_id", s.doc_id},
              {"n_propositions", s.n_propositions},
              {"n_supported", s.n_supported},
              {"n_not_supported", s.n_not_supported},
              {"n_not_addressed", s.n_not_addressed},
              {"n_invalid", s.n_invalid},
              {"percent", pct},
              {"summary_per_label", summaries}};
}

json agreement_to_json(const metrics::AgreementReport& r) {
  json cells = json::array();
  for (const auto& c : r.cells) {
    cells.push_back({{"subset", c.subset},
                     {"n_items", c.n_items},
                     {"percent_agreement", c.percent_agreement},
                     {"percent_agreement_ci", interval(c.percent_agreement_ci)},
                     {"ac1", opt(c.ac1)},
                     {"ac1_ci", c.ac1_ci ? interval(*c.ac1_ci) : json(nullptr)}});
  }
  json labels = json::object();
  for (const auto& [name, m] : r.per_label) {
    labels[name] = {{"tp", m.counts.tp}, {"fp", m.counts.fp}, {"fn", m.counts.fn}, {"tn", m.counts.tn},
                    {"sensitivity", opt(m.sensitivity)}, {"specificity", opt(m.specificity)},
                    {"ppv", opt(m.ppv)}, {"npv", opt(m.npv)}};
  }
  return json{{"space", metrics::to_string(r.space)}, {"cells", cells}, {"per_label", labels}};
}

namespace {

struct Row {
  SweepCell cell;
  std::string config_hash;
  std::string author;
  std::size_t judged = 0;
  std::size_t invalid = 0;
  std::map<std::string, std::size_t> counts;
  json ternary;  // "All" cell or null
  json binary;
  bool best = false;
};

json all_cell(const json& report) {
  if (report.is_null()) return nullptr;
  for (const auto& c : report.at("cells"))
    if (c.at("subset") == "All") return c;
  return nullptr;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string fmt_json(const json& v) { return v.is_number() ? fmt(v.get<double>()) : "NA"; }

auto cell_key(const SweepCell& c) {
  return std::make_tuple(static_cast<int>(c.prop_type), static_cast<int>(c.retrieval_method), c.top_n,
                         static_cast<int>(c.context_format), static_cast<int>(c.scope));
}

}  // namespace

ReportFiles emit_report(const fs::path& results_dir) {
  const fs::path cells_dir = results_dir / "cells";
  if (!fs::is_directory(cells_dir)) throw InputError("no sweep results under " + results_dir.string());
  std::vector<Row> rows;
  for (const auto& entry : fs::directory_iterator(cells_dir)) {
    const fs::path manifest_path = entry.path() / "cell.json";
    if (!fs::exists(manifest_path)) continue;
    json manifest;
    json agreement;
    try {
      manifest = json::parse(read_file(manifest_path));
      if (fs::exists(entry.path() / "agreement.json")) agreement = json::parse(read_file(entry.path() / "agreement.json"));
    } catch (const json::parse_error& e) {
      throw FormatError(manifest_path.string() + ": " + e.what());
    }
    const SweepCell cell = SweepCell::from_json(manifest.at("cell"));
    for (const auto& [author, counts] : manifest.at("counts").items()) {
      Row r;
      r.cell = cell;
      r.config_hash = manifest.at("config_hash").get<std::string>();
      r.author = author;
      r.judged = counts.at("judged").get<std::size_t>();
      r.invalid = counts.at("invalid").get<std::size_t>();
      for (Verdict v : kAllVerdicts) r.counts[to_string(v)] = counts.at(to_string(v)).get<std::size_t>();
      if (!agreement.is_null() && agreement.contains(author) && !agreement.at(author).is_null()) {
        r.ternary = all_cell(agreement.at(author).at("ternary"));
        r.binary = all_cell(agreement.at(author).at("binary"));
      }
      rows.push_back(std::move(r));
    }
  }
  if (rows.empty()) throw InputError("no completed sweep cells under " + results_dir.string());
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::make_tuple(a.author, cell_key(a.cell), a.config_hash) <
           std::make_tuple(b.author, cell_key(b.cell), b.config_hash);
  });

  std::map<std::pair<std::string, int>, std::size_t> best;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].ternary.is_null()) continue;
    const auto key = std::make_pair(rows[i].author, static_cast<int>(rows[i].cell.prop_type));
    const auto it = best.find(key);
    const double pa = rows[i].ternary.at("percent_agreement").get<double>();
    if (it == best.end() || pa > rows[it->second].ternary.at("percent_agreement").get<double>()) best[key] = i;
  }
  for (const auto& [key, i] : best) rows[i].best = true;

  std::string tsv =
      "author_type\tprop_type\tretrieval_method\ttop_n\tcontext_format\tscope\tconfig_hash\tn_judged\tn_invalid\t"
      "pct_supported\tpct_not_supported\tpct_not_addressed\tternary_agreement\tternary_ci_lo\tternary_ci_hi\t"
      "ternary_ac1\tbinary_agreement\tbinary_ci_lo\tbinary_ci_hi\tbinary_ac1\tbest\n";
  json doc = json::array();
  for (const auto& r : rows) {
    auto pct = [&](Verdict v) -> json {
      if (r.judged == 0) return nullptr;
      return 100.0 * static_cast<double>(r.counts.at(to_string(v))) / static_cast<double>(r.judged);
    };
    auto stat = [](const json& c, const char* field) -> json { return c.is_null() ? json(nullptr) : c.at(field); };
    auto ci = [](const json& c, const char* bound) -> json {
      return c.is_null() ? json(nullptr) : c.at("percent_agreement_ci").at(bound);
    };
    const json row{{"author_type", r.author},
                   {"cell", r.cell.to_json()},
                   {"config_hash", r.config_hash},
                   {"n_judged", r.judged},
                   {"n_invalid", r.invalid},
                   {"pct_supported", pct(Verdict::Supported)},
                   {"pct_not_supported", pct(Verdict::NotSupported)},
                   {"pct_not_addressed", pct(Verdict::NotAddressed)},
                   {"ternary", r.ternary},
                   {"binary", r.binary},
                   {"best", r.best}};
    doc.push_back(row);
    tsv += r.author + "\t" + to_string(r.cell.prop_type) + "\t" + to_string(r.cell.retrieval_method) + "\t" +
           std::to_string(r.cell.top_n) + "\t" + to_string(r.cell.context_format) + "\t" + to_string(r.cell.scope) +
           "\t" + r.config_hash + "\t" + std::to_string(r.judged) + "\t" + std::to_string(r.invalid) + "\t" +
           fmt_json(row["pct_supported"]) + "\t" + fmt_json(row["pct_not_supported"]) + "\t" +
           fmt_json(row["pct_not_addressed"]) + "\t" + fmt_json(stat(r.ternary, "percent_agreement")) + "\t" +
           fmt_json(ci(r.ternary, "lo")) + "\t" + fmt_json(ci(r.ternary, "hi")) + "\t" +
           fmt_json(stat(r.ternary, "ac1")) + "\t" + fmt_json(stat(r.binary, "percent_agreement")) + "\t" +
           fmt_json(ci(r.binary, "lo")) + "\t" + fmt_json(ci(r.binary, "hi")) + "\t" +
           fmt_json(stat(r.binary, "ac1")) + "\t" + (r.best ? "1" : "0") + "\n";
  }
  ReportFiles files{results_dir / "report.tsv", results_dir / "report.json", rows.size()};
  write_file_atomic(files.table, tsv);
  write_file_atomic(files.document, doc.dump(2) + "\n");
  return files;
}

}  // namespace ehrcheck::app
