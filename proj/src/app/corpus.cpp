#include "ehrcheck/app/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "ehrcheck/errors.hpp"

namespace ehrcheck::app {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

std::string required_string(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) throw InputError(std::string("missing or non-string field \"") + key + "\"");
  return j[key].get<std::string>();
}

bool is_blank(const std::string& line) { return line.find_first_not_of(" \t\r") == std::string::npos; }

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp);
    out << content;
    if (!out) throw InputError("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

json note_to_json(const ClinicalNote& n) {
  return json{{"note_id", n.note_id},         {"patient_id", n.patient_id},
              {"admission_id", n.admission_id}, {"category", n.category},
              {"description", n.description}, {"timestamp", format_timestamp_iso(n.timestamp)},
              {"text", n.text}};
}

ClinicalNote note_from_json(const json& j) {
  if (!j.is_object()) throw InputError("record is not a JSON object");
  ClinicalNote n;
  n.note_id = required_string(j, "note_id");
  n.patient_id = required_string(j, "patient_id");
  n.admission_id = required_string(j, "admission_id");
  n.category = required_string(j, "category");
  n.description = required_string(j, "description");
  n.timestamp = parse_timestamp(required_string(j, "timestamp"));
  n.text = required_string(j, "text");
  if (n.note_id.empty()) throw InputError("empty note_id");
  if (trim(n.text).empty()) throw InputError("note " + n.note_id + " has empty text");
  return n;
}

Corpus parse_notes(const std::string& jsonl, const IngestOptions& opts) {
  Corpus corpus;
  std::set<std::string> seen;
  std::istringstream in(jsonl);
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (is_blank(line)) continue;
    try {
      const json j = json::parse(line, nullptr, false);
      if (j.is_discarded()) throw InputError("malformed JSON");
      ClinicalNote note = note_from_json(j);
      if (!seen.insert(note.note_id).second) throw DuplicateError("duplicate note_id " + note.note_id);
      corpus.notes.push_back(std::move(note));
    } catch (const InputError& e) {
      const std::string msg = "line " + std::to_string(lineno) + ": " + e.what();
      if (!opts.lenient) {
        if (dynamic_cast<const DuplicateError*>(&e)) throw DuplicateError(msg);
        throw InputError(msg);
      }
      corpus.warnings.push_back(msg);
    }
  }
  if (corpus.notes.empty()) corpus.warnings.push_back("no notes found");
  return corpus;
}

Corpus load_notes(const std::filesystem::path& path, const IngestOptions& opts) {
  return parse_notes(read_file(path), opts);
}

std::map<std::string, AdmissionWindow> parse_admissions(const std::string& jsonl) {
  std::map<std::string, AdmissionWindow> out;
  std::istringstream in(jsonl);
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (is_blank(line)) continue;
    try {
      const json j = json::parse(line, nullptr, false);
      if (!j.is_object()) throw InputError("malformed JSON");
      AdmissionWindow w{required_string(j, "admission_id"), parse_timestamp(required_string(j, "start")),
                        parse_timestamp(required_string(j, "end"))};
      if (w.end < w.start) throw InputError("admission " + w.admission_id + " ends before it starts");
      out[w.admission_id] = w;
    } catch (const InputError& e) {
      throw InputError("admissions line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void load_admissions(Corpus& corpus, const std::filesystem::path& path) {
  for (auto& [id, w] : parse_admissions(read_file(path))) corpus.admissions[id] = w;
}

std::vector<std::string> Corpus::patients() const {
  std::set<std::string> ids;
  for (const auto& n : notes) ids.insert(n.patient_id);
  return {ids.begin(), ids.end()};
}

std::vector<ClinicalNote> Corpus::notes_for_patient(const std::string& patient_id) const {
  std::vector<ClinicalNote> out;
  for (const auto& n : notes)
    if (n.patient_id == patient_id) out.push_back(n);
  return out;
}

AdmissionWindow Corpus::window_for(const std::string& admission_id) const {
  if (auto it = admissions.find(admission_id); it != admissions.end()) return it->second;
  std::optional<AdmissionWindow> w;
  for (const auto& n : notes) {
    if (n.admission_id != admission_id) continue;
    if (!w) w = AdmissionWindow{admission_id, n.timestamp, n.timestamp};
    w->start = std::min(w->start, n.timestamp);
    w->end = std::max(w->end, n.timestamp);
  }
  if (!w) throw InputError("unknown admission " + admission_id);
  return *w;
}

json candidate_to_json(const Candidate& c) {
  return json{{"doc_id", c.doc_id},
              {"patient_id", c.patient_id},
              {"admission_id", c.admission_id},
              {"author_type", to_string(c.author_type)},
              {"text", c.text}};
}

std::vector<Candidate> load_candidates(const std::filesystem::path& path) {
  std::vector<Candidate> out;
  std::istringstream in(read_file(path));
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (is_blank(line)) continue;
    try {
      const json j = json::parse(line, nullptr, false);
      if (!j.is_object()) throw InputError("malformed JSON");
      Candidate c;
      c.doc_id = required_string(j, "doc_id");
      c.patient_id = required_string(j, "patient_id");
      c.admission_id = required_string(j, "admission_id");
      const auto author = parse_author_type(j.value("author_type", "LLMWritten"));
      if (!author) throw InputError("unknown author_type");
      c.author_type = *author;
      c.text = required_string(j, "text");
      out.push_back(std::move(c));
    } catch (const InputError& e) {
      throw InputError("candidates line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<metrics::Annotation> parse_annotations(const std::string& text) {
  std::istringstream in(text);
  std::string header;
  while (std::getline(in, header) && is_blank(header)) {
  }
  if (is_blank(header)) return {};
  const char delim = header.find('\t') != std::string::npos ? '\t' : ',';
  auto split = [delim](const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, delim)) cells.push_back(trim(cell));
    return cells;
  };
  const auto cols = split(header);
  auto col = [&](const char* name) {
    auto it = std::find(cols.begin(), cols.end(), name);
    if (it == cols.end()) throw InputError(std::string("annotations lack a \"") + name + "\" column");
    return static_cast<std::size_t>(it - cols.begin());
  };
  const std::size_t ip = col("prop_id"), ir = col("rater_id"), il = col("label");
  std::vector<metrics::Annotation> out;
  std::string line;
  for (std::size_t lineno = 2; std::getline(in, line); ++lineno) {
    if (is_blank(line)) continue;
    const auto cells = split(line);
    if (cells.size() <= std::max({ip, ir, il}))
      throw InputError("annotations line " + std::to_string(lineno) + " has too few columns");
    const auto label = parse_verdict(cells[il]);
    if (!label) throw InputError("annotations line " + std::to_string(lineno) + ": unknown label " + cells[il]);
    out.push_back({cells[ip], cells[ir], *label});
  }
  return out;
}

std::vector<metrics::Annotation> load_annotations(const std::filesystem::path& path) {
  return parse_annotations(read_file(path));
}

std::optional<std::string> extract_bhc(const std::string& text, const CohortCriteria& criteria) {
  const std::regex header(criteria.bhc_header, std::regex::ECMAScript | std::regex::icase);
  const std::regex end(criteria.section_end, std::regex::ECMAScript);
  std::istringstream in(text);
  std::string line, section;
  bool inside = false;
  while (std::getline(in, line)) {
    if (!inside) {
      std::smatch m;
      if (std::regex_search(line, m, header)) {
        inside = true;
        std::string rest = m.suffix().str();
        const auto b = rest.find_first_not_of(" \t:");
        section = b == std::string::npos ? std::string{} : rest.substr(b);
      }
      continue;
    }
    if (std::regex_search(line, end)) break;
    section += "\n" + line;
  }
  if (!inside) return std::nullopt;
  section = trim(section);
  if (section.empty()) return std::nullopt;
  return section;
}

std::vector<CohortMember> cohort_filter(const Corpus& corpus, const CohortCriteria& criteria) {
  std::vector<CohortMember> out;
  for (const auto& patient : corpus.patients()) {
    const auto notes = corpus.notes_for_patient(patient);
    // Last admission = the one holding the latest discharge summary.
    const ClinicalNote* discharge = nullptr;
    for (const auto& n : notes) {
      if (n.category != criteria.discharge_category) continue;
      if (!discharge || n.timestamp > discharge->timestamp ||
          (n.timestamp == discharge->timestamp && n.note_id > discharge->note_id))
        discharge = &n;
    }
    if (!discharge) continue;
    auto bhc = extract_bhc(discharge->text, criteria);
    if (!bhc) continue;

    CohortMember m;
    m.patient_id = patient;
    m.admission_id = discharge->admission_id;
    m.discharge_note_id = discharge->note_id;
    m.bhc_text = std::move(*bhc);
    for (const auto& n : notes) {
      if (n.note_id == discharge->note_id) continue;
      if (n.admission_id == m.admission_id && n.category == criteria.physician_category) ++m.physician_notes;
      if (n.timestamp <= discharge->timestamp) ++m.prior_notes;
    }
    if (m.physician_notes < criteria.min_physician_notes || m.prior_notes < criteria.min_prior_notes) continue;
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<ClinicalNote> reference_notes(const Corpus& corpus, const CohortMember& member) {
  std::vector<ClinicalNote> out;
  const ClinicalNote* discharge = nullptr;
  for (const auto& n : corpus.notes)
    if (n.note_id == member.discharge_note_id) discharge = &n;
  for (const auto& n : corpus.notes) {
    if (n.patient_id != member.patient_id || n.note_id == member.discharge_note_id) continue;
    if (discharge && n.timestamp > discharge->timestamp) continue;
    out.push_back(n);
  }
  return out;
}

}  // namespace ehrcheck::app
