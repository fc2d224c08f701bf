#include "ehrcheck/index/fact_index.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "ehrcheck/errors.hpp"
#include "ehrcheck/util/hash.hpp"
#include "ehrcheck/util/stats.hpp"

namespace ehrcheck::index {

using nlohmann::json;

namespace {

constexpr const char* kFormatName = "ehrcheck-fact-index";
constexpr int kFormatVersion = 1;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

json fact_to_json(const Fact& f) {
  json idx = json::array(), val = json::array();
  for (const auto& [k, v] : f.sparse_vec) {
    idx.push_back(k);
    val.push_back(v);
  }
  return json{{"fact_id", f.fact_id},
              {"note_id", f.note_id},
              {"admission_id", f.admission_id},
              {"timestamp", format_timestamp_iso(f.timestamp)},
              {"category", f.category},
              {"description", f.description},
              {"text", f.text},
              {"dense", f.dense_vec},
              {"sparse", {{"indices", idx}, {"values", val}}}};
}

Fact fact_from_json(const json& j) {
  Fact f;
  f.fact_id = j.at("fact_id").get<std::string>();
  f.note_id = j.at("note_id").get<std::string>();
  f.admission_id = j.at("admission_id").get<std::string>();
  f.timestamp = parse_timestamp(j.at("timestamp").get<std::string>());
  f.category = j.at("category").get<std::string>();
  f.description = j.at("description").get<std::string>();
  f.text = j.at("text").get<std::string>();
  f.dense_vec = j.at("dense").get<DenseVector>();
  const auto& idx = j.at("sparse").at("indices");
  const auto& val = j.at("sparse").at("values");
  if (idx.size() != val.size()) throw FormatError("fact " + f.fact_id + " has mismatched sparse arrays");
  for (std::size_t i = 0; i < idx.size(); ++i) f.sparse_vec[idx[i].get<std::uint32_t>()] = val[i].get<double>();
  return f;
}

}  // namespace

void IndexConfig::validate() const {
  if (top_n < 1) throw InputError("top_n must be at least 1");
  if (k_per_query < 0) throw InputError("k_per_query must be non-negative");
  if (retrieval_method == RetrievalMethod::Dense && k_per_query != 0 && k_per_query != top_n)
    throw InputError("dense retrieval requires k_per_query == top_n");
}

ScopeFilter make_scope_filter(Scope scope, const std::string& current_admission_id) {
  return scope == Scope::CurrentAdmission ? ScopeFilter::only(current_admission_id) : ScopeFilter::all();
}

std::vector<double> dbsf_normalize(const std::vector<double>& scores) {
  std::vector<double> out(scores.size(), 0.5);
  if (scores.empty()) return out;
  // Checked directly: the computed sigma of a constant list can be a few ulps off zero.
  const auto [mn, mx] = std::minmax_element(scores.begin(), scores.end());
  if (*mn == *mx) return out;
  const double mu = util::mean(scores);
  const double sigma = util::stddev(scores);
  if (sigma == 0.0) return out;
  const double lo = mu - 3.0 * sigma;
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = std::clamp((scores[i] - lo) / (6.0 * sigma), 0.0, 1.0);
  return out;
}

double dot(const DenseVector& a, const DenseVector& b) {
  if (a.size() != b.size()) throw DimensionError("vector dimensions differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double sparse_dot(const SparseVector& a, const SparseVector& b) {
  const SparseVector& small = a.size() <= b.size() ? a : b;
  const SparseVector& large = a.size() <= b.size() ? b : a;
  double s = 0.0;
  for (const auto& [k, v] : small)
    if (auto it = large.find(k); it != large.end()) s += v * it->second;
  return s;
}

Snapshot::Snapshot(std::vector<Fact> facts, std::size_t dense_dim) : facts_(std::move(facts)), dim_(dense_dim) {
  for (std::size_t i = 0; i < facts_.size(); ++i) by_id_.emplace(facts_[i].fact_id, i);
  id_ = util::sha256_hex(serialize_facts(facts_, dim_));
}

const Fact* Snapshot::find(const std::string& fact_id) const {
  auto it = by_id_.find(fact_id);
  return it == by_id_.end() ? nullptr : &facts_[it->second];
}

void Snapshot::sort_hits(std::vector<SearchHit>& hits) const {
  std::stable_sort(hits.begin(), hits.end(), [this](const SearchHit& a, const SearchHit& b) {
    if (a.score != b.score) return a.score > b.score;
    const Fact* fa = find(a.fact_id);
    const Fact* fb = find(b.fact_id);
    if (fa && fb && fa->timestamp != fb->timestamp) return fa->timestamp < fb->timestamp;
    return a.fact_id < b.fact_id;
  });
}

std::vector<SearchHit> Snapshot::dense_search(const DenseVector& query, std::size_t k,
                                              const ScopeFilter& filter) const {
  if (facts_.empty() || k == 0) return {};
  if (query.size() != dim_)
    throw DimensionError("query has dimension " + std::to_string(query.size()) + ", index has " + std::to_string(dim_));
  std::vector<SearchHit> hits;
  for (const auto& f : facts_)
    if (filter.admits(f)) hits.push_back({f.fact_id, dot(query, f.dense_vec), ScoreKind::DotProduct});
  sort_hits(hits);
  if (hits.size() > k) hits.resize(k);
  return hits;
}

std::vector<SearchHit> Snapshot::sparse_search(const SparseVector& query, std::size_t k,
                                               const ScopeFilter& filter) const {
  if (k == 0) return {};
  std::vector<SearchHit> hits;
  for (const auto& f : facts_) {
    if (!filter.admits(f)) continue;
    const double s = sparse_dot(query, f.sparse_vec);
    if (s > 0.0) hits.push_back({f.fact_id, s, ScoreKind::SparseDot});
  }
  sort_hits(hits);
  if (hits.size() > k) hits.resize(k);
  return hits;
}

std::vector<SearchHit> Snapshot::fuse_dbsf(const std::vector<SearchHit>& dense,
                                           const std::vector<SearchHit>& sparse) const {
  std::vector<SearchHit> fused;
  std::unordered_map<std::string, std::size_t> slot;
  for (const auto* list : {&dense, &sparse}) {
    std::vector<double> raw;
    for (const auto& h : *list) raw.push_back(h.score);
    const auto norm = dbsf_normalize(raw);
    for (std::size_t i = 0; i < list->size(); ++i) {
      const auto& id = (*list)[i].fact_id;
      auto [it, inserted] = slot.emplace(id, fused.size());
      if (inserted) fused.push_back({id, 0.0, ScoreKind::FusedDBSF});
      fused[it->second].score += norm[i];
    }
  }
  sort_hits(fused);
  return fused;
}

std::vector<SearchHit> Snapshot::select_top_n(const std::vector<SearchHit>& hits, std::size_t n) const {
  std::vector<SearchHit> out;
  std::unordered_set<std::string> seen;
  for (const auto& h : hits) {
    if (out.size() >= n) break;
    const Fact* f = find(h.fact_id);
    const std::string key = f ? trim(f->text) : "\x1f" + h.fact_id;
    if (seen.insert(key).second) out.push_back(h);
  }
  return out;
}

std::vector<SearchHit> Snapshot::retrieve(const std::string& proposition_text, const IndexConfig& cfg,
                                          gateway::Gateway& gw, const ScopeFilter& filter) const {
  cfg.validate();
  if (facts_.empty()) return {};
  const auto n = static_cast<std::size_t>(cfg.top_n);
  const auto k = static_cast<std::size_t>(cfg.effective_k());
  const auto dense = dense_search(gw.embed_dense({proposition_text}).at(0), k, filter);
  if (cfg.retrieval_method == RetrievalMethod::Dense) return select_top_n(dense, n);

  const auto sparse = sparse_search(gw.embed_sparse({proposition_text}).at(0), k, filter);
  const auto fused = fuse_dbsf(dense, sparse);
  if (cfg.retrieval_method == RetrievalMethod::Hybrid) return select_top_n(fused, n);

  auto candidates = select_top_n(fused, fused.size());
  if (candidates.empty()) return {};
  std::vector<std::string> texts;
  for (const auto& h : candidates) texts.push_back(find(h.fact_id)->text);
  const auto scores = gw.rerank(proposition_text, texts);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    candidates[i].score = scores[i];
    candidates[i].score_kind = ScoreKind::RerankScore;
  }
  sort_hits(candidates);
  if (candidates.size() > n) candidates.resize(n);
  return candidates;
}

std::string FactIndex::ingest(std::vector<Fact> facts) {
  std::lock_guard lock(mu_);
  std::size_t dim = dim_;
  std::unordered_set<std::string> ids;
  for (const auto& f : current_->facts()) ids.insert(f.fact_id);
  if (dim == 0 && !current_->facts().empty()) dim = current_->dense_dim();
  for (const auto& f : facts) {
    if (dim == 0) dim = f.dense_vec.size();
    if (f.dense_vec.size() != dim || dim == 0)
      throw DimensionError("fact " + f.fact_id + " has dimension " + std::to_string(f.dense_vec.size()) +
                           ", expected " + std::to_string(dim));
    if (!ids.insert(f.fact_id).second) throw DuplicateError("duplicate fact id: " + f.fact_id);
  }
  std::vector<Fact> all = current_->facts();
  all.insert(all.end(), std::make_move_iterator(facts.begin()), std::make_move_iterator(facts.end()));
  dim_ = dim;
  current_ = std::make_shared<const Snapshot>(std::move(all), dim);
  return current_->id();
}

std::shared_ptr<const Snapshot> FactIndex::snapshot() const {
  std::lock_guard lock(mu_);
  return current_;
}

std::string serialize_facts(const std::vector<Fact>& facts, std::size_t dense_dim) {
  std::string out = json{{"format", kFormatName}, {"version", kFormatVersion}, {"dense_dim", dense_dim},
                         {"count", facts.size()}}
                        .dump() +
                    "\n";
  for (const auto& f : facts) out += fact_to_json(f).dump() + "\n";
  return out;
}

std::pair<std::vector<Fact>, std::size_t> parse_facts(const std::string& jsonl) {
  std::istringstream in(jsonl);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty index file");
  const json header = json::parse(line, nullptr, false);
  if (!header.is_object() || header.value("format", "") != kFormatName)
    throw FormatError("not a fact index file");
  if (header.value("version", 0) != kFormatVersion)
    throw FormatError("unsupported index version " + header.value("version", json(0)).dump());
  std::vector<Fact> facts;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw FormatError("malformed fact record at line " + std::to_string(facts.size() + 2));
    try {
      facts.push_back(fact_from_json(j));
    } catch (const json::exception& e) {
      throw FormatError(std::string("malformed fact record: ") + e.what());
    }
  }
  if (facts.size() != header.value("count", std::size_t{0})) throw FormatError("index file is truncated");
  return {std::move(facts), header.value("dense_dim", std::size_t{0})};
}

void FactIndex::save(const std::filesystem::path& path) const {
  auto snap = snapshot();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write index: " + path.string());
  out << serialize_facts(snap->facts(), snap->dense_dim());
}

FactIndex FactIndex::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open index: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  auto [facts, dim] = parse_facts(ss.str());
  FactIndex idx(dim);
  idx.ingest(std::move(facts));
  return idx;
}

std::string to_string(ScoreKind k) {
  switch (k) {
    case ScoreKind::DotProduct: return "DotProduct";
    case ScoreKind::SparseDot: return "SparseDot";
    case ScoreKind::FusedDBSF: return "FusedDBSF";
    case ScoreKind::RerankScore: return "RerankScore";
  }
  return "?";
}

}  // namespace ehrcheck::index
