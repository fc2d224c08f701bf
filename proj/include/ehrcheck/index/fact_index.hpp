#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "ehrcheck/domain.hpp"
#include "ehrcheck/gateway/gateway.hpp"

namespace ehrcheck::index {

enum class ScoreKind { DotProduct, SparseDot, FusedDBSF, RerankScore };

struct SearchHit {
  std::string fact_id;
  double score = 0.0;
  ScoreKind score_kind = ScoreKind::DotProduct;
  bool operator==(const SearchHit&) const = default;
};

struct IndexConfig {
  std::size_t dense_dim = 0;  // 0: taken from the first ingested fact
  RetrievalMethod retrieval_method = RetrievalMethod::Dense;
  // Facts per dense/sparse query. 0 means "same as top_n".
  int k_per_query = 0;
  int top_n = 10;
  Scope scope = Scope::AllAdmissions;

  int effective_k() const noexcept { return k_per_query > 0 ? k_per_query : top_n; }
  void validate() const;  // throws InputError
};

// Which admissions a search may draw from; nullopt admits everything.
struct ScopeFilter {
  std::optional<std::set<std::string>> admissions;

  static ScopeFilter all() { return {}; }
  static ScopeFilter only(std::string admission_id) { return {std::set<std::string>{std::move(admission_id)}}; }
  bool admits(const Fact& f) const { return !admissions || admissions->contains(f.admission_id); }
};

// Resolves a Scope against the admission under review.
ScopeFilter make_scope_filter(Scope scope, const std::string& current_admission_id);

// s' = (s - (mu - 3 sigma)) / (6 sigma), clamped to [0, 1], with mu and the
// population sigma taken over `scores`. A constant list maps to 0.5.
std::vector<double> dbsf_normalize(const std::vector<double>& scores);

// Immutable set of facts. Every search is exhaustive and returns hits ordered
// by (score desc, timestamp asc, fact_id asc).
class Snapshot {
public:
  Snapshot() = default;
  Snapshot(std::vector<Fact> facts, std::size_t dense_dim);

  const std::string& id() const noexcept { return id_; }
  std::size_t size() const noexcept { return facts_.size(); }
  std::size_t dense_dim() const noexcept { return dim_; }
  const std::vector<Fact>& facts() const noexcept { return facts_; }
  const Fact* find(const std::string& fact_id) const;

  std::vector<SearchHit> dense_search(const DenseVector& query, std::size_t k, const ScopeFilter& filter = {}) const;
  // Only facts sharing at least one weighted token (score > 0) are returned.
  std::vector<SearchHit> sparse_search(const SparseVector& query, std::size_t k, const ScopeFilter& filter = {}) const;
  // Union of both lists, each normalized with dbsf_normalize and summed.
  std::vector<SearchHit> fuse_dbsf(const std::vector<SearchHit>& dense, const std::vector<SearchHit>& sparse) const;
  // Drops hits whose trimmed text equals an earlier hit's, then keeps n.
  std::vector<SearchHit> select_top_n(const std::vector<SearchHit>& hits, std::size_t n) const;

  std::vector<SearchHit> retrieve(const std::string& proposition_text, const IndexConfig& cfg, gateway::Gateway& gw,
                                  const ScopeFilter& filter = {}) const;

  void sort_hits(std::vector<SearchHit>& hits) const;

private:
  std::vector<Fact> facts_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::size_t dim_ = 0;
  std::string id_;
};

double dot(const DenseVector& a, const DenseVector& b);
double sparse_dot(const SparseVector& a, const SparseVector& b);

// Ingestion front-end. Each ingest produces a new snapshot; readers holding
// an older snapshot are unaffected.
class FactIndex {
public:
  explicit FactIndex(std::size_t dense_dim = 0) : dim_(dense_dim), current_(std::make_shared<Snapshot>()) {}
  FactIndex(FactIndex&& other) noexcept : dim_(other.dim_), current_(other.snapshot()) {}

  // Returns the new snapshot id. DimensionError / DuplicateError leave the
  // index unchanged.
  std::string ingest(std::vector<Fact> facts);
  std::shared_ptr<const Snapshot> snapshot() const;

  void save(const std::filesystem::path& path) const;
  static FactIndex load(const std::filesystem::path& path);

private:
  mutable std::mutex mu_;
  std::size_t dim_;
  std::shared_ptr<const Snapshot> current_;
};

// Line-delimited persistence: a header line then one fact per line.
std::string serialize_facts(const std::vector<Fact>& facts, std::size_t dense_dim);
std::pair<std::vector<Fact>, std::size_t> parse_facts(const std::string& jsonl);

std::string to_string(ScoreKind k);

}  // namespace ehrcheck::index
