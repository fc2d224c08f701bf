#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ehrcheck/domain.hpp"

namespace ehrcheck::metrics {

enum class LabelSpace { Ternary, Binary };

// Category index for a verdict: ternary S=0, NS=1, NA=2; binary S=0, NS|NA=1.
int category_of(Verdict v, LabelSpace space) noexcept;
std::size_t category_count(LabelSpace space) noexcept;
std::string category_name(int category, LabelSpace space);

struct Rating {
  std::string rater_id;
  int category = 0;
};

// Ragged ratings: each item keeps whichever raters labelled it. Categories
// are indices into a declared space of `q` labels.
struct RatingsMatrix {
  std::size_t q = 3;
  std::vector<std::string> items;
  std::vector<std::vector<Rating>> ratings;  // parallel to items

  void add(const std::string& item, const std::string& rater, int category);
  std::size_t size() const noexcept { return items.size(); }
  RatingsMatrix subset(const std::vector<std::size_t>& rows) const;
};

// Verdict-level ratings (prop_id, rater_id, label).
struct Annotation {
  std::string prop_id;
  std::string rater_id;
  Verdict label = Verdict::Supported;
};

RatingsMatrix to_matrix(const std::vector<Annotation>& annotations, LabelSpace space);

// Mean over items of (agreeing rater pairs / rater pairs). InputError when
// the matrix is empty or an item has fewer than two ratings.
double percent_agreement(const RatingsMatrix& m);

// Gwet's AC1 (multi-rater form) with pi_k over all q declared categories.
// DegenerateError when q < 2.
double gwets_ac1(const RatingsMatrix& m);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

using Statistic = std::function<double(const RatingsMatrix&)>;

// Percentile bootstrap over items. All resample indices come from one
// mt19937_64 seeded with seed_seq{seed_lo, seed_hi}, drawn in iteration
// order, so results do not depend on threading.
Interval bootstrap_ci(const Statistic& stat, const RatingsMatrix& m, std::size_t iterations = 1000,
                      double level = 0.95, std::uint64_t seed = 0, std::size_t workers = 1);

enum class Provenance { Unanimous, Majority, Adjudicated };

struct TruthLabel {
  Verdict label = Verdict::Supported;
  Provenance provenance = Provenance::Unanimous;
};

using GroundTruth = std::map<std::string, TruthLabel>;

struct MajorityResult {
  GroundTruth truth;
  std::vector<std::string> adjudication_queue;  // item order
};

// A label held by a strict plurality of at least two raters wins; anything
// else (e.g. three-way disagreement) is queued for adjudication.
MajorityResult majority_vote(const std::vector<Annotation>& annotations);

// Adds adjudicated labels for queued items; throws InputError for an item
// that is not in the queue.
void merge_adjudicated(MajorityResult& result, const std::map<std::string, Verdict>& adjudicated);

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

// nullopt marks an undefined ratio (zero denominator).
struct ConfusionMetrics {
  ConfusionCounts counts;
  std::optional<double> sensitivity;
  std::optional<double> specificity;
  std::optional<double> ppv;
  std::optional<double> npv;
};

// One-vs-rest over the items present in both maps, in the given space.
ConfusionMetrics confusion_metrics(const std::map<std::string, Verdict>& pred, const GroundTruth& truth,
                                   Verdict positive, LabelSpace space = LabelSpace::Ternary);

struct AgreementCell {
  std::string subset;  // "All" or "At least one <label>"
  std::size_t n_items = 0;
  double percent_agreement = 0.0;
  Interval percent_agreement_ci;
  std::optional<double> ac1;
  std::optional<Interval> ac1_ci;
};

struct AgreementReport {
  LabelSpace space = LabelSpace::Ternary;
  std::vector<AgreementCell> cells;
  std::map<std::string, ConfusionMetrics> per_label;
};

struct ReportOptions {
  std::size_t iterations = 1000;
  double level = 0.95;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

// Predicted verdicts vs ground truth, treated as two raters per item, over
// the items present in both. Subsets keep items where either side assigned
// the label.
AgreementReport agreement_report(const std::map<std::string, Verdict>& pred, const GroundTruth& truth,
                                 LabelSpace space, const ReportOptions& opts = {});

// Inter-rater report over raw annotations (Table-1 style).
AgreementReport inter_rater_report(const std::vector<Annotation>& annotations, LabelSpace space,
                                   const ReportOptions& opts = {});

std::string to_string(LabelSpace s);
std::string to_string(Provenance p);

}  // namespace ehrcheck::metrics
