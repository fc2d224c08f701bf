#include "ehrcheck/metrics/agreement.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <unordered_map>

#include "ehrcheck/errors.hpp"
#include "ehrcheck/util/parallel.hpp"
#include "ehrcheck/util/stats.hpp"

namespace ehrcheck::metrics {

int category_of(Verdict v, LabelSpace space) noexcept {
  if (space == LabelSpace::Binary) return binarize(v) == BinaryVerdict::Supported ? 0 : 1;
  switch (v) {
    case Verdict::Supported: return 0;
    case Verdict::NotSupported: return 1;
    case Verdict::NotAddressed: return 2;
  }
  return 0;
}

std::size_t category_count(LabelSpace space) noexcept { return space == LabelSpace::Binary ? 2 : 3; }

std::string category_name(int category, LabelSpace space) {
  if (space == LabelSpace::Binary)
    return to_string(category == 0 ? BinaryVerdict::Supported : BinaryVerdict::NotSupportedOrAddressed);
  return to_string(kAllVerdicts.at(static_cast<std::size_t>(category)));
}

void RatingsMatrix::add(const std::string& item, const std::string& rater, int category) {
  if (category < 0 || static_cast<std::size_t>(category) >= q)
    throw InputError("category " + std::to_string(category) + " outside the declared label space");
  auto it = std::find(items.begin(), items.end(), item);
  if (it == items.end()) {
    items.push_back(item);
    ratings.emplace_back();
    it = items.end() - 1;
  }
  ratings[static_cast<std::size_t>(it - items.begin())].push_back({rater, category});
}

RatingsMatrix RatingsMatrix::subset(const std::vector<std::size_t>& rows) const {
  RatingsMatrix out;
  out.q = q;
  for (auto r : rows) {
    out.items.push_back(items.at(r));
    out.ratings.push_back(ratings.at(r));
  }
  return out;
}

RatingsMatrix to_matrix(const std::vector<Annotation>& annotations, LabelSpace space) {
  RatingsMatrix m;
  m.q = category_count(space);
  std::unordered_map<std::string, std::size_t> row;
  for (const auto& a : annotations) {
    auto [it, inserted] = row.emplace(a.prop_id, m.items.size());
    if (inserted) {
      m.items.push_back(a.prop_id);
      m.ratings.emplace_back();
    }
    m.ratings[it->second].push_back({a.rater_id, category_of(a.label, space)});
  }
  return m;
}

namespace {

// Agreeing pairs / total pairs for one item.
double item_agreement(const std::vector<Rating>& r, std::size_t q) {
  const std::size_t n = r.size();
  std::vector<std::size_t> counts(q, 0);
  for (const auto& x : r) ++counts[static_cast<std::size_t>(x.category)];
  double agree = 0.0;
  for (auto c : counts)
    if (c > 1) agree += static_cast<double>(c) * static_cast<double>(c - 1);
  return agree / (static_cast<double>(n) * static_cast<double>(n - 1));
}

void check_matrix(const RatingsMatrix& m) {
  if (m.items.empty()) throw InputError("ratings matrix has no items");
  for (std::size_t i = 0; i < m.items.size(); ++i)
    if (m.ratings[i].size() < 2) throw InputError("item " + m.items[i] + " has fewer than two ratings");
}

}  // namespace

double percent_agreement(const RatingsMatrix& m) {
  check_matrix(m);
  double sum = 0.0;
  for (const auto& r : m.ratings) sum += item_agreement(r, m.q);
  return sum / static_cast<double>(m.items.size());
}

double gwets_ac1(const RatingsMatrix& m) {
  if (m.q < 2) throw DegenerateError("AC1 needs at least two categories");
  const double pa = percent_agreement(m);
  std::vector<double> pi(m.q, 0.0);
  for (const auto& r : m.ratings)
    for (const auto& x : r) pi[static_cast<std::size_t>(x.category)] += 1.0 / static_cast<double>(r.size());
  double pe = 0.0;
  for (double& p : pi) {
    p /= static_cast<double>(m.items.size());
    pe += p * (1.0 - p);
  }
  pe /= static_cast<double>(m.q - 1);
  if (pe >= 1.0) throw DegenerateError("chance agreement is 1");
  return (pa - pe) / (1.0 - pe);
}

Interval bootstrap_ci(const Statistic& stat, const RatingsMatrix& m, std::size_t iterations, double level,
                      std::uint64_t seed, std::size_t workers) {
  check_matrix(m);
  if (iterations == 0) throw InputError("bootstrap needs at least one iteration");
  if (!(level > 0.0 && level < 1.0)) throw InputError("confidence level must be in (0, 1)");
  const std::size_t n = m.items.size();
  // Statistics only read categories, so resample a copy without the names.
  RatingsMatrix bare;
  bare.q = m.q;
  bare.items.assign(n, std::string());
  bare.ratings = m.ratings;
  for (auto& row : bare.ratings)
    for (auto& r : row) r.rater_id.clear();
  // Indices are drawn serially from one stream, so the result does not depend
  // on how iterations are spread over workers.
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  std::mt19937_64 rng(seq);
  std::vector<std::size_t> draws(iterations * n);
  for (auto& d : draws) d = static_cast<std::size_t>(rng() % n);
  std::vector<double> values(iterations);
  util::parallel_for(iterations, workers, [&](std::size_t it) {
    RatingsMatrix sample;
    sample.q = bare.q;
    sample.items.assign(n, std::string());
    sample.ratings.reserve(n);
    for (std::size_t k = 0; k < n; ++k) sample.ratings.push_back(bare.ratings[draws[it * n + k]]);
    values[it] = stat(sample);
  });
  const double tail = (1.0 - level) / 2.0 * 100.0;
  return {util::percentile(values, tail), util::percentile(values, 100.0 - tail)};
}

MajorityResult majority_vote(const std::vector<Annotation>& annotations) {
  MajorityResult out;
  std::vector<std::string> order;
  std::map<std::string, std::map<Verdict, std::size_t>> votes;
  for (const auto& a : annotations) {
    if (!votes.contains(a.prop_id)) order.push_back(a.prop_id);
    ++votes[a.prop_id][a.label];
  }
  for (const auto& item : order) {
    const auto& v = votes[item];
    std::size_t total = 0, best = 0, best_count = 0;
    Verdict winner = Verdict::Supported;
    for (const auto& [label, c] : v) {
      total += c;
      if (c > best) {
        best = c;
        best_count = 1;
        winner = label;
      } else if (c == best) {
        ++best_count;
      }
    }
    if (best >= 2 && best_count == 1)
      out.truth[item] = {winner, best == total ? Provenance::Unanimous : Provenance::Majority};
    else
      out.adjudication_queue.push_back(item);
  }
  return out;
}

void merge_adjudicated(MajorityResult& result, const std::map<std::string, Verdict>& adjudicated) {
  for (const auto& [item, label] : adjudicated) {
    auto it = std::find(result.adjudication_queue.begin(), result.adjudication_queue.end(), item);
    if (it == result.adjudication_queue.end()) throw InputError("item " + item + " was not queued for adjudication");
    result.truth[item] = {label, Provenance::Adjudicated};
    result.adjudication_queue.erase(it);
  }
}

ConfusionMetrics confusion_metrics(const std::map<std::string, Verdict>& pred, const GroundTruth& truth,
                                   Verdict positive, LabelSpace space) {
  ConfusionMetrics m;
  const int pos = category_of(positive, space);
  for (const auto& [item, p] : pred) {
    auto it = truth.find(item);
    if (it == truth.end()) continue;
    const bool pp = category_of(p, space) == pos;
    const bool tp = category_of(it->second.label, space) == pos;
    if (pp && tp) ++m.counts.tp;
    else if (pp) ++m.counts.fp;
    else if (tp) ++m.counts.fn;
    else ++m.counts.tn;
  }
  auto ratio = [](std::size_t a, std::size_t b) -> std::optional<double> {
    if (a + b == 0) return std::nullopt;
    return static_cast<double>(a) / static_cast<double>(a + b);
  };
  m.sensitivity = ratio(m.counts.tp, m.counts.fn);
  m.specificity = ratio(m.counts.tn, m.counts.fp);
  m.ppv = ratio(m.counts.tp, m.counts.fp);
  m.npv = ratio(m.counts.tn, m.counts.fn);
  return m;
}

namespace {

AgreementReport report_from_matrix(const RatingsMatrix& m, LabelSpace space, const ReportOptions& opts) {
  AgreementReport rep;
  rep.space = space;
  auto cell = [&](std::string name, const RatingsMatrix& sub) {
    AgreementCell c;
    c.subset = std::move(name);
    c.n_items = sub.size();
    if (sub.size() == 0) return c;
    c.percent_agreement = percent_agreement(sub);
    c.percent_agreement_ci = bootstrap_ci(percent_agreement, sub, opts.iterations, opts.level, opts.seed, opts.workers);
    c.ac1 = gwets_ac1(sub);
    c.ac1_ci = bootstrap_ci(gwets_ac1, sub, opts.iterations, opts.level, opts.seed, opts.workers);
    return c;
  };
  rep.cells.push_back(cell("All", m));
  for (std::size_t k = 0; k < m.q; ++k) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < m.size(); ++i)
      if (std::any_of(m.ratings[i].begin(), m.ratings[i].end(),
                      [k](const Rating& r) { return static_cast<std::size_t>(r.category) == k; }))
        rows.push_back(i);
    rep.cells.push_back(cell("At least one " + category_name(static_cast<int>(k), space), m.subset(rows)));
  }
  return rep;
}

}  // namespace

AgreementReport agreement_report(const std::map<std::string, Verdict>& pred, const GroundTruth& truth,
                                 LabelSpace space, const ReportOptions& opts) {
  std::vector<Annotation> ann;
  for (const auto& [item, p] : pred) {
    auto it = truth.find(item);
    if (it == truth.end()) continue;
    ann.push_back({item, "predicted", p});
    ann.push_back({item, "truth", it->second.label});
  }
  if (ann.empty()) throw InputError("predictions and ground truth share no items");
  auto rep = report_from_matrix(to_matrix(ann, space), space, opts);
  const std::vector<Verdict> positives = space == LabelSpace::Binary
                                             ? std::vector<Verdict>{Verdict::Supported, Verdict::NotSupported}
                                             : std::vector<Verdict>(kAllVerdicts.begin(), kAllVerdicts.end());
  for (Verdict v : positives)
    rep.per_label[category_name(category_of(v, space), space)] = confusion_metrics(pred, truth, v, space);
  return rep;
}

AgreementReport inter_rater_report(const std::vector<Annotation>& annotations, LabelSpace space,
                                   const ReportOptions& opts) {
  return report_from_matrix(to_matrix(annotations, space), space, opts);
}

std::string to_string(LabelSpace s) { return s == LabelSpace::Binary ? "binary" : "ternary"; }

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::Unanimous: return "Unanimous";
    case Provenance::Majority: return "Majority";
    case Provenance::Adjudicated: return "Adjudicated";
  }
  return "?";
}

}  // namespace ehrcheck::metrics
