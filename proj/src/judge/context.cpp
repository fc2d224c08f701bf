#include "ehrcheck/judge/context.hpp"

#include <algorithm>
#include <cstdio>
#include <unordered_map>

#include "ehrcheck/errors.hpp"

namespace ehrcheck::judge {

namespace {

std::string score_2dp(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", s);
  return buf;
}

std::string tail(const ContextEntry& e) {
  return "Note Category: " + e.category + ", Note Description: " + e.description + " | Text: " + e.text;
}

}  // namespace

std::string render_relative(Timestamp t, Timestamp now) {
  using namespace std::chrono;
  if (t == now) return "Now";
  const bool past = t < now;
  const auto hrs = duration_cast<hours>(past ? now - t : t - now).count();
  const std::string body = std::to_string(hrs / 24) + " days " + std::to_string(hrs % 24) + " hours";
  return past ? body + " ago" : body + " from now";
}

ReferenceContext format_context(const std::vector<index::SearchHit>& hits, const std::vector<Fact>& facts,
                                ContextFormat fmt, const AdmissionWindow& window, const FormatOptions& opts) {
  std::unordered_map<std::string, const Fact*> lookup;
  for (const auto& f : facts) lookup.emplace(f.fact_id, &f);

  ReferenceContext ctx;
  ctx.format = fmt;
  for (const auto& h : hits) {
    auto it = lookup.find(h.fact_id);
    if (it == lookup.end()) throw FormatError("context hit does not resolve to a fact: " + h.fact_id);
    const Fact& f = *it->second;
    if (f.category.empty() || f.description.empty())
      throw FormatError("fact " + f.fact_id + " lacks note category or description");
    ctx.entries.push_back({f.fact_id, h.score, f.timestamp, f.category, f.description, f.text});
  }

  std::string& out = ctx.rendered;
  if (fmt == ContextFormat::RelevanceScore) {
    std::stable_sort(ctx.entries.begin(), ctx.entries.end(),
                     [](const ContextEntry& a, const ContextEntry& b) { return a.score > b.score; });
    out = "Electronic Health Record Context\nOrdered by Relevance Score (Highest to Lowest):";
    for (std::size_t i = 0; i < ctx.entries.size(); ++i)
      out += "\n" + std::to_string(i + 1) + ". Score: " + score_2dp(ctx.entries[i].score) + ", " + tail(ctx.entries[i]);
    return ctx;
  }

  std::stable_sort(ctx.entries.begin(), ctx.entries.end(), [](const ContextEntry& a, const ContextEntry& b) {
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    return a.fact_id < b.fact_id;
  });
  const bool relative = fmt == ContextFormat::RelativeTime;
  if (relative) {
    out = "Hospital Admission Start: " + render_relative(window.start, window.end) +
          "\nHospital Admission End: " + render_relative(window.end, window.end);
  } else {
    out = "Hospital Admission Start: " + format_timestamp(window.start) +
          "\nHospital Admission End: " + format_timestamp(window.end);
  }
  out += "\nElectronic Health Record Context\nOrdered by Time (Earliest to Latest):";
  for (std::size_t i = 0; i < ctx.entries.size(); ++i) {
    const auto& e = ctx.entries[i];
    out += "\n" + std::to_string(i + 1) + ". ";
    if (relative) {
      const Timestamp at = opts.anchor == RelativeAnchor::NoteDate ? start_of_day(e.timestamp) : e.timestamp;
      out += "When: " + render_relative(at, window.end) + ", ";
    } else {
      out += "Date: " + format_date(e.timestamp) + ", Time: " + format_time_of_day(e.timestamp) + ", ";
    }
    out += tail(e);
  }
  return ctx;
}

ReferenceContext format_context(const std::vector<index::SearchHit>& hits, const index::Snapshot& snapshot,
                                ContextFormat fmt, const AdmissionWindow& window, const FormatOptions& opts) {
  std::vector<Fact> used;
  for (const auto& h : hits) {
    const Fact* f = snapshot.find(h.fact_id);
    if (!f) throw FormatError("context hit does not resolve to a fact: " + h.fact_id);
    used.push_back(*f);
  }
  return format_context(hits, used, fmt, window, opts);
}

}  // namespace ehrcheck::judge
