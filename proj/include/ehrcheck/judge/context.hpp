#pragma once

#include <string>
#include <vector>

#include "ehrcheck/domain.hpp"
#include "ehrcheck/index/fact_index.hpp"

namespace ehrcheck::judge {

// How relative times are measured for fact lines. The header (admission
// start) always uses the full timestamp.
enum class RelativeAnchor {
  NoteDate,   // midnight of the note's calendar date
  Timestamp,  // the note's full timestamp
};

struct FormatOptions {
  RelativeAnchor anchor = RelativeAnchor::NoteDate;
};

struct ContextEntry {
  std::string fact_id;
  double score = 0.0;
  Timestamp timestamp{};
  std::string category;
  std::string description;
  std::string text;
};

struct ReferenceContext {
  ContextFormat format = ContextFormat::RelevanceScore;
  std::string rendered;
  std::vector<ContextEntry> entries;  // in rendered order
};

// Renders the reference context block shown to the judge:
//   RelevanceScore  score desc, "1. Score: 0.83, Note Category: ..."
//   AbsoluteTime    admission header, chronological, "1. Date: ..., Time: ..."
//   RelativeTime    as AbsoluteTime with times as "D days H hours ago"
//                   relative to the admission end ("Now").
// Chronological order is (timestamp, fact_id). No trailing newline.
// FormatError when a hit does not resolve or lacks category/description.
ReferenceContext format_context(const std::vector<index::SearchHit>& hits, const std::vector<Fact>& facts,
                                ContextFormat fmt, const AdmissionWindow& window, const FormatOptions& opts = {});
ReferenceContext format_context(const std::vector<index::SearchHit>& hits, const index::Snapshot& snapshot,
                                ContextFormat fmt, const AdmissionWindow& window, const FormatOptions& opts = {});

// "D days H hours ago" with the duration floored to whole hours; "Now" at
// zero; "D days H hours from now" for times after `now`.
std::string render_relative(Timestamp t, Timestamp now);

}  // namespace ehrcheck::judge
