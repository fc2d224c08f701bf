#include "ehrcheck/prompts.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ehrcheck/errors.hpp"

namespace ehrcheck {

// Generated from prompts/v1 at configure time.
namespace embedded {
extern const char* const kPromptTexts[kPromptCount];
extern const char* const kPromptVersion;
}  // namespace embedded

std::string_view prompt_file_stem(PromptId id) {
  static constexpr std::array<std::string_view, kPromptCount> stems{
      "writer_system",       "note_chunk_summary",  "combine_summaries",      "bhc_initial",
      "bhc_refine",          "bhc_compact",         "claim_system",           "claim_presence",
      "claim_extract",       "judge_system",        "judge_verdict",          "label_summary",
      "validity_system",     "validity_imperative", "validity_interrogative", "validity_incomplete",
      "validity_vague"};
  return stems[static_cast<std::size_t>(id)];
}

const PromptLibrary& PromptLibrary::builtin() {
  static const PromptLibrary lib = [] {
    PromptLibrary l;
    for (std::size_t i = 0; i < kPromptCount; ++i) l.templates_[i] = embedded::kPromptTexts[i];
    l.version_ = embedded::kPromptVersion;
    return l;
  }();
  return lib;
}

PromptLibrary PromptLibrary::from_directory(const std::filesystem::path& dir) {
  PromptLibrary l;
  for (std::size_t i = 0; i < kPromptCount; ++i) {
    const auto path = dir / (std::string(prompt_file_stem(static_cast<PromptId>(i))) + ".txt");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("missing prompt template: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string body = ss.str();
    if (!body.empty() && body.back() == '\n') body.pop_back();
    l.templates_[i] = std::move(body);
  }
  l.version_ = dir.filename().string();
  return l;
}

std::string render_template(std::string_view tmpl, const std::vector<std::pair<std::string, std::string>>& vars) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    const auto open = tmpl.find("{{", i);
    if (open == std::string_view::npos) {
      out.append(tmpl.substr(i));
      break;
    }
    const auto close = tmpl.find("}}", open + 2);
    if (close == std::string_view::npos) {
      out.append(tmpl.substr(i));
      break;
    }
    out.append(tmpl.substr(i, open - i));
    const std::string_view name = tmpl.substr(open + 2, close - open - 2);
    bool replaced = false;
    for (const auto& [k, v] : vars) {
      if (k == name) {
        out.append(v);
        replaced = true;
        break;
      }
    }
    if (!replaced) out.append(tmpl.substr(open, close + 2 - open));
    i = close + 2;
  }
  return out;
}

std::string json_escape(std::string_view s) {
  const std::string quoted = nlohmann::json(std::string(s)).dump();
  return quoted.substr(1, quoted.size() - 2);
}

}  // namespace ehrcheck
