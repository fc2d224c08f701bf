#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ehrcheck {

enum class PromptId {
  WriterSystem,
  NoteChunkSummary,
  CombineSummaries,
  BhcInitial,
  BhcRefine,
  BhcCompact,
  ClaimSystem,
  ClaimPresence,
  ClaimExtract,
  JudgeSystem,
  JudgeVerdict,
  LabelSummary,
  ValiditySystem,
  ValidityImperative,
  ValidityInterrogative,
  ValidityIncomplete,
  ValidityVague,
};

inline constexpr std::size_t kPromptCount = 17;

// File stem of each template, e.g. "judge_verdict" -> judge_verdict.txt.
std::string_view prompt_file_stem(PromptId id);

// Versioned template set. The builtin set is compiled in from prompts/v1;
// a directory with the same file names can replace it wholesale.
class PromptLibrary {
public:
  static const PromptLibrary& builtin();
  static PromptLibrary from_directory(const std::filesystem::path& dir);

  const std::string& get(PromptId id) const { return templates_[static_cast<std::size_t>(id)]; }
  const std::string& version() const { return version_; }

private:
  std::array<std::string, kPromptCount> templates_;
  std::string version_;
};

// Replaces each "{{name}}" with its value. Unknown placeholders are left as-is.
std::string render_template(std::string_view tmpl, const std::vector<std::pair<std::string, std::string>>& vars);

// Escapes for inclusion inside a JSON string literal (no surrounding quotes).
std::string json_escape(std::string_view s);

}  // namespace ehrcheck
