#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace vlcot::gen {

// Named slots: {question}, {caption}, {k}. render() throws UsageError when a
// slot declared in the template has no binding.
std::string render_template(const std::string& tmpl,
                            const std::map<std::string, std::string>& slots);

// The seven prompt templates the pipeline uses. The embedded defaults are
// authored for this project (see README); override any of them by pointing
// load_from_dir at a directory of "<name>.txt" files.
struct PromptTemplateSet {
  std::string cot_gen;
  std::string caption_gen;
  std::string question_gen;
  std::string distractor_rewrite;
  std::string difficulty_rate;
  std::string blind_solve;
  std::string caption_only_solve;

  static PromptTemplateSet defaults();
  static PromptTemplateSet load_from_dir(const std::filesystem::path& dir);

  const std::string& by_id(const std::string& template_id) const;
};

// Instruction appended to every answer-producing prompt so completions are
// scorable by the rule-based verifier.
inline constexpr const char* kBoxedAnswerInstruction =
    "Your final answer MUST BE put in \\boxed{}.";

}  // namespace vlcot::gen
