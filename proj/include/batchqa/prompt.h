#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "batchqa/corpus.h"
#include "batchqa/grouping.h"

namespace batchqa {

inline constexpr std::string_view kUtterancesPlaceholder = "{{UTTERANCES}}";
inline constexpr std::string_view kQuestionsPlaceholder = "{{QUESTIONS}}";

// Instruction template with one {{UTTERANCES}} and one {{QUESTIONS}}
// placeholder. Line endings are normalized to "\n" on construction.
class PromptTemplate {
 public:
  explicit PromptTemplate(std::string text, std::string version = "custom");

  // The v1 template shipped in assets/prompt_template_v1.txt, compiled in.
  static const PromptTemplate& builtin_v1();
  static PromptTemplate from_file(const std::filesystem::path& path);

  const std::string& text() const { return text_; }
  const std::string& version() const { return version_; }

 private:
  std::string text_;
  std::string version_;
};

struct RenderOptions {
  // "Utterance k (agent): ..." when the utterance carries a speaker.
  bool include_speaker = false;
  // 0 disables the guard; otherwise longer prompts raise kPromptTooLong.
  std::size_t max_chars = 0;
  const PromptTemplate* prompt_template = nullptr;  // nullptr -> builtin v1
};

struct RenderedPrompt {
  std::string text;
  std::string transcript_id;
  std::vector<std::string> question_ids;
  int n = 0;
  int m = 0;
};

RenderedPrompt render_prompt(const Transcript& transcript,
                             const QuestionGroup& group,
                             const RenderOptions& options = {});

}  // namespace batchqa
