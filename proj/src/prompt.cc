#include "batchqa/prompt.h"

#include <fstream>
#include <sstream>

#include "batchqa/error.h"

namespace batchqa {

namespace {

constexpr std::string_view kBuiltinV1 =
#include "prompt_template_v1.inc"
    ;

std::string normalize_line_endings(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\r') {
      out.push_back('\n');
      if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
    } else {
      out.push_back(text[i]);
    }
  }
  return out;
}

// One utterance or question per line: embedded line breaks become spaces.
void append_single_line(std::string& out, std::string_view text) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\r' || c == '\n') {
      out.push_back(' ');
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
    } else {
      out.push_back(c);
    }
  }
}

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  std::size_t count = 0;
  for (auto pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++count;
  }
  return count;
}

void replace_once(std::string& text, std::string_view placeholder,
                  const std::string& value) {
  const auto pos = text.find(placeholder);
  text.replace(pos, placeholder.size(), value);
}

}  // namespace

PromptTemplate::PromptTemplate(std::string text, std::string version)
    : text_(normalize_line_endings(text)), version_(std::move(version)) {
  for (auto placeholder : {kUtterancesPlaceholder, kQuestionsPlaceholder}) {
    if (count_occurrences(text_, placeholder) != 1) {
      throw Error(ErrorCode::kConfigError,
                  "prompt template must contain " + std::string(placeholder) +
                      " exactly once");
    }
  }
}

const PromptTemplate& PromptTemplate::builtin_v1() {
  static const PromptTemplate instance(std::string(kBuiltinV1), "v1");
  return instance;
}

PromptTemplate PromptTemplate::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open template " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return PromptTemplate(buffer.str(), path.filename().string());
}

RenderedPrompt render_prompt(const Transcript& transcript,
                             const QuestionGroup& group,
                             const RenderOptions& options) {
  if (group.transcript_id != transcript.id) {
    throw Error(ErrorCode::kMismatchedTranscript,
                "group is for '" + group.transcript_id + "', transcript is '" +
                    transcript.id + "'");
  }
  if (group.questions.empty()) {
    throw Error(ErrorCode::kMismatchedTranscript,
                "empty question group for '" + transcript.id + "'");
  }
  const PromptTemplate& tpl = options.prompt_template != nullptr
                                  ? *options.prompt_template
                                  : PromptTemplate::builtin_v1();

  std::string utterances;
  for (const auto& u : transcript.utterances) {
    if (!utterances.empty()) utterances.push_back('\n');
    utterances += "Utterance ";
    utterances += std::to_string(u.index);
    if (options.include_speaker && u.speaker) {
      utterances += " (";
      utterances += to_string(*u.speaker);
      utterances += ")";
    }
    utterances += ": ";
    append_single_line(utterances, u.text);
  }

  std::string questions;
  for (std::size_t i = 0; i < group.questions.size(); ++i) {
    if (i > 0) questions.push_back('\n');
    questions += "Question ";
    questions += std::to_string(i + 1);
    questions += ": ";
    append_single_line(questions, group.questions[i].text);
  }

  // Substitute the later placeholder first so the earlier offset stays valid
  // and placeholder-looking text inside utterances is never re-expanded.
  std::string text = tpl.text();
  const auto u_pos = text.find(kUtterancesPlaceholder);
  const auto q_pos = text.find(kQuestionsPlaceholder);
  if (u_pos < q_pos) {
    replace_once(text, kQuestionsPlaceholder, questions);
    replace_once(text, kUtterancesPlaceholder, utterances);
  } else {
    replace_once(text, kUtterancesPlaceholder, utterances);
    replace_once(text, kQuestionsPlaceholder, questions);
  }

  if (options.max_chars > 0 && text.size() > options.max_chars) {
    throw Error(ErrorCode::kPromptTooLong,
                "prompt for '" + transcript.id + "' is " +
                    std::to_string(text.size()) + " chars, limit " +
                    std::to_string(options.max_chars));
  }

  RenderedPrompt prompt;
  prompt.text = std::move(text);
  prompt.transcript_id = transcript.id;
  prompt.question_ids = group.question_ids();
  prompt.n = group.n();
  prompt.m = transcript.m();
  return prompt;
}

}  // namespace batchqa
