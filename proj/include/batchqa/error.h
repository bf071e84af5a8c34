#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace batchqa {

enum class ErrorCode {
  kMalformedRecord,
  kDanglingReference,
  kNonContiguousIndices,
  kEmptyCorpus,
  kInsufficientQuestions,
  kMismatchedTranscript,
  kPromptTooLong,
  kAuthError,
  kTransportError,
  kBadRequest,
  kEmptyInput,
  kAlignmentError,
  kCorruptArchive,
  kIoError,
  kConfigError,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  // Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

// True for the error codes that mean "the corpus files are invalid".
bool is_corpus_error(ErrorCode code);

}  // namespace batchqa
