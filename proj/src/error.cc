#include "batchqa/error.h"

namespace batchqa {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedRecord: return "MalformedRecord";
    case ErrorCode::kDanglingReference: return "DanglingReference";
    case ErrorCode::kNonContiguousIndices: return "NonContiguousIndices";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kInsufficientQuestions: return "InsufficientQuestions";
    case ErrorCode::kMismatchedTranscript: return "MismatchedTranscript";
    case ErrorCode::kPromptTooLong: return "PromptTooLong";
    case ErrorCode::kAuthError: return "AuthError";
    case ErrorCode::kTransportError: return "TransportError";
    case ErrorCode::kBadRequest: return "BadRequest";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kAlignmentError: return "AlignmentError";
    case ErrorCode::kCorruptArchive: return "CorruptArchive";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kConfigError: return "ConfigError";
  }
  return "Unknown";
}

bool is_corpus_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedRecord:
    case ErrorCode::kDanglingReference:
    case ErrorCode::kNonContiguousIndices:
    case ErrorCode::kEmptyCorpus:
    case ErrorCode::kInsufficientQuestions:
      return true;
    default:
      return false;
  }
}

}  // namespace batchqa
