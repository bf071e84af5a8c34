#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "batchqa/types.h"

namespace batchqa {

struct ParsedAnswer {
  int position = 0;  // 1-based, "Q{position}"
  Judgment judgment = Judgment::kNo;
  std::string justification;
  // Index or NA. Unanswered when the navigation element was invalid (the
  // judgment is still kept and an InvalidNavigation anomaly is recorded).
  NavLabel navigation = NavLabel::na();
};

enum class AnomalyKind {
  kMissingKey,
  kExtraKey,
  kInvalidJudgment,
  kInvalidNavigation,
  kWrongArity,
};

std::string_view to_string(AnomalyKind kind);

struct AnswerAnomaly {
  AnomalyKind kind;
  int position = 0;  // 0 for kExtraKey
  std::string key;   // raw key for kExtraKey

  friend bool operator==(const AnswerAnomaly&, const AnswerAnomaly&) = default;
};

enum class ParseStatus { kOk, kDecodeError };
enum class DecodeErrorClass { kNoJsonFound, kJsonSyntax, kWrongShape };

std::string_view to_string(ParseStatus status);
std::string_view to_string(DecodeErrorClass error_class);

struct ParseOutcome {
  ParseStatus status = ParseStatus::kOk;
  std::map<int, ParsedAnswer> answers;
  std::vector<AnswerAnomaly> anomalies;
  std::optional<DecodeErrorClass> error_class;
  std::string detail;  // human-readable reason for decode errors

  bool ok() const { return status == ParseStatus::kOk; }
};

// Strict: the extracted region must be RFC 8259 JSON. Lenient additionally
// repairs smart quotes, single quotes, bare keys, trailing commas and
// unterminated tails before giving up. Evaluation always uses strict.
enum class ParseMode { kStrict, kLenient };

std::string_view to_string(ParseMode mode);
std::optional<ParseMode> parse_mode_from_string(std::string_view text);

// First maximal balanced {...} region of the text (string-literal aware).
// Among several top-level regions the first one that is valid JSON wins;
// when none is valid the first region is returned so the caller reports the
// syntax error. nullopt when no balanced region exists.
std::optional<std::string> extract_json(std::string_view raw_text);

// Total: never throws for any input. n must be >= 1 (n < 1 yields a
// WrongShape decode error).
ParseOutcome parse_response(std::string_view raw_text, int n,
                            ParseMode mode = ParseMode::kStrict);

// Fraction of outcomes with status kDecodeError. Throws kEmptyInput.
double decode_error_rate(std::span<const ParseOutcome> outcomes);

struct CanonicalAnswer {
  Judgment judgment = Judgment::kNo;
  std::string justification;  // optional text after "Yes"/"No"
  NavLabel navigation = NavLabel::na();
};

// {"Q1":["Yes, ...","5"],"Q2":["No","NA"]} with keys in ascending order,
// compact, UTF-8. The navigation must be an index or NA.
std::string serialize_canonical(std::span<const CanonicalAnswer> answers);

}  // namespace batchqa
