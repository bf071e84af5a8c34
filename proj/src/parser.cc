#include "batchqa/parser.h"

#include <algorithm>
#include <cctype>
#include <limits>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "batchqa/error.h"

namespace batchqa {

namespace {

using nlohmann::ordered_json;

bool is_ascii_alpha(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}
bool is_ascii_digit(unsigned char c) { return c >= '0' && c <= '9'; }
bool is_ascii_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_ascii_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_ascii_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// End offset (inclusive) of the '{' at `open`, skipping string literals.
std::optional<std::size_t> matching_brace(std::string_view text, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t k = open; k < text.size(); ++k) {
    const char c = text[k];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return k;
    }
  }
  return std::nullopt;
}

std::vector<std::string_view> balanced_regions(std::string_view text) {
  std::vector<std::string_view> regions;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '{') {
      ++i;
      continue;
    }
    if (auto end = matching_brace(text, i)) {
      regions.push_back(text.substr(i, *end - i + 1));
      i = *end + 1;
    } else {
      ++i;
    }
  }
  return regions;
}

// Position encoded by an answer key: "Q7", "q7" or "7". Anything else
// (including "Q", "Q-1", "Q 1") is not an answer key.
std::optional<long long> key_position(std::string_view key) {
  key = trim(key);
  if (!key.empty() && (key.front() == 'Q' || key.front() == 'q')) key.remove_prefix(1);
  if (key.empty() || key.size() > 9) return std::nullopt;
  long long value = 0;
  for (unsigned char c : key) {
    if (!is_ascii_digit(c)) return std::nullopt;
    value = value * 10 + (c - '0');
  }
  return value;
}

struct JudgmentParse {
  Judgment judgment;
  std::string justification;
};

std::optional<JudgmentParse> parse_judgment(const ordered_json& value) {
  if (!value.is_string()) return std::nullopt;
  const auto& text = value.get_ref<const std::string&>();
  std::size_t start = 0;
  while (start < text.size() && !is_ascii_alpha(text[start])) ++start;
  std::size_t end = start;
  while (end < text.size() && is_ascii_alpha(text[end])) ++end;
  const std::string token = lower(std::string_view(text).substr(start, end - start));
  JudgmentParse parsed;
  if (token == "yes") {
    parsed.judgment = Judgment::kYes;
  } else if (token == "no") {
    parsed.judgment = Judgment::kNo;
  } else {
    return std::nullopt;
  }
  std::size_t rest = end;
  while (rest < text.size() &&
         (is_ascii_space(text[rest]) ||
          std::ispunct(static_cast<unsigned char>(text[rest])))) {
    ++rest;
  }
  parsed.justification = std::string(trim(std::string_view(text).substr(rest)));
  return parsed;
}

std::optional<NavLabel> parse_navigation(const ordered_json& value) {
  if (value.is_number_unsigned()) {
    const auto v = value.get<std::uint64_t>();
    if (v >= 1 && v <= static_cast<std::uint64_t>(std::numeric_limits<int>::max())) {
      return NavLabel::index(static_cast<int>(v));
    }
    return std::nullopt;
  }
  if (value.is_number_integer()) {
    const auto v = value.get<std::int64_t>();
    if (v >= 1 && v <= std::numeric_limits<int>::max()) {
      return NavLabel::index(static_cast<int>(v));
    }
    return std::nullopt;
  }
  if (!value.is_string()) return std::nullopt;
  const std::string_view text = trim(value.get_ref<const std::string&>());
  if (lower(text) == "na") return NavLabel::na();
  if (text.empty() || text.size() > 10) return std::nullopt;
  long long v = 0;
  for (unsigned char c : text) {
    if (!is_ascii_digit(c)) return std::nullopt;
    v = v * 10 + (c - '0');
  }
  if (v < 1 || v > std::numeric_limits<int>::max()) return std::nullopt;
  return NavLabel::index(static_cast<int>(v));
}

ParseOutcome decode_error(DecodeErrorClass error_class, std::string detail) {
  ParseOutcome outcome;
  outcome.status = ParseStatus::kDecodeError;
  outcome.error_class = error_class;
  outcome.detail = std::move(detail);
  return outcome;
}

// Best-effort repair used only in lenient mode: smart quotes, single-quoted
// strings, bare keys, trailing commas and an unterminated tail.
std::string repair_json(std::string_view text) {
  std::string src;
  src.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (i + 2 < text.size() && static_cast<unsigned char>(text[i]) == 0xE2 &&
        static_cast<unsigned char>(text[i + 1]) == 0x80) {
      const auto third = static_cast<unsigned char>(text[i + 2]);
      if (third == 0x9C || third == 0x9D) {
        src.push_back('"');
        i += 2;
        continue;
      }
      if (third == 0x98 || third == 0x99) {
        src.push_back('\'');
        i += 2;
        continue;
      }
    }
    src.push_back(text[i]);
  }

  std::string out;
  out.reserve(src.size() + 16);
  std::vector<char> closers;
  char quote = 0;  // active string delimiter, 0 outside strings
  bool escaped = false;
  bool expect_key = false;

  auto drop_trailing_comma = [&out]() {
    std::size_t k = out.size();
    while (k > 0 && is_ascii_space(out[k - 1])) --k;
    if (k > 0 && out[k - 1] == ',') out.erase(k - 1, 1);
  };

  for (std::size_t i = 0; i < src.size(); ++i) {
    const char c = src[i];
    if (quote != 0) {
      if (escaped) {
        escaped = false;
        if (quote == '\'' && c == '\'') {
          out.back() = '\'';  // \' -> '
          continue;
        }
        out.push_back(c);
      } else if (c == '\\') {
        escaped = true;
        out.push_back(c);
      } else if (c == quote) {
        quote = 0;
        out.push_back('"');
      } else if (c == '"' && quote == '\'') {
        out += "\\\"";
      } else {
        out.push_back(c);
      }
      continue;
    }
    if (c == '"' || c == '\'') {
      quote = c;
      expect_key = false;
      out.push_back('"');
      continue;
    }
    if (c == '{' || c == '[') {
      closers.push_back(c == '{' ? '}' : ']');
      expect_key = (c == '{');
      out.push_back(c);
      continue;
    }
    if (c == '}' || c == ']') {
      drop_trailing_comma();
      if (!closers.empty()) closers.pop_back();
      expect_key = false;
      out.push_back(c);
      continue;
    }
    if (c == ',') {
      expect_key = !closers.empty() && closers.back() == '}';
      out.push_back(c);
      continue;
    }
    if (expect_key && (is_ascii_alpha(c) || is_ascii_digit(c) || c == '_')) {
      std::size_t j = i;
      while (j < src.size() &&
             (is_ascii_alpha(src[j]) || is_ascii_digit(src[j]) || src[j] == '_')) {
        ++j;
      }
      std::size_t k = j;
      while (k < src.size() && is_ascii_space(src[k])) ++k;
      if (k < src.size() && src[k] == ':') {
        out.push_back('"');
        out.append(src, i, j - i);
        out.push_back('"');
        i = j - 1;
        expect_key = false;
        continue;
      }
    }
    if (!is_ascii_space(c)) expect_key = false;
    out.push_back(c);
  }

  if (quote != 0) {
    if (escaped) out.pop_back();
    out.push_back('"');
  }
  if (!closers.empty()) {
    std::size_t k = out.size();
    while (k > 0 && is_ascii_space(out[k - 1])) --k;
    if (k > 0 && out[k - 1] == ':') out += " null";
    drop_trailing_comma();
    while (!closers.empty()) {
      out.push_back(closers.back());
      closers.pop_back();
    }
  }
  return out;
}

ParseOutcome parse_impl(std::string_view raw_text, int n, ParseMode mode) {
  if (n < 1) {
    return decode_error(DecodeErrorClass::kWrongShape,
                        "group size must be >= 1");
  }

  auto region = extract_json(raw_text);
  ordered_json doc = ordered_json::parse(region ? *region : std::string(), nullptr,
                                         /*allow_exceptions=*/false);
  if (mode == ParseMode::kLenient && doc.is_discarded()) {
    std::string_view candidate;
    if (region) {
      candidate = *region;
    } else if (auto open = raw_text.find('{'); open != std::string_view::npos) {
      candidate = raw_text.substr(open);
    }
    if (!candidate.empty()) {
      doc = ordered_json::parse(repair_json(candidate), nullptr, false);
    }
  }
  if (doc.is_discarded()) {
    if (!region && (mode == ParseMode::kStrict ||
                    raw_text.find('{') == std::string_view::npos)) {
      return decode_error(DecodeErrorClass::kNoJsonFound,
                          "no balanced JSON object in response");
    }
    return decode_error(DecodeErrorClass::kJsonSyntax,
                        "extracted object is not valid JSON");
  }
  if (!doc.is_object()) {
    return decode_error(DecodeErrorClass::kWrongShape, "top level is not an object");
  }

  ParseOutcome outcome;
  std::vector<bool> seen(static_cast<std::size_t>(n) + 1, false);
  bool any_answer_key = false;
  for (const auto& [key, value] : doc.items()) {
    const auto position = key_position(key);
    if (position) any_answer_key = true;
    if (!position || *position < 1 || *position > n || seen[*position]) {
      outcome.anomalies.push_back({AnomalyKind::kExtraKey, 0, key});
      continue;
    }
    const int i = static_cast<int>(*position);
    seen[i] = true;
    if (!value.is_array() || value.size() != 2) {
      outcome.anomalies.push_back({AnomalyKind::kWrongArity, i, {}});
      continue;
    }
    auto judgment = parse_judgment(value[0]);
    if (!judgment) {
      outcome.anomalies.push_back({AnomalyKind::kInvalidJudgment, i, {}});
      continue;
    }
    ParsedAnswer answer;
    answer.position = i;
    answer.judgment = judgment->judgment;
    answer.justification = std::move(judgment->justification);
    if (auto nav = parse_navigation(value[1])) {
      answer.navigation = *nav;
    } else {
      answer.navigation = NavLabel::unanswered();
      outcome.anomalies.push_back({AnomalyKind::kInvalidNavigation, i, {}});
    }
    outcome.answers.emplace(i, std::move(answer));
  }
  if (!any_answer_key) {
    return decode_error(DecodeErrorClass::kWrongShape,
                        "object has no question keys");
  }
  for (int i = 1; i <= n; ++i) {
    if (!seen[i]) outcome.anomalies.push_back({AnomalyKind::kMissingKey, i, {}});
  }
  return outcome;
}

}  // namespace

std::string_view to_string(AnomalyKind kind) {
  switch (kind) {
    case AnomalyKind::kMissingKey: return "MissingKey";
    case AnomalyKind::kExtraKey: return "ExtraKey";
    case AnomalyKind::kInvalidJudgment: return "InvalidJudgment";
    case AnomalyKind::kInvalidNavigation: return "InvalidNavigation";
    case AnomalyKind::kWrongArity: return "WrongArity";
  }
  return "Unknown";
}

std::string_view to_string(ParseStatus status) {
  return status == ParseStatus::kOk ? "Ok" : "DecodeError";
}

std::string_view to_string(DecodeErrorClass error_class) {
  switch (error_class) {
    case DecodeErrorClass::kNoJsonFound: return "NoJsonFound";
    case DecodeErrorClass::kJsonSyntax: return "JsonSyntax";
    case DecodeErrorClass::kWrongShape: return "WrongShape";
  }
  return "Unknown";
}

std::string_view to_string(ParseMode mode) {
  return mode == ParseMode::kStrict ? "strict" : "lenient";
}

std::optional<ParseMode> parse_mode_from_string(std::string_view text) {
  if (text == "strict") return ParseMode::kStrict;
  if (text == "lenient") return ParseMode::kLenient;
  return std::nullopt;
}

std::optional<std::string> extract_json(std::string_view raw_text) {
  const auto regions = balanced_regions(raw_text);
  if (regions.empty()) return std::nullopt;
  for (auto region : regions) {
    if (ordered_json::accept(region)) return std::string(region);
  }
  return std::string(regions.front());
}

ParseOutcome parse_response(std::string_view raw_text, int n, ParseMode mode) {
  try {
    return parse_impl(raw_text, n, mode);
  } catch (const std::exception& e) {
    // Not expected; keeps the parser total for arbitrary bytes.
    return decode_error(DecodeErrorClass::kJsonSyntax, e.what());
  }
}

double decode_error_rate(std::span<const ParseOutcome> outcomes) {
  if (outcomes.empty()) throw Error(ErrorCode::kEmptyInput, "no parse outcomes");
  const auto failures = std::count_if(
      outcomes.begin(), outcomes.end(),
      [](const ParseOutcome& o) { return o.status == ParseStatus::kDecodeError; });
  return static_cast<double>(failures) / static_cast<double>(outcomes.size());
}

std::string serialize_canonical(std::span<const CanonicalAnswer> answers) {
  ordered_json object = ordered_json::object();
  for (std::size_t i = 0; i < answers.size(); ++i) {
    const auto& a = answers[i];
    if (a.navigation.is_unanswered()) {
      throw std::invalid_argument("canonical answers need an index or NA");
    }
    std::string judgment(to_string(a.judgment));
    if (!a.justification.empty()) judgment += ", " + a.justification;
    object["Q" + std::to_string(i + 1)] =
        ordered_json::array({std::move(judgment), a.navigation.to_string()});
  }
  return object.dump(-1, ' ', false, ordered_json::error_handler_t::replace);
}

}  // namespace batchqa
