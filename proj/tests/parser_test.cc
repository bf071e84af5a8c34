#include "batchqa/parser.h"

#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "batchqa/error.h"

namespace batchqa {
namespace {

const char* kExampleObject = R"({
    "Q1": ["Yes, the agent verified customer's information at the start of the call", "5"],
    "Q2": ["No, the agent did not send a copy to the customer.", "NA"]
})";

bool has_anomaly(const ParseOutcome& o, AnomalyKind kind, int position) {
  for (const auto& a : o.anomalies) {
    if (a.kind == kind && a.position == position) return true;
  }
  return false;
}

void expect_decode_error(const ParseOutcome& o, DecodeErrorClass error_class) {
  EXPECT_EQ(o.status, ParseStatus::kDecodeError);
  ASSERT_TRUE(o.error_class.has_value());
  EXPECT_EQ(*o.error_class, error_class);
  EXPECT_TRUE(o.answers.empty());
}

TEST(ExtractJson, StripsFencesAndProse) {
  EXPECT_EQ(extract_json("Here you go:\n```json\n{\"Q1\": [\"Yes ...\", \"3\"]}\n```"),
            std::optional<std::string>("{\"Q1\": [\"Yes ...\", \"3\"]}"));
  EXPECT_EQ(extract_json(R"({"Q1": ["Yes, ok", "5"])"), std::nullopt);
  EXPECT_EQ(extract_json("no braces at all"), std::nullopt);
  EXPECT_EQ(extract_json(R"({"a": "}{"})"), std::optional<std::string>(R"({"a": "}{"})"));
}

// Independent oracle: every top-level balanced region found by counting
// braces outside string literals, scanned left to right.
std::vector<std::string> oracle_regions(const std::string& text) {
  std::vector<std::string> out;
  for (std::size_t start = 0; start < text.size(); ++start) {
    if (text[start] != '{') continue;
    int depth = 0;
    bool str = false;
    for (std::size_t k = start; k < text.size(); ++k) {
      const char c = text[k];
      if (str) {
        if (c == '\\') ++k;
        else if (c == '"') str = false;
      } else if (c == '"') {
        str = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}' && --depth == 0) {
        out.push_back(text.substr(start, k - start + 1));
        start = k;
        break;
      }
    }
  }
  return out;
}

TEST(ExtractJson, FirstOfTwoObjects) {
  const std::string a = R"({"Q1": ["Yes", "2"]})";
  const std::string b = R"({"Q1": ["No", "NA"], "Q2": ["Yes", "4"]})";
  const std::string text = "first " + a + " then " + b + " done";
  const auto regions = oracle_regions(text);
  ASSERT_EQ(regions.size(), 2u);
  EXPECT_EQ(extract_json(text), regions[0]);
  EXPECT_EQ(extract_json(text), a);

  std::mt19937 gen(5);
  const std::vector<std::string> pieces = {"{", "}", "\"", "x", " ", "{\"k\":1}", "\\", "\"}\""};
  for (int trial = 0; trial < 2000; ++trial) {
    std::string s;
    for (int k = 0; k < 12; ++k) s += pieces[gen() % pieces.size()];
    const auto expected = oracle_regions(s);
    const auto got = extract_json(s);
    if (expected.empty()) {
      EXPECT_FALSE(got.has_value()) << s;
      continue;
    }
    ASSERT_TRUE(got.has_value()) << s;
    bool matches_some = false;
    for (const auto& r : expected) matches_some |= (r == *got);
    EXPECT_TRUE(matches_some) << s;
  }
}

TEST(ParseResponse, ExampleObject) {
  const auto o = parse_response(kExampleObject, 2);
  ASSERT_TRUE(o.ok());
  EXPECT_TRUE(o.anomalies.empty());
  ASSERT_EQ(o.answers.size(), 2u);
  EXPECT_EQ(o.answers.at(1).judgment, Judgment::kYes);
  EXPECT_EQ(o.answers.at(1).navigation, NavLabel::index(5));
  EXPECT_EQ(o.answers.at(1).justification,
            "the agent verified customer's information at the start of the call");
  EXPECT_EQ(o.answers.at(2).judgment, Judgment::kNo);
  EXPECT_EQ(o.answers.at(2).navigation, NavLabel::na());
}

TEST(ParseResponse, InvalidJudgment) {
  const auto o = parse_response(R"({"Q1": ["Maybe", "3"]})", 1);
  ASSERT_TRUE(o.ok());
  EXPECT_TRUE(o.answers.empty());
  EXPECT_TRUE(has_anomaly(o, AnomalyKind::kInvalidJudgment, 1));
  EXPECT_TRUE(has_anomaly(parse_response(R"({"Q1": ["Yesterday", "3"]})", 1),
                          AnomalyKind::kInvalidJudgment, 1));
  EXPECT_TRUE(has_anomaly(parse_response(R"({"Q1": [true, "3"]})", 1),
                          AnomalyKind::kInvalidJudgment, 1));
}

TEST(ParseResponse, KeyNormalization) {
  for (const char* key : {"Q2", "q2", "2", " Q2 "}) {
    const std::string text = std::string(R"({")") + key + R"(": ["no extra help needed", "NA"]})";
    const auto o = parse_response(text, 2);
    ASSERT_TRUE(o.ok()) << key;
    EXPECT_TRUE(has_anomaly(o, AnomalyKind::kMissingKey, 1)) << key;
    ASSERT_EQ(o.answers.count(2), 1u) << key;
    EXPECT_EQ(o.answers.at(2).judgment, Judgment::kNo);
    EXPECT_EQ(o.answers.at(2).navigation, NavLabel::na());
    EXPECT_EQ(o.answers.at(2).justification, "extra help needed");
  }
}

TEST(ParseResponse, TrailingCommaIsStrictSyntaxError) {
  expect_decode_error(parse_response(R"({"Q1": ["Yes", "5",]})", 1), DecodeErrorClass::kJsonSyntax);
  const auto lenient = parse_response(R"({"Q1": ["Yes", "5",]})", 1, ParseMode::kLenient);
  ASSERT_TRUE(lenient.ok());
  EXPECT_EQ(lenient.answers.at(1).navigation, NavLabel::index(5));
}

TEST(ParseResponse, ErrorClasses) {
  expect_decode_error(parse_response("I cannot answer that.", 3), DecodeErrorClass::kNoJsonFound);
  expect_decode_error(parse_response(R"({"Q1": ["Yes, ok", "5"])", 1), DecodeErrorClass::kNoJsonFound);
  expect_decode_error(parse_response(R"({'Q1': ['Yes', '5']})", 1), DecodeErrorClass::kJsonSyntax);
  expect_decode_error(parse_response(R"({"answer": "yes"})", 1), DecodeErrorClass::kWrongShape);
  expect_decode_error(parse_response(R"({"Answer1": ["Yes", "1"]})", 1), DecodeErrorClass::kWrongShape);
  expect_decode_error(parse_response(kExampleObject, 0), DecodeErrorClass::kWrongShape);
}

TEST(ParseResponse, ValueAnomalies) {
  const auto o = parse_response(
      R"({"Q1": ["Yes"], "Q2": "No", "Q3": ["Yes, here", "0"], "Q4": ["yes - clearly", 7],)"
      R"( "Q5": ["No", "n/a"], "Q6": ["No.", "na"], "Q9": ["Yes", "1"], "Q4 ": ["No", "NA"], "note": 1})",
      6);
  ASSERT_TRUE(o.ok());
  EXPECT_TRUE(has_anomaly(o, AnomalyKind::kWrongArity, 1));
  EXPECT_TRUE(has_anomaly(o, AnomalyKind::kWrongArity, 2));
  EXPECT_TRUE(has_anomaly(o, AnomalyKind::kInvalidNavigation, 3));
  EXPECT_EQ(o.answers.at(3).navigation, NavLabel::unanswered());
  EXPECT_EQ(o.answers.at(3).justification, "here");
  EXPECT_EQ(o.answers.at(4).navigation, NavLabel::index(7));
  EXPECT_EQ(o.answers.at(4).justification, "clearly");
  EXPECT_TRUE(has_anomaly(o, AnomalyKind::kInvalidNavigation, 5));
  EXPECT_EQ(o.answers.at(6).navigation, NavLabel::na());
  int extra = 0;
  for (const auto& a : o.anomalies) extra += a.kind == AnomalyKind::kExtraKey;
  EXPECT_EQ(extra, 3);  // Q9 out of range, duplicate Q4, "note"
  EXPECT_EQ(o.answers.size(), 4u);
}

TEST(ParseResponse, LenientRepairs) {
  const std::string smart = "{\xE2\x80\x9CQ1\xE2\x80\x9D: [\xE2\x80\x9CYes\xE2\x80\x9D, \xE2\x80\x9C" "2\xE2\x80\x9D]}";
  expect_decode_error(parse_response(smart, 1), DecodeErrorClass::kJsonSyntax);
  struct Case {
    std::string text;
    int n;
  };
  const std::vector<Case> cases = {
      {smart, 1},
      {R"({'Q1': ['Yes, it\'s "fine"', '2']})", 1},
      {R"({Q1: ["Yes", "2"], Q2: ["No", "NA"],})", 2},
      {R"(Sure! {"Q1": ["Yes", "2"], "Q2": ["No", "N)", 2},
      {R"({"Q1": ["Yes", "2"], "Q2":)", 2},
  };
  for (const auto& c : cases) {
    const auto o = parse_response(c.text, c.n, ParseMode::kLenient);
    ASSERT_TRUE(o.ok()) << c.text << ": " << o.detail;
    EXPECT_EQ(o.answers.at(1).judgment, Judgment::kYes) << c.text;
    EXPECT_EQ(o.answers.at(1).navigation, NavLabel::index(2)) << c.text;
  }
  expect_decode_error(parse_response("nothing here", 1, ParseMode::kLenient),
                      DecodeErrorClass::kNoJsonFound);
  EXPECT_EQ(parse_mode_from_string("lenient"), ParseMode::kLenient);
  EXPECT_EQ(parse_mode_from_string("loose"), std::nullopt);
}

std::vector<CanonicalAnswer> random_answers(std::mt19937& gen, int n) {
  std::vector<CanonicalAnswer> answers(n);
  for (auto& a : answers) {
    if (gen() % 2) {
      a.judgment = Judgment::kYes;
      a.navigation = NavLabel::index(1 + static_cast<int>(gen() % 60));
    }
    if (gen() % 3 == 0) a.justification = "because of \"quoted\" text, commas: and {braces}";
  }
  return answers;
}

TEST(Canonical, FormatAndRoundTrip) {
  const std::vector<CanonicalAnswer> two = {{Judgment::kYes, "", NavLabel::index(5)},
                                            {Judgment::kNo, "", NavLabel::na()}};
  EXPECT_EQ(serialize_canonical(two), R"({"Q1":["Yes","5"],"Q2":["No","NA"]})");
  const std::vector<CanonicalAnswer> justified = {{Judgment::kYes, "greeted", NavLabel::index(1)}};
  EXPECT_EQ(serialize_canonical(justified), R"({"Q1":["Yes, greeted","1"]})");

  std::mt19937 gen(21);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + static_cast<int>(gen() % 50);
    const auto answers = random_answers(gen, n);
    const auto o = parse_response(serialize_canonical(answers), n);
    ASSERT_TRUE(o.ok());
    ASSERT_TRUE(o.anomalies.empty());
    ASSERT_EQ(o.answers.size(), static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) {
      EXPECT_EQ(o.answers.at(i).judgment, answers[i - 1].judgment);
      EXPECT_EQ(o.answers.at(i).navigation, answers[i - 1].navigation);
      EXPECT_EQ(o.answers.at(i).justification, answers[i - 1].justification);
    }
  }
  const std::vector<CanonicalAnswer> bad = {{Judgment::kYes, "", NavLabel::unanswered()}};
  EXPECT_THROW(serialize_canonical(bad), std::invalid_argument);
}

TEST(ParseResponse, ProseAroundObjectDoesNotChangeAnswers) {
  std::mt19937 gen(77);
  const std::vector<std::string> prose = {
      "", "Sure, here are the answers:\n", "```json\n", "\n```", "Note: Q1 was tricky.",
      "Let me know if you need anything else!", "[1, 2, 3]", "\"quoted\" words"};
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + static_cast<int>(gen() % 20);
    const std::string body = serialize_canonical(random_answers(gen, n));
    const auto base = parse_response(body, n);
    const std::string wrapped =
        prose[gen() % prose.size()] + prose[gen() % prose.size()] + body +
        prose[gen() % prose.size()] + prose[gen() % prose.size()];
    const auto o = parse_response(wrapped, n);
    ASSERT_TRUE(o.ok()) << wrapped;
    ASSERT_EQ(o.answers.size(), base.answers.size());
    for (const auto& [i, a] : base.answers) {
      EXPECT_EQ(o.answers.at(i).judgment, a.judgment);
      EXPECT_EQ(o.answers.at(i).navigation, a.navigation);
    }
  }
}

TEST(ParseResponse, TotalOnRandomBytes) {
  std::mt19937_64 gen(99);
  for (int trial = 0; trial < 5000; ++trial) {
    std::string s(gen() % 64, '\0');
    for (auto& c : s) c = static_cast<char>(gen() & 0xFF);
    for (auto mode : {ParseMode::kStrict, ParseMode::kLenient}) {
      const auto o = parse_response(s, 1 + static_cast<int>(gen() % 10), mode);
      EXPECT_EQ(o.status == ParseStatus::kDecodeError, o.error_class.has_value());
      if (!o.ok()) {
        EXPECT_TRUE(o.answers.empty());
      }
    }
  }
}

TEST(DecodeErrorRate, Ratios) {
  std::vector<ParseOutcome> outcomes(10);
  EXPECT_DOUBLE_EQ(decode_error_rate(outcomes), 0.0);
  for (int i = 0; i < 3; ++i) outcomes[i] = parse_response("nope", 1);
  outcomes[5] = parse_response(R"({"Q1": ["Maybe", "1"]})", 1);  // anomaly only
  EXPECT_DOUBLE_EQ(decode_error_rate(outcomes), 0.3);
  try {
    decode_error_rate({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyInput);
  }
}

}  // namespace
}  // namespace batchqa
