#include "batchqa/corpus.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <string>
#include <utility>

#include <json.hpp>

#include "batchqa/error.h"

namespace batchqa {

namespace {

using nlohmann::json;

const std::vector<std::string> kNoQuestions;

std::string reference_key(std::string_view transcript_id,
                          std::string_view question_id) {
  std::string key;
  key.reserve(transcript_id.size() + question_id.size() + 1);
  key.append(transcript_id);
  key.push_back('\x1f');
  key.append(question_id);
  return key;
}

bool blank(std::string_view text) {
  return std::all_of(text.begin(), text.end(),
                     [](unsigned char c) { return std::isspace(c); });
}

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::kMalformedRecord, what);
}

std::string require_string(const json& record, const char* field) {
  auto it = record.find(field);
  if (it == record.end()) malformed(std::string("missing field '") + field + "'");
  if (!it->is_string()) malformed(std::string("field '") + field + "' must be a string");
  return it->get<std::string>();
}

Transcript transcript_from_json(const json& record) {
  Transcript t;
  t.id = require_string(record, "id");
  auto it = record.find("utterances");
  if (it == record.end() || !it->is_array()) {
    malformed("field 'utterances' must be an array");
  }
  for (const auto& u : *it) {
    if (!u.is_object()) malformed("utterance must be an object");
    Utterance utt;
    auto idx = u.find("index");
    if (idx == u.end() || !idx->is_number_integer()) {
      malformed("utterance 'index' must be an integer");
    }
    const auto value = idx->get<long long>();
    if (value < 1 || value > std::numeric_limits<int>::max()) {
      malformed("utterance index out of range: " + std::to_string(value));
    }
    utt.index = static_cast<int>(value);
    if (auto sp = u.find("speaker"); sp != u.end() && !sp->is_null()) {
      if (!sp->is_string()) malformed("utterance 'speaker' must be a string");
      auto speaker = speaker_from_string(sp->get<std::string>());
      if (!speaker) malformed("unknown speaker '" + sp->get<std::string>() + "'");
      utt.speaker = speaker;
    }
    utt.text = require_string(u, "text");
    t.utterances.push_back(std::move(utt));
  }
  return t;
}

ReferenceAnswer reference_from_json(const json& record) {
  ReferenceAnswer r;
  r.transcript_id = require_string(record, "transcript_id");
  r.question_id = require_string(record, "question_id");
  auto judgment = judgment_from_string(require_string(record, "judgment"));
  if (!judgment) malformed("judgment must be \"Yes\" or \"No\"");
  r.judgment = *judgment;
  auto nav = record.find("navigation");
  if (nav == record.end()) malformed("missing field 'navigation'");
  if (nav->is_string() && nav->get<std::string>() == "NA") {
    r.navigation = NavLabel::na();
  } else if (nav->is_number_integer()) {
    const auto value = nav->get<long long>();
    if (value < 1 || value > std::numeric_limits<int>::max()) {
      malformed("navigation must be a positive integer or \"NA\"");
    }
    r.navigation = NavLabel::index(static_cast<int>(value));
  } else {
    malformed("navigation must be a positive integer or \"NA\"");
  }
  return r;
}

// Calls fn(record) for every non-blank line, prefixing errors with file:line.
template <typename Fn>
void for_each_record(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (blank(line)) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    try {
      json record = json::parse(line);
      if (!record.is_object()) malformed("record must be a JSON object");
      fn(record);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kMalformedRecord, where + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.code(), where + ": " + e.detail());
    }
  }
}

json to_json(const Transcript& t) {
  json utterances = json::array();
  for (const auto& u : t.utterances) {
    json item = {{"index", u.index}};
    if (u.speaker) item["speaker"] = std::string(to_string(*u.speaker));
    item["text"] = u.text;
    utterances.push_back(std::move(item));
  }
  return {{"id", t.id}, {"utterances", std::move(utterances)}};
}

void write_lines(const std::filesystem::path& path,
                 const std::vector<json>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  for (const auto& r : records) out << r.dump() << '\n';
  if (!out) throw Error(ErrorCode::kIoError, "write failed: " + path.string());
}

}  // namespace

std::string_view to_string(Speaker speaker) {
  switch (speaker) {
    case Speaker::kAgent: return "agent";
    case Speaker::kCustomer: return "customer";
    case Speaker::kUnknown: return "unknown";
  }
  return "unknown";
}

std::optional<Speaker> speaker_from_string(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "agent") return Speaker::kAgent;
  if (lower == "customer") return Speaker::kCustomer;
  if (lower == "unknown") return Speaker::kUnknown;
  return std::nullopt;
}

void Corpus::add_transcript(Transcript transcript) {
  if (transcript.id.empty()) malformed("transcript id is empty");
  if (transcript_index_.contains(transcript.id)) {
    malformed("duplicate transcript id '" + transcript.id + "'");
  }
  if (transcript.utterances.empty()) {
    malformed("transcript '" + transcript.id + "' has no utterances");
  }
  for (std::size_t i = 0; i < transcript.utterances.size(); ++i) {
    const auto& u = transcript.utterances[i];
    if (u.index != static_cast<int>(i) + 1) {
      throw Error(ErrorCode::kNonContiguousIndices,
                  "transcript '" + transcript.id + "': expected utterance " +
                      std::to_string(i + 1) + ", found " +
                      std::to_string(u.index));
    }
    if (blank(u.text)) {
      malformed("transcript '" + transcript.id + "': utterance " +
                std::to_string(u.index) + " has empty text");
    }
  }
  transcript_index_.emplace(transcript.id, transcripts_.size());
  transcripts_.push_back(std::move(transcript));
}

void Corpus::add_question(Question question) {
  if (question.id.empty()) malformed("question id is empty");
  if (blank(question.text)) malformed("question '" + question.id + "' has empty text");
  if (question_index_.contains(question.id)) {
    malformed("duplicate question id '" + question.id + "'");
  }
  question_index_.emplace(question.id, questions_.size());
  questions_.push_back(std::move(question));
}

void Corpus::add_reference(ReferenceAnswer reference) {
  const Transcript* transcript = find_transcript(reference.transcript_id);
  if (transcript == nullptr) {
    throw Error(ErrorCode::kDanglingReference,
                "unknown transcript '" + reference.transcript_id + "'");
  }
  if (find_question(reference.question_id) == nullptr) {
    throw Error(ErrorCode::kDanglingReference,
                "unknown question '" + reference.question_id + "'");
  }
  if (reference.navigation.is_unanswered()) {
    malformed("reference navigation must be an index or NA");
  }
  if (reference.navigation.is_index() &&
      (reference.navigation.value() < 1 ||
       reference.navigation.value() > transcript->m())) {
    throw Error(ErrorCode::kDanglingReference,
                "navigation " + reference.navigation.to_string() +
                    " outside 1.." + std::to_string(transcript->m()) +
                    " for transcript '" + transcript->id + "'");
  }
  auto key = reference_key(reference.transcript_id, reference.question_id);
  if (reference_index_.contains(key)) {
    malformed("duplicate reference for (" + reference.transcript_id + ", " +
              reference.question_id + ")");
  }
  reference_index_.emplace(std::move(key), references_.size());
  referenced_[reference.transcript_id].push_back(reference.question_id);
  references_.push_back(std::move(reference));
}

const Transcript* Corpus::find_transcript(std::string_view id) const {
  auto it = transcript_index_.find(std::string(id));
  return it == transcript_index_.end() ? nullptr : &transcripts_[it->second];
}

const Question* Corpus::find_question(std::string_view id) const {
  auto it = question_index_.find(std::string(id));
  return it == question_index_.end() ? nullptr : &questions_[it->second];
}

const ReferenceAnswer* Corpus::find_reference(std::string_view transcript_id,
                                              std::string_view question_id) const {
  auto it = reference_index_.find(reference_key(transcript_id, question_id));
  return it == reference_index_.end() ? nullptr : &references_[it->second];
}

const std::vector<std::string>& Corpus::referenced_questions(
    std::string_view transcript_id) const {
  auto it = referenced_.find(std::string(transcript_id));
  return it == referenced_.end() ? kNoQuestions : it->second;
}

CorpusPaths CorpusPaths::in_directory(const std::filesystem::path& dir) {
  return {dir / "transcripts.jsonl", dir / "questions.jsonl",
          dir / "references.jsonl"};
}

std::vector<Transcript> load_transcripts(const std::filesystem::path& path) {
  Corpus scratch;
  for_each_record(path, [&](const json& record) {
    scratch.add_transcript(transcript_from_json(record));
  });
  return scratch.transcripts();
}

Corpus load_corpus(const CorpusPaths& paths) {
  Corpus corpus;
  for_each_record(paths.transcripts, [&](const json& record) {
    corpus.add_transcript(transcript_from_json(record));
  });
  for_each_record(paths.questions, [&](const json& record) {
    corpus.add_question(
        Question{require_string(record, "id"), require_string(record, "text")});
  });
  for_each_record(paths.references, [&](const json& record) {
    corpus.add_reference(reference_from_json(record));
  });
  return corpus;
}

void write_corpus(const Corpus& corpus, const CorpusPaths& paths) {
  std::vector<json> lines;
  for (const auto& t : corpus.transcripts()) lines.push_back(to_json(t));
  write_lines(paths.transcripts, lines);

  lines.clear();
  for (const auto& q : corpus.questions()) {
    lines.push_back({{"id", q.id}, {"text", q.text}});
  }
  write_lines(paths.questions, lines);

  lines.clear();
  for (const auto& r : corpus.references()) {
    json nav = r.navigation.is_index() ? json(r.navigation.value()) : json("NA");
    lines.push_back({{"transcript_id", r.transcript_id},
                     {"question_id", r.question_id},
                     {"judgment", std::string(to_string(r.judgment))},
                     {"navigation", std::move(nav)}});
  }
  write_lines(paths.references, lines);
}

std::size_t count_whitespace_tokens(std::string_view text) {
  std::size_t count = 0;
  bool in_token = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      in_token = false;
    } else if (!in_token) {
      in_token = true;
      ++count;
    }
  }
  return count;
}

std::size_t nearest_rank_percentile(std::span<const std::size_t> counts, int p) {
  if (counts.empty()) throw Error(ErrorCode::kEmptyCorpus, "no token counts");
  if (p <= 0 || p > 100) {
    throw Error(ErrorCode::kConfigError,
                "percentile must be in (0, 100]: " + std::to_string(p));
  }
  std::vector<std::size_t> sorted(counts.begin(), counts.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  // ceil(p * n / 100) in integer arithmetic
  std::size_t rank = (static_cast<std::size_t>(p) * n + 99) / 100;
  rank = std::max<std::size_t>(rank, 1);
  return sorted[rank - 1];
}

CorpusStats compute_token_stats(std::span<const Transcript> transcripts,
                                const TokenCounter& counter) {
  if (transcripts.empty()) throw Error(ErrorCode::kEmptyCorpus, "no transcripts");
  CorpusStats stats;
  stats.token_counts.reserve(transcripts.size());
  for (const auto& t : transcripts) {
    std::size_t total = 0;
    for (const auto& u : t.utterances) total += counter(u.text);
    stats.token_counts.push_back(total);
  }
  for (int p : {25, 50, 75, 95}) {
    stats.percentiles[p] = nearest_rank_percentile(stats.token_counts, p);
  }
  return stats;
}

CorpusStats compute_token_stats(const Corpus& corpus,
                                const TokenCounter& counter) {
  return compute_token_stats(std::span<const Transcript>(corpus.transcripts()),
                             counter);
}

}  // namespace batchqa
