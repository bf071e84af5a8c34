#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "batchqa/types.h"

namespace batchqa {

enum class Speaker { kAgent, kCustomer, kUnknown };

std::string_view to_string(Speaker speaker);
std::optional<Speaker> speaker_from_string(std::string_view text);

struct Utterance {
  int index = 0;  // 1-based
  std::optional<Speaker> speaker;
  std::string text;
};

struct Transcript {
  std::string id;
  std::vector<Utterance> utterances;

  int m() const { return static_cast<int>(utterances.size()); }
};

struct Question {
  std::string id;
  std::string text;
};

struct ReferenceAnswer {
  std::string transcript_id;
  std::string question_id;
  Judgment judgment = Judgment::kNo;
  NavLabel navigation = NavLabel::na();  // index or NA, never Unanswered
};

// Transcripts, the question pool and the reference map. Built incrementally;
// every add_* call validates the record against what is already present and
// throws batchqa::Error on violation, so a Corpus instance is always valid.
class Corpus {
 public:
  void add_transcript(Transcript transcript);
  void add_question(Question question);
  void add_reference(ReferenceAnswer reference);

  const std::vector<Transcript>& transcripts() const { return transcripts_; }
  const std::vector<Question>& questions() const { return questions_; }
  const std::vector<ReferenceAnswer>& references() const { return references_; }

  const Transcript* find_transcript(std::string_view id) const;
  const Question* find_question(std::string_view id) const;
  const ReferenceAnswer* find_reference(std::string_view transcript_id,
                                        std::string_view question_id) const;

  // Ids of questions that have a reference for this transcript, in the order
  // the references were added. Empty for unknown transcripts.
  const std::vector<std::string>& referenced_questions(
      std::string_view transcript_id) const;

 private:
  std::vector<Transcript> transcripts_;
  std::vector<Question> questions_;
  std::vector<ReferenceAnswer> references_;

  std::unordered_map<std::string, std::size_t> transcript_index_;
  std::unordered_map<std::string, std::size_t> question_index_;
  // key: transcript_id + '\x1f' + question_id
  std::unordered_map<std::string, std::size_t> reference_index_;
  std::unordered_map<std::string, std::vector<std::string>> referenced_;
};

struct CorpusPaths {
  std::filesystem::path transcripts;
  std::filesystem::path questions;
  std::filesystem::path references;

  // <dir>/transcripts.jsonl, <dir>/questions.jsonl, <dir>/references.jsonl
  static CorpusPaths in_directory(const std::filesystem::path& dir);
};

// Reads the three line-delimited files. Errors carry "<file>:<line>".
Corpus load_corpus(const CorpusPaths& paths);

// Transcripts only (for stats over a bare transcript file).
std::vector<Transcript> load_transcripts(const std::filesystem::path& path);

void write_corpus(const Corpus& corpus, const CorpusPaths& paths);

using TokenCounter = std::function<std::size_t(std::string_view)>;

std::size_t count_whitespace_tokens(std::string_view text);

struct CorpusStats {
  std::vector<std::size_t> token_counts;  // one per transcript, input order
  std::map<int, std::size_t> percentiles;  // 25, 50, 75, 95
};

// Nearest-rank percentile: the ceil(p/100 * n)-th smallest value (1-based,
// at least the first). counts must be non-empty, p in (0, 100].
std::size_t nearest_rank_percentile(std::span<const std::size_t> counts, int p);

// Per-transcript token count is the sum over its utterance texts.
CorpusStats compute_token_stats(
    std::span<const Transcript> transcripts,
    const TokenCounter& counter = count_whitespace_tokens);
CorpusStats compute_token_stats(
    const Corpus& corpus, const TokenCounter& counter = count_whitespace_tokens);

}  // namespace batchqa
